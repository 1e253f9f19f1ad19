// estimator.hpp — Monte-Carlo estimate of the reduced density matrix in the
// natural basis: thermal Wigner sampling, per-pair adiabatic trajectories,
// basis rotation at every output time, mean and standard error over samples.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "adiabatic.hpp"
#include "bath.hpp"
#include "model.hpp"

namespace spinbath {

struct EstimatorOptions {
    double dt{0.01};
    double t_max{20.0};
    int output_points{200};       // grid has output_points + 1 rows incl. t = 0
    std::uint64_t n_samples{5000};
    std::uint64_t seed{1};
    int threads{0};               // 0 = all hardware threads
    double weight_cutoff{1e-14};  // zero-weight pairs are skipped
    double max_aborted_fraction{1e-3};
};

struct ReducedDensitySeries {
    std::vector<double> t;
    std::vector<Eigen::MatrixXcd> rho;       // mean estimate per time
    std::vector<Eigen::MatrixXd> stderr_re;  // standard error, real part
    std::vector<Eigen::MatrixXd> stderr_im;  // standard error, imag part
    std::vector<double> trace_dev;           // |mean trace - 1| per time
    std::vector<double> trace_stderr;        // stderr of the trace (re/im quad)
    double max_sample_trace_dev{0.0};        // per-sample identity check
    double max_sample_herm_dev{0.0};
    std::uint64_t n_samples{0};              // accepted samples
    std::uint64_t aborted{0};
    std::uint64_t seed{0};
};

// rho^{aa'}(0) = (U0^T rho_S0 U0)_{aa'} at the sampled configuration.
// Rejects non-unit trace (1e-10) and non-Hermitian input.
Eigen::MatrixXcd initial_adiabatic_weights(const Eigen::MatrixXcd& rho_s0,
                                           const AdiabaticFrame& frame0);

ReducedDensitySeries estimate_reduced_density(const ChainModel& model,
                                              const BathModes& modes,
                                              const Eigen::MatrixXcd& rho_s0,
                                              const EstimatorOptions& options);

}  // namespace spinbath
