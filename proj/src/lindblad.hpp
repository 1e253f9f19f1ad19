// lindblad.hpp — Born-Markov / rotating-wave closed-form solution for the
// two-spin chain, plus a brute-force Liouvillian-exponential oracle.
//
// Rate convention: gamma(+w) = pi xi e^{-w} (n+1) is the emission rate and
// gamma(-w) = pi xi e^{-w} n the absorption rate, so gamma(+)/gamma(-) =
// e^{beta w} (detailed balance). Omega_plus/Omega_minus are the bath averages
// of the two; populations relax at 2*Omega toward the Gibbs ratio
// f33/f44 -> Omega_plus/Omega_minus, coherences f34 decay at Omega and f12 at
// 4 g_c. gamma(0+)+gamma(0-) diverges for this spectral form; by convention it
// is evaluated at the lowest discretized mode frequency unless overridden.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>

#include "bath.hpp"

namespace spinbath {

struct EigenSystemHS {
    Eigen::Vector4d lambda;    // (-jz, -jz, -2j+jz, 2j+jz)
    Eigen::Matrix4d vectors;   // columns |lambda_i> in the natural basis
    double omega{0.0};         // transition frequency 4j
};

// Eigenpairs of H_S for j_x = j_y = j:
//   |l1> = |1,1>, |l2> = |0,0>, |l3> = (|1,0>+|0,1>)/sqrt2,
//   |l4> = (-|1,0>+|0,1>)/sqrt2.
EigenSystemHS eigensystem_hs(double j, double jz);

// Markovian rate at signed frequency; w = 0 is rejected (see g_c convention).
double markov_rate(double xi, double beta, double omega_signed);

// Broadened discrete-bath evaluation of the same Fourier integral:
//   2 pi sum_I g_I^2 [ (n_I+1) d_eta(w - w_I) + n_I d_eta(w + w_I) ].
// Validates markov_rate against the actual discretization.
double discrete_bath_rate_oracle(const BathModes& modes, double beta,
                                 double omega, double broadening);

struct RateSet {
    std::array<double, 2> gamma_plus{};   // emission, per bath
    std::array<double, 2> gamma_minus{};  // absorption, per bath
    std::array<double, 2> gamma0{};       // gamma(0+)+gamma(0-), per bath
    double omega_plus{0.0};
    double omega_minus{0.0};
    double omega_total{0.0};              // omega_plus + omega_minus
    double g_c{0.0};
};

// Omega_pm = (gamma^(1)(pm w) + gamma^(2)(pm w))/2 ; g_c = sum_i gamma0_i / 2.
RateSet omega_constants(const std::array<double, 2>& gamma_plus,
                        const std::array<double, 2>& gamma_minus,
                        const std::array<double, 2>& gamma0);

// Assemble the full rate set from the spectral parameters. gamma(0+-) is
// evaluated at omega_ref_zero (typically the lowest discretized mode
// frequency); g_c_override/omega_override replace the derived values if set.
RateSet build_rates(double xi, const std::vector<double>& beta, double omega,
                    double omega_ref_zero,
                    std::optional<double> g_c_override = std::nullopt,
                    std::optional<double> omega_total_override = std::nullopt);

// Closed-form solution rho(t) of the master equation, natural basis in and out.
Eigen::Matrix4cd evolve_closed_form(const Eigen::Matrix4cd& rho0, double t,
                                    const EigenSystemHS& eig,
                                    const RateSet& rates);

// Independent check: assembles the 16x16 superoperator (unitary part plus the
// dissipation and decoherence channels of both baths) and applies its matrix
// exponential to vec(rho0).
Eigen::Matrix4cd liouvillian_oracle(const Eigen::Matrix4cd& rho0, double t,
                                    const EigenSystemHS& eig,
                                    const RateSet& rates);

// rho22(t) = q [1 + e^{-Omega t} cos(w t)] with q = 1/4 (psi-minus start) or
// q = 1/2 (up-down start); the reference curves for the comparisons.
double rho22_reference(double q, double t, double omega, double omega_total);

}  // namespace spinbath
