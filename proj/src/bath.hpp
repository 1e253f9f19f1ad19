// bath.hpp — Discretized harmonic baths and thermal Wigner sampling.
//
// Mode grid and couplings follow
//   omega_0 = (1 - exp(-omega_max))/N,  omega_I = -ln(1 - I omega_0),
//   c_I     = sqrt(xi omega_0 omega_I),
// so omega_N = omega_max exactly and the implied continuum weight of
// sum c_I^2/(2 omega_I) delta(w - omega_I) is (xi/2) e^{-w}.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace spinbath {

struct BathModes {
    int n_modes{0};
    double xi{0.0};
    double omega_max{0.0};
    double omega0{0.0};
    std::vector<double> omega;  // strictly increasing, omega.back() == omega_max
    std::vector<double> c;      // coupling constants, c_I > 0 iff xi > 0
    std::vector<double> beta;   // per-bath inverse temperatures, beta[ks-1] > 0

    int n_baths() const { return static_cast<int>(beta.size()); }

    // Second-quantized coupling g_I = c_I / sqrt(2 omega_I).
    double g(int mode) const;
};

BathModes discretize_bath(int n_modes, double xi, double omega_max,
                          std::vector<double> beta);

// Gaussian widths of the thermal Wigner density, Eq. product form:
//   Var(R_I) = coth(beta w_I/2)/(2 w_I),  Var(P_I) = (w_I/2) coth(beta w_I/2).
double wigner_var_r(double beta, double omega);
double wigner_var_p(double beta, double omega);

// Per-bath standard deviations, precomputed for the sampling hot loop.
struct WignerWidths {
    std::vector<double> sigma_r;  // [ks * n_modes + I]
    std::vector<double> sigma_p;
    int n_modes{0};
};
WignerWidths wigner_widths(const BathModes& modes);

// Bath phase-space coordinates, laid out bath-major: index ks*N + I.
struct PhasePoint {
    int n_baths{0};
    int n_modes{0};
    std::vector<double> r;
    std::vector<double> p;

    PhasePoint() = default;
    PhasePoint(int baths, int modes)
        : n_baths(baths), n_modes(modes),
          r(static_cast<size_t>(baths) * modes, 0.0),
          p(static_cast<size_t>(baths) * modes, 0.0) {}

    std::span<double> r_bath(int ks) {
        return {r.data() + static_cast<size_t>(ks) * n_modes,
                static_cast<size_t>(n_modes)};
    }
    std::span<double> p_bath(int ks) {
        return {p.data() + static_cast<size_t>(ks) * n_modes,
                static_cast<size_t>(n_modes)};
    }
    std::span<const double> r_bath(int ks) const {
        return {r.data() + static_cast<size_t>(ks) * n_modes,
                static_cast<size_t>(n_modes)};
    }
    std::span<const double> p_bath(int ks) const {
        return {p.data() + static_cast<size_t>(ks) * n_modes,
                static_cast<size_t>(n_modes)};
    }
};

// Draw one bath's (R, P) from the product thermal Wigner density.
// ks is 0-based here and throughout the engine internals.
void sample_thermal(const BathModes& modes, int ks, std::mt19937_64& rng,
                    std::span<double> r_out, std::span<double> p_out);

void sample_thermal(const BathModes& modes, const WignerWidths& widths, int ks,
                    std::mt19937_64& rng, std::span<double> r_out,
                    std::span<double> p_out);

// Normalized Wigner density of one bath evaluated at (R, P).
double wigner_density(const BathModes& modes, int ks, std::span<const double> r,
                      std::span<const double> p);

// Per-sample RNG substream: whitened from (master seed, stream index) so that
// runs are reproducible from a single seed regardless of scheduling.
std::mt19937_64 substream_rng(std::uint64_t master_seed, std::uint64_t stream);

}  // namespace spinbath
