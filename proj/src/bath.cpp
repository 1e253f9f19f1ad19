#include "bath.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinbath {

double BathModes::g(int mode) const {
    return c[static_cast<size_t>(mode)] /
           std::sqrt(2.0 * omega[static_cast<size_t>(mode)]);
}

BathModes discretize_bath(int n_modes, double xi, double omega_max,
                          std::vector<double> beta) {
    if (n_modes < 1) throw std::invalid_argument("bath needs at least one mode");
    if (xi < 0.0) throw std::invalid_argument("xi must be nonnegative");
    if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be positive");
    for (double b : beta) {
        if (!(b > 0.0)) throw std::invalid_argument("beta must be positive");
    }

    BathModes m;
    m.n_modes = n_modes;
    m.xi = xi;
    m.omega_max = omega_max;
    m.omega0 = (1.0 - std::exp(-omega_max)) / n_modes;
    m.beta = std::move(beta);
    m.omega.resize(static_cast<size_t>(n_modes));
    m.c.resize(static_cast<size_t>(n_modes));
    for (int i = 1; i <= n_modes; ++i) {
        const double w = -std::log1p(-static_cast<double>(i) * m.omega0);
        m.omega[static_cast<size_t>(i - 1)] = w;
        m.c[static_cast<size_t>(i - 1)] = std::sqrt(xi * m.omega0 * w);
    }
    return m;
}

double wigner_var_r(double beta, double omega) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    return 1.0 / (2.0 * omega * std::tanh(0.5 * beta * omega));
}

double wigner_var_p(double beta, double omega) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    return 0.5 * omega / std::tanh(0.5 * beta * omega);
}

WignerWidths wigner_widths(const BathModes& modes) {
    WignerWidths w;
    w.n_modes = modes.n_modes;
    const size_t total =
        static_cast<size_t>(modes.n_baths()) * modes.n_modes;
    w.sigma_r.resize(total);
    w.sigma_p.resize(total);
    for (int ks = 0; ks < modes.n_baths(); ++ks) {
        const double beta = modes.beta[static_cast<size_t>(ks)];
        for (int i = 0; i < modes.n_modes; ++i) {
            const double om = modes.omega[static_cast<size_t>(i)];
            const size_t idx = static_cast<size_t>(ks) * modes.n_modes + i;
            w.sigma_r[idx] = std::sqrt(wigner_var_r(beta, om));
            w.sigma_p[idx] = std::sqrt(wigner_var_p(beta, om));
        }
    }
    return w;
}

void sample_thermal(const BathModes& modes, const WignerWidths& widths, int ks,
                    std::mt19937_64& rng, std::span<double> r_out,
                    std::span<double> p_out) {
    if (ks < 0 || ks >= modes.n_baths()) {
        throw std::invalid_argument("bath index out of range");
    }
    if (static_cast<int>(r_out.size()) != modes.n_modes ||
        static_cast<int>(p_out.size()) != modes.n_modes) {
        throw std::invalid_argument("sample_thermal: output size mismatch");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    const size_t base = static_cast<size_t>(ks) * modes.n_modes;
    for (int i = 0; i < modes.n_modes; ++i) {
        r_out[static_cast<size_t>(i)] = widths.sigma_r[base + i] * gauss(rng);
        p_out[static_cast<size_t>(i)] = widths.sigma_p[base + i] * gauss(rng);
    }
}

void sample_thermal(const BathModes& modes, int ks, std::mt19937_64& rng,
                    std::span<double> r_out, std::span<double> p_out) {
    sample_thermal(modes, wigner_widths(modes), ks, rng, r_out, p_out);
}

double wigner_density(const BathModes& modes, int ks, std::span<const double> r,
                      std::span<const double> p) {
    if (ks < 0 || ks >= modes.n_baths()) {
        throw std::invalid_argument("bath index out of range");
    }
    if (static_cast<int>(r.size()) != modes.n_modes ||
        static_cast<int>(p.size()) != modes.n_modes) {
        throw std::invalid_argument("wigner_density: dimension mismatch");
    }
    const double beta = modes.beta[static_cast<size_t>(ks)];
    double log_density = 0.0;
    for (int i = 0; i < modes.n_modes; ++i) {
        const double om = modes.omega[static_cast<size_t>(i)];
        const double th = std::tanh(0.5 * beta * om);
        const double h_mode = 0.5 * p[static_cast<size_t>(i)] * p[static_cast<size_t>(i)] +
                              0.5 * om * om * r[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        log_density += std::log(th / std::numbers::pi) - 2.0 * th / om * h_mode;
    }
    return std::exp(log_density);
}

std::mt19937_64 substream_rng(std::uint64_t master_seed, std::uint64_t stream) {
    // splitmix64 finalizer over the keyed stream index
    std::uint64_t z = master_seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    return std::mt19937_64(z);
}

}  // namespace spinbath
