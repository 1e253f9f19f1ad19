#include "fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spinbath {

namespace {

struct Params {
    double a, b, g, nu;
};

double cost_of(std::span<const double> t, std::span<const double> y,
               const Params& p, Eigen::VectorXd* resid) {
    double c = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
        const double model =
            p.a + p.b * std::exp(-p.g * t[i]) * std::cos(p.nu * t[i]);
        const double r = y[i] - model;
        if (resid) (*resid)(static_cast<Eigen::Index>(i)) = r;
        c += r * r;
    }
    return c;
}

// Plain DFT magnitudes on a Hann-windowed detrended series; n is small
// (hundreds of points), so O(n^2) is irrelevant here.
std::vector<double> spectral_peaks(std::span<const double> t,
                                   std::span<const double> y, int max_peaks) {
    const size_t n = t.size();
    const double dt = (t[n - 1] - t[0]) / static_cast<double>(n - 1);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);

    const size_t nfreq = n / 2;
    std::vector<double> mag(nfreq, 0.0);
    for (size_t k = 1; k < nfreq; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double win =
                0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(n - 1));
            const double ph = 2.0 * std::numbers::pi * static_cast<double>(k) *
                              static_cast<double>(i) / static_cast<double>(n);
            acc += (y[i] - mean) * win * std::polar(1.0, -ph);
        }
        mag[k] = std::abs(acc);
    }

    std::vector<double> peaks;
    std::vector<size_t> order(nfreq);
    for (size_t k = 0; k < nfreq; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](size_t l, size_t r) { return mag[l] > mag[r]; });
    for (size_t k : order) {
        if (static_cast<int>(peaks.size()) >= max_peaks) break;
        if (k == 0) continue;
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         (static_cast<double>(n) * dt);
        bool close = false;
        for (double p : peaks) close = close || std::abs(p - w) < 0.3;
        if (!close) peaks.push_back(w);
    }
    return peaks;
}

DampedCosineFit lm_from(std::span<const double> t, std::span<const double> y,
                        Params p) {
    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    Eigen::VectorXd resid(n);
    Eigen::MatrixXd jac(n, 4);
    double cost = cost_of(t, y, p, &resid);
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < 300; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ti = t[static_cast<size_t>(i)];
            const double e = std::exp(-p.g * ti);
            const double co = std::cos(p.nu * ti);
            const double si = std::sin(p.nu * ti);
            jac(i, 0) = 1.0;
            jac(i, 1) = e * co;
            jac(i, 2) = -p.b * ti * e * co;
            jac(i, 3) = -p.b * ti * e * si;
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d jtr = jac.transpose() * resid;
        Eigen::Matrix4d damped = jtj;
        damped.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
        const Eigen::Vector4d step = damped.ldlt().solve(jtr);

        Params trial{p.a + step(0), p.b + step(1), p.g + step(2), p.nu + step(3)};
        const double trial_cost = cost_of(t, y, trial, nullptr);
        if (trial_cost < cost) {
            const double rel = step.cwiseAbs().maxCoeff() /
                               std::max(1e-9, std::abs(p.nu) + std::abs(p.b));
            p = trial;
            cost = cost_of(t, y, p, &resid);
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-13) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                converged = true;  // stationary to working precision
                break;
            }
        }
    }

    DampedCosineFit out;
    out.offset = p.a;
    out.amplitude = p.b;
    out.decay = p.g;
    out.frequency = std::abs(p.nu);
    out.residual_rms = std::sqrt(cost / static_cast<double>(n));
    out.converged = converged;
    return out;
}

}  // namespace

DampedCosineFit fit_damped_cosine(std::span<const double> t,
                                  std::span<const double> y,
                                  double frequency_hint) {
    if (t.size() != y.size() || t.size() < 8) {
        throw std::invalid_argument("fit_damped_cosine: need >= 8 samples");
    }

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());

    std::vector<double> starts = spectral_peaks(t, y, 4);
    if (frequency_hint > 0.0) starts.insert(starts.begin(), frequency_hint);

    // The fit targets an oscillation with at least three periods in the
    // window; slower "solutions" are a degenerate pure exponential with a
    // meaningless frequency and are used only as a last resort.
    const double window = t.back() - t.front();
    const double min_frequency = 3.0 * 2.0 * std::numbers::pi / window;

    DampedCosineFit best, best_degenerate;
    bool have = false, have_degenerate = false;
    for (double nu0 : starts) {
        for (double g0 : {0.0, 0.05, 0.5}) {
            const Params p0{mean, y[0] - mean, g0, nu0};
            const DampedCosineFit fit = lm_from(t, y, p0);
            if (fit.frequency >= min_frequency * (1.0 - 1e-9)) {
                if (!have || fit.residual_rms < best.residual_rms) {
                    best = fit;
                    have = true;
                }
            } else if (!have_degenerate ||
                       fit.residual_rms < best_degenerate.residual_rms) {
                best_degenerate = fit;
                have_degenerate = true;
            }
        }
    }
    if (have) return best;
    if (have_degenerate) return best_degenerate;
    return lm_from(t, y, Params{mean, y[0] - mean, 0.0, 1.0});
}

}  // namespace spinbath
