// fit.hpp — Least-squares fit of a + b e^{-g t} cos(nu t) to a time series.

#pragma once

#include <span>

namespace spinbath {

struct DampedCosineFit {
    double offset{0.0};     // a
    double amplitude{0.0};  // b
    double decay{0.0};      // g
    double frequency{0.0};  // nu
    double residual_rms{0.0};
    bool converged{false};
};

// Multi-start Levenberg-Marquardt: initial frequencies are taken from the
// dominant spectral peaks (plus any caller hint), the best residual wins.
// The series must cover at least three oscillation periods; fits below that
// frequency floor degenerate into a pure exponential and are only returned
// when no oscillatory candidate exists.
// Throws std::invalid_argument when the series is shorter than 8 points.
DampedCosineFit fit_damped_cosine(std::span<const double> t,
                                  std::span<const double> y,
                                  double frequency_hint = 0.0);

}  // namespace spinbath
