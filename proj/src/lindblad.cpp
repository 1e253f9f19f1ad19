#include "lindblad.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace spinbath {

namespace {
constexpr double kPi = std::numbers::pi;

double bose_n(double beta, double omega) {
    return 1.0 / std::expm1(beta * omega);
}
}  // namespace

EigenSystemHS eigensystem_hs(double j, double jz) {
    if (j < 0.0) throw std::invalid_argument("eigensystem_hs: j must be >= 0");
    EigenSystemHS e;
    e.lambda << -jz, -jz, -2.0 * j + jz, 2.0 * j + jz;
    e.omega = 4.0 * j;
    const double s = 1.0 / std::sqrt(2.0);
    e.vectors.setZero();
    e.vectors(0, 0) = 1.0;                       // |1,1>
    e.vectors(3, 1) = 1.0;                       // |0,0>
    e.vectors(1, 2) = s;  e.vectors(2, 2) = s;   // (|1,0>+|0,1>)/sqrt2
    e.vectors(1, 3) = -s; e.vectors(2, 3) = s;   // (-|1,0>+|0,1>)/sqrt2
    return e;
}

double markov_rate(double xi, double beta, double omega_signed) {
    if (xi < 0.0) throw std::invalid_argument("markov_rate: xi must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("markov_rate: beta must be > 0");
    if (omega_signed == 0.0) {
        throw std::invalid_argument(
            "markov_rate: rate at w = 0 diverges for this bath; "
            "use the g_c convention instead");
    }
    const double w = std::abs(omega_signed);
    const double n = bose_n(beta, w);
    const double pref = kPi * xi * std::exp(-w);
    return omega_signed > 0.0 ? pref * (n + 1.0) : pref * n;
}

double discrete_bath_rate_oracle(const BathModes& modes, double beta,
                                 double omega, double broadening) {
    if (!(broadening > 0.0)) {
        throw std::invalid_argument("broadening must be positive");
    }
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    const double eta = broadening;
    if (std::abs(omega) > modes.omega_max + 3.0 * eta) {
        std::cerr << "warning: discrete bath has no support at |omega| = "
                  << std::abs(omega) << " (omega_max = " << modes.omega_max
                  << ")\n";
    }
    const double norm = 1.0 / (eta * std::sqrt(2.0 * kPi));
    auto kernel = [&](double x) {
        return norm * std::exp(-0.5 * x * x / (eta * eta));
    };
    double rate = 0.0;
    for (int i = 0; i < modes.n_modes; ++i) {
        const double wi = modes.omega[static_cast<size_t>(i)];
        const double g = modes.g(i);
        const double n = bose_n(beta, wi);
        rate += 2.0 * kPi * g * g *
                ((n + 1.0) * kernel(omega - wi) + n * kernel(omega + wi));
    }
    return rate;
}

RateSet omega_constants(const std::array<double, 2>& gamma_plus,
                        const std::array<double, 2>& gamma_minus,
                        const std::array<double, 2>& gamma0) {
    RateSet r;
    r.gamma_plus = gamma_plus;
    r.gamma_minus = gamma_minus;
    r.gamma0 = gamma0;
    r.omega_plus = 0.5 * (gamma_plus[0] + gamma_plus[1]);
    r.omega_minus = 0.5 * (gamma_minus[0] + gamma_minus[1]);
    r.omega_total = r.omega_plus + r.omega_minus;
    r.g_c = 0.5 * (gamma0[0] + gamma0[1]);
    return r;
}

RateSet build_rates(double xi, const std::vector<double>& beta, double omega,
                    double omega_ref_zero, std::optional<double> g_c_override,
                    std::optional<double> omega_total_override) {
    if (beta.size() != 2) {
        throw std::invalid_argument("build_rates: expected two baths");
    }
    std::array<double, 2> gp{}, gm{}, g0{};
    for (int i = 0; i < 2; ++i) {
        if (xi == 0.0 || omega == 0.0) {
            gp[static_cast<size_t>(i)] = 0.0;
            gm[static_cast<size_t>(i)] = 0.0;
        } else {
            gp[static_cast<size_t>(i)] = markov_rate(xi, beta[static_cast<size_t>(i)], +omega);
            gm[static_cast<size_t>(i)] = markov_rate(xi, beta[static_cast<size_t>(i)], -omega);
        }
        if (xi == 0.0) {
            g0[static_cast<size_t>(i)] = 0.0;
        } else {
            g0[static_cast<size_t>(i)] =
                markov_rate(xi, beta[static_cast<size_t>(i)], +omega_ref_zero) +
                markov_rate(xi, beta[static_cast<size_t>(i)], -omega_ref_zero);
        }
    }
    RateSet r = omega_constants(gp, gm, g0);
    if (g_c_override) {
        r.g_c = *g_c_override;
    }
    if (omega_total_override) {
        const double total = *omega_total_override;
        // rescale the per-bath rates as well so the Liouvillian oracle and
        // the closed form keep describing the same generator
        if (r.omega_total > 0.0) {
            const double scale = total / r.omega_total;
            r.omega_plus *= scale;
            r.omega_minus *= scale;
            for (auto& g : r.gamma_plus) g *= scale;
            for (auto& g : r.gamma_minus) g *= scale;
        } else {
            r.omega_plus = total;
            r.omega_minus = 0.0;
            r.gamma_plus = {total, total};
            r.gamma_minus = {0.0, 0.0};
        }
        r.omega_total = total;
    }
    return r;
}

Eigen::Matrix4cd evolve_closed_form(const Eigen::Matrix4cd& rho0, double t,
                                    const EigenSystemHS& eig,
                                    const RateSet& rates) {
    using cplx = std::complex<double>;
    const Eigen::Matrix4d& T = eig.vectors;
    Eigen::Matrix4cd f = T.transpose().cast<cplx>() * rho0 * T.cast<cplx>();

    const double Op = rates.omega_plus;
    const double Om = rates.omega_minus;
    const double O = rates.omega_total;
    const double gc = rates.g_c;
    const auto& l = eig.lambda;

    // populations: f11, f22 invariant; the {3,4} pair relaxes at 2*Omega
    // toward f33/f44 = Omega_plus/Omega_minus.
    const cplx f33 = f(2, 2);
    const cplx f44 = f(3, 3);
    if (O > 0.0) {
        const cplx s = f33 + f44;
        const cplx q = Om * f33 - Op * f44;
        const double e = std::exp(-2.0 * O * t);
        f(2, 2) = (Op * s + e * q) / O;
        f(3, 3) = (Om * s - e * q) / O;
    }

    auto phase = [&](int a, int b) {  // e^{i t (l_b - l_a)} for f_ab
        return std::polar(1.0, t * (l(b) - l(a)));
    };
    f(0, 1) *= std::exp(-4.0 * gc * t) * phase(0, 1);
    f(0, 2) *= std::exp(-(gc + Om) * t) * phase(0, 2);
    f(0, 3) *= std::exp(-(gc + Op) * t) * phase(0, 3);
    f(1, 2) *= std::exp(-(gc + Om) * t) * phase(1, 2);
    f(1, 3) *= std::exp(-(gc + Op) * t) * phase(1, 3);
    f(2, 3) *= std::exp(-O * t) * phase(2, 3);
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
            f(b, a) = std::conj(f(a, b));
        }
    }
    return T.cast<cplx>() * f * T.transpose().cast<cplx>();
}

namespace {

using Matrix16cd = Eigen::Matrix<std::complex<double>, 16, 16>;

// vec(A rho B) = (B^T kron A) vec(rho), column-major vec.
Matrix16cd kron4(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) {
    Matrix16cd k;
    for (int i = 0; i < 4; ++i) {
        for (int jj = 0; jj < 4; ++jj) {
            k.block<4, 4>(4 * i, 4 * jj) = a(i, jj) * b;
        }
    }
    return k;
}

Matrix16cd dissipator(const Eigen::Matrix4cd& a) {
    const Eigen::Matrix4cd ada = a.adjoint() * a;
    const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
    return kron4(a.conjugate(), a) - 0.5 * kron4(id, ada) -
           0.5 * kron4(ada.transpose(), id);
}

}  // namespace

Eigen::Matrix4cd liouvillian_oracle(const Eigen::Matrix4cd& rho0, double t,
                                    const EigenSystemHS& eig,
                                    const RateSet& rates) {
    using cplx = std::complex<double>;
    const Eigen::Matrix4d& T = eig.vectors;
    const Eigen::Matrix4cd h =
        (T * eig.lambda.asDiagonal() * T.transpose()).cast<cplx>();
    const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();

    // V_(1) = -|l3><l4|, V_(2) = +|l3><l4| (lowering); V0 = |l1><l1|-|l2><l2|.
    const Eigen::Matrix4cd lower34 =
        (T.col(2) * T.col(3).transpose()).cast<cplx>();
    const Eigen::Matrix4cd v0 =
        (T.col(0) * T.col(0).transpose() - T.col(1) * T.col(1).transpose())
            .cast<cplx>();
    const std::array<Eigen::Matrix4cd, 2> v = {-lower34, lower34};

    const cplx im(0.0, 1.0);
    Matrix16cd gen = -im * (kron4(id, h) - kron4(h.transpose(), id));
    for (int i = 0; i < 2; ++i) {
        gen += rates.gamma_plus[static_cast<size_t>(i)] * dissipator(v[static_cast<size_t>(i)]);
        gen += rates.gamma_minus[static_cast<size_t>(i)] *
               dissipator(v[static_cast<size_t>(i)].adjoint());
    }
    // both baths share V0, so the two decoherence channels reduce to
    // sum_i gamma0_i D[V0] = 2 g_c D[V0]; using g_c keeps any override
    // consistent between oracle and closed form.
    gen += 2.0 * rates.g_c * dissipator(v0);

    const Matrix16cd propagator = (t * gen).exp();
    Eigen::Map<const Eigen::Matrix<cplx, 16, 1>> v_in(rho0.data());
    Eigen::Matrix<cplx, 16, 1> v_out = propagator * v_in;
    return Eigen::Map<const Eigen::Matrix4cd>(v_out.data());
}

double rho22_reference(double q, double t, double omega, double omega_total) {
    return q * (1.0 + std::exp(-omega_total * t) * std::cos(omega * t));
}

}  // namespace spinbath
