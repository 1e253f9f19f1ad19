#include <doctest.h>

#include <cmath>

#include "lindblad.hpp"
#include "test_util.hpp"

using namespace spinbath;

namespace {

RateSet paper_rates(const std::vector<double>& beta = {1.0, 0.3}) {
    const BathModes modes = discretize_bath(200, 0.007, 3.0, beta);
    return build_rates(0.007, beta, 4.0, modes.omega.front());
}

}  // namespace

TEST_CASE("H_S eigensystem as printed") {
    const EigenSystemHS e = eigensystem_hs(1.0, 0.5);
    CHECK(e.lambda(0) == -0.5);
    CHECK(e.lambda(1) == -0.5);
    CHECK(e.lambda(2) == -1.5);
    CHECK(e.lambda(3) == 2.5);
    CHECK(e.omega == 4.0);
    CHECK(e.omega == e.lambda(3) - e.lambda(2));
    // orthonormality and the printed vectors
    CHECK((e.vectors.transpose() * e.vectors - Eigen::Matrix4d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    CHECK(e.vectors.col(2).dot(e.vectors.col(3)) == 0.0);
    CHECK(e.vectors(1, 2) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(e.vectors(1, 3) == doctest::Approx(-1 / std::sqrt(2.0)));

    const EigenSystemHS e0 = eigensystem_hs(0.0, 0.5);
    CHECK(e0.lambda(2) == e0.lambda(3));
    CHECK(e0.omega == 0.0);
    CHECK_THROWS_AS(eigensystem_hs(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("markov rate values and properties") {
    CHECK(markov_rate(0.007, 1.0, 4.0) ==
          doctest::Approx(4.10298e-4).epsilon(1e-4));
    // detailed balance of the Bose factors
    auto rng = test::test_rng(3);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double beta = u(rng);
        const double w = u(rng);
        CHECK(markov_rate(0.007, beta, w) / markov_rate(0.007, beta, -w) ==
              doctest::Approx(std::exp(beta * w)).epsilon(1e-12));
    }
    // no absorption at zero temperature
    CHECK(markov_rate(0.007, 1e4, -4.0) == 0.0);
    CHECK(markov_rate(0.0, 1.0, 4.0) == 0.0);
    CHECK_THROWS_AS(markov_rate(0.007, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(markov_rate(0.007, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("discrete-bath rate oracle validates the continuum formula") {
    const BathModes modes = discretize_bath(2000, 0.007, 6.0, {1.0});

    SUBCASE("zero coupling") {
        const BathModes free_modes = discretize_bath(2000, 0.0, 6.0, {1.0});
        CHECK(discrete_bath_rate_oracle(free_modes, 1.0, 2.0, 0.05) == 0.0);
    }

    SUBCASE("matches the Markov rate at omega = 2 within 3%") {
        const double oracle = discrete_bath_rate_oracle(modes, 1.0, 2.0, 0.05);
        const double formula = markov_rate(0.007, 1.0, 2.0);
        CHECK(std::abs(oracle / formula - 1.0) < 0.03);
    }

    SUBCASE("stable under refining the discretization") {
        const double coarse = discrete_bath_rate_oracle(modes, 1.0, 2.0, 0.05);
        const BathModes fine = discretize_bath(4000, 0.007, 6.0, {1.0});
        const double refined = discrete_bath_rate_oracle(fine, 1.0, 2.0, 0.05);
        CHECK(std::abs(refined / coarse - 1.0) < 0.01);
    }

    SUBCASE("negative-frequency side carries the Bose factor") {
        const double em = discrete_bath_rate_oracle(modes, 1.0, 2.0, 0.05);
        const double ab = discrete_bath_rate_oracle(modes, 1.0, -2.0, 0.05);
        CHECK(std::abs(ab / em - std::exp(-2.0)) < 0.01);
    }
}

TEST_CASE("omega constants") {
    SUBCASE("equal baths collapse to the single-bath rates") {
        const double gp = markov_rate(0.007, 1.0, 4.0);
        const double gm = markov_rate(0.007, 1.0, -4.0);
        const RateSet r = omega_constants({gp, gp}, {gm, gm}, {0.1, 0.1});
        CHECK(r.omega_plus == gp);
        CHECK(r.omega_minus == gm);
        CHECK(r.omega_total == gp + gm);
        CHECK(r.g_c == doctest::Approx(0.1));
    }

    SUBCASE("zero rates give zero constants") {
        const RateSet r = omega_constants({0, 0}, {0, 0}, {0, 0});
        CHECK(r.omega_total == 0.0);
        CHECK(r.g_c == 0.0);
    }

    SUBCASE("regression value for the nonequilibrium reference point") {
        // frozen after the first validated run of build_rates at
        // beta = (1, 0.3), omega = 4, xi = 0.007
        const RateSet r = paper_rates();
        CHECK(r.omega_total == doctest::Approx(5.83901e-4).epsilon(1e-5));
        CHECK(r.omega_plus / r.omega_minus > 1.0);
    }

    SUBCASE("overrides rescale consistently") {
        const BathModes modes = discretize_bath(200, 0.007, 3.0, {1.0, 0.3});
        const RateSet r = build_rates(0.007, {1.0, 0.3}, 4.0,
                                      modes.omega.front(), 0.5, 1e-3);
        CHECK(r.g_c == 0.5);
        CHECK(r.omega_total == doctest::Approx(1e-3).epsilon(1e-12));
        CHECK(r.omega_plus + r.omega_minus ==
              doctest::Approx(1e-3).epsilon(1e-12));
        CHECK(0.5 * (r.gamma_plus[0] + r.gamma_plus[1]) ==
              doctest::Approx(r.omega_plus).epsilon(1e-12));
    }
}

TEST_CASE("closed form: populations of the invariant levels stay put") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    const RateSet rates = paper_rates();
    auto rng = test::test_rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Matrix4cd rho0 = test::random_density_matrix(4, rng);
        const Eigen::Matrix4cd f0 =
            eig.vectors.transpose().cast<std::complex<double>>() * rho0 *
            eig.vectors.cast<std::complex<double>>();
        for (double t : {0.3, 2.0, 15.0}) {
            const Eigen::Matrix4cd rho = evolve_closed_form(rho0, t, eig, rates);
            const Eigen::Matrix4cd f =
                eig.vectors.transpose().cast<std::complex<double>>() * rho *
                eig.vectors.cast<std::complex<double>>();
            CHECK(std::abs(f(0, 0) - f0(0, 0)) < 1e-13);
            CHECK(std::abs(f(1, 1) - f0(1, 1)) < 1e-13);
        }
    }
}

TEST_CASE("closed form reproduces the printed rho22 curves") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    const RateSet rates = paper_rates();

    SUBCASE("psi-minus start") {
        Eigen::Vector4cd psi;
        psi << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0, 0.0;
        const Eigen::Matrix4cd rho0 = psi * psi.adjoint();
        for (double t = 0.0; t <= 20.0; t += 0.37) {
            const Eigen::Matrix4cd rho = evolve_closed_form(rho0, t, eig, rates);
            CHECK(rho(1, 1).real() ==
                  doctest::Approx(
                      rho22_reference(0.25, t, eig.omega, rates.omega_total))
                      .epsilon(1e-12));
        }
    }

    SUBCASE("up-down start") {
        Eigen::Matrix4cd rho0 = Eigen::Matrix4cd::Zero();
        rho0(1, 1) = 1.0;
        for (double t = 0.0; t <= 20.0; t += 0.41) {
            const Eigen::Matrix4cd rho = evolve_closed_form(rho0, t, eig, rates);
            CHECK(rho(1, 1).real() ==
                  doctest::Approx(
                      rho22_reference(0.5, t, eig.omega, rates.omega_total))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("closed form: identity at t = 0, trace one, positivity") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    const RateSet rates = paper_rates({0.005, 0.005});
    auto rng = test::test_rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Matrix4cd rho0 = test::random_density_matrix(4, rng);
        CHECK((evolve_closed_form(rho0, 0.0, eig, rates) - rho0)
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
        for (double t : {0.1, 1.0, 7.0, 30.0}) {
            const Eigen::Matrix4cd rho = evolve_closed_form(rho0, t, eig, rates);
            CHECK(std::abs(rho.trace() - std::complex<double>(1, 0)) < 1e-13);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
            CHECK(es.eigenvalues().minCoeff() > -1e-10);
        }
    }
}

TEST_CASE("closed form: printed coherence decay rates") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    const RateSet rates = paper_rates();
    auto rng = test::test_rng(15);
    const Eigen::Matrix4cd rho0 = test::random_density_matrix(4, rng);
    const Eigen::Matrix4cd f0 =
        eig.vectors.transpose().cast<std::complex<double>>() * rho0 *
        eig.vectors.cast<std::complex<double>>();
    for (double t : {0.5, 3.0, 12.0}) {
        const Eigen::Matrix4cd rho = evolve_closed_form(rho0, t, eig, rates);
        const Eigen::Matrix4cd f =
            eig.vectors.transpose().cast<std::complex<double>>() * rho *
            eig.vectors.cast<std::complex<double>>();
        CHECK(std::abs(f(0, 1)) ==
              doctest::Approx(std::abs(f0(0, 1)) *
                              std::exp(-4.0 * rates.g_c * t))
                  .epsilon(1e-10));
        CHECK(std::abs(f(2, 3)) ==
              doctest::Approx(std::abs(f0(2, 3)) *
                              std::exp(-rates.omega_total * t))
                  .epsilon(1e-10));
    }
}

TEST_CASE("steady state of the {3,4} block is the Gibbs ratio") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    const BathModes modes = discretize_bath(200, 0.007, 3.0, {1.0, 1.0});
    const RateSet rates =
        build_rates(0.007, {1.0, 1.0}, eig.omega, modes.omega.front());
    auto rng = test::test_rng(19);
    const Eigen::Matrix4cd rho0 = test::random_density_matrix(4, rng);
    const double t_inf = 40.0 / rates.omega_total;
    const Eigen::Matrix4cd rho = evolve_closed_form(rho0, t_inf, eig, rates);
    const Eigen::Matrix4cd f =
        eig.vectors.transpose().cast<std::complex<double>>() * rho *
        eig.vectors.cast<std::complex<double>>();
    CHECK(f(2, 2).real() / f(3, 3).real() ==
          doctest::Approx(std::exp(4.0)).epsilon(1e-10));
}

TEST_CASE("liouvillian oracle: unitary limit") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    const RateSet zero{};
    Eigen::Matrix4cd rho0 = Eigen::Matrix4cd::Zero();
    rho0(1, 1) = 1.0;
    for (double t : {0.3, 1.7, 6.1}) {
        const Eigen::Matrix4cd rho = liouvillian_oracle(rho0, t, eig, zero);
        CHECK(rho(1, 1).real() ==
              doctest::Approx(0.5 * (1 + std::cos(4 * t))).epsilon(1e-10));
        CHECK(std::abs(rho.trace() - std::complex<double>(1, 0)) < 1e-12);
    }
}

TEST_CASE("closed form equals the liouvillian exponential") {
    const EigenSystemHS eig = eigensystem_hs(1.0, 0.5);
    auto rng = test::test_rng(23);
    for (const auto& beta : {std::vector<double>{1.0, 0.3},
                             std::vector<double>{0.005, 0.005}}) {
        const RateSet rates = paper_rates(beta);
        for (int trial = 0; trial < 25; ++trial) {
            const Eigen::Matrix4cd rho0 = test::random_density_matrix(4, rng);
            for (double t : {0.5, 1.0, 5.0, 20.0}) {
                const Eigen::Matrix4cd a = evolve_closed_form(rho0, t, eig, rates);
                const Eigen::Matrix4cd b = liouvillian_oracle(rho0, t, eig, rates);
                CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
                // the matrix exponential of the stiff high-temperature
                // generator (g_c ~ 1e3) keeps the trace to ~1e-11
                CHECK(std::abs(b.trace() - std::complex<double>(1, 0)) < 1e-11);
            }
        }
    }
}
