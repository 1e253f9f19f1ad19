#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "adiabatic.hpp"
#include "test_util.hpp"

using namespace spinbath;

namespace {

const SpinChainParams kPaperParams{2, 1.0, 1.0, 0.5};

BathModes paper_bath(std::vector<double> beta) {
    return discretize_bath(200, 0.007, 3.0, std::move(beta));
}

BathModes decoupled_bath(std::vector<double> beta) {
    return discretize_bath(200, 0.0, 3.0, std::move(beta));
}

PhasePoint thermal_point(const BathModes& modes, std::uint64_t seed) {
    PhasePoint x(modes.n_baths(), modes.n_modes);
    const WignerWidths w = wigner_widths(modes);
    auto rng = substream_rng(seed, 0);
    for (int ks = 0; ks < modes.n_baths(); ++ks) {
        sample_thermal(modes, w, ks, rng, x.r_bath(ks), x.p_bath(ks));
    }
    return x;
}

}  // namespace

TEST_CASE("ordering: permuted identity comes back as the identity") {
    Eigen::MatrixXd raw(4, 4);
    raw.setZero();
    raw(0, 2) = 1;  // e1 sits in column 3
    raw(1, 0) = 1;
    raw(2, 3) = 1;
    raw(3, 1) = 1;
    Eigen::Vector4d vals(10, 20, 30, 40);
    const AdiabaticFrame f = order_eigenvectors(raw, vals);
    CHECK((f.vectors - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(f.energies(0) == 30);
    CHECK(f.energies(1) == 10);
    CHECK(f.energies(2) == 40);
    CHECK(f.energies(3) == 20);
}

TEST_CASE("ordering: negated column gets its sign fixed") {
    Eigen::MatrixXd raw = Eigen::MatrixXd::Identity(4, 4);
    raw.col(1) *= -1.0;
    const AdiabaticFrame f =
        order_eigenvectors(raw, Eigen::Vector4d(1, 2, 3, 4));
    CHECK((f.vectors - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("ordering: H_S eigenvectors land on the natural columns") {
    // ascending-eigenvalue raw input as a dense solver would return it
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXd raw(4, 4);
    raw.col(0) << 0, s, s, 0;    // energy -1.5
    raw.col(1) << 1, 0, 0, 0;    // energy -0.5
    raw.col(2) << 0, 0, 0, 1;    // energy -0.5
    raw.col(3) << 0, -s, s, 0;   // energy  2.5
    const Eigen::Vector4d vals(-1.5, -0.5, -0.5, 2.5);
    const AdiabaticFrame f = order_eigenvectors(raw, vals);
    CHECK(f.energies(0) == -0.5);
    CHECK(f.energies(1) == -1.5);
    CHECK(f.energies(2) == 2.5);
    CHECK(f.energies(3) == -0.5);
    CHECK(f.vectors(0, 0) == 1.0);
    CHECK(f.vectors(3, 3) == 1.0);
    CHECK(f.vectors(1, 1) == doctest::Approx(s));
    CHECK(f.vectors(2, 1) == doctest::Approx(s));
    // sign fixed so the assigned overlap is nonnegative
    CHECK(f.vectors(2, 2) == doctest::Approx(s));
    CHECK(f.vectors(1, 2) == doctest::Approx(-s));
}

TEST_CASE("diagonalize_frame: diagonal input gives the identity rotation") {
    Eigen::MatrixXd h = Eigen::Vector4d(0.3, -1.0, 2.0, 0.9).asDiagonal();
    const AdiabaticFrame f = diagonalize_frame(h);
    CHECK((f.vectors - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK(f.energies.isApprox(Eigen::Vector4d(0.3, -1.0, 2.0, 0.9)));
}

TEST_CASE("diagonalize_frame: contract on random symmetric matrices") {
    auto rng = test::test_rng(21);
    for (int dim : {4, 8}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd h = test::random_symmetric(dim, rng);
            const AdiabaticFrame f = diagonalize_frame(h);
            const Eigen::MatrixXd d =
                f.vectors.transpose() * h * f.vectors;
            Eigen::MatrixXd off = d;
            off.diagonal().setZero();
            CHECK(off.cwiseAbs().maxCoeff() <= 1e-10 * h.norm());
            CHECK((d.diagonal() - f.energies).cwiseAbs().maxCoeff() <=
                  1e-10 * h.norm());
            CHECK((f.vectors.transpose() * f.vectors -
                   Eigen::MatrixXd::Identity(dim, dim))
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("fast frame path agrees with the dense path to 1e-12") {
    ChainModel model(kPaperParams);
    FrameSolver fast(model);
    FrameSolver dense(model);
    dense.set_use_fast_path(false);
    REQUIRE(fast.use_fast_path());
    REQUIRE_FALSE(dense.use_fast_path());

    auto rng = test::test_rng(33);
    std::normal_distribution<double> gauss(0.0, 3.0);
    AdiabaticFrame ff, fd;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::vector<double> b = {gauss(rng), gauss(rng)};
        fast.compute(b, ff);
        dense.compute(b, fd);
        CHECK((ff.energies - fd.energies).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((ff.vectors - fd.vectors).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("frame at b = 0 is deterministic and matches the H_S frame") {
    ChainModel model(kPaperParams);
    FrameSolver solver(model);
    AdiabaticFrame f1, f2;
    const std::vector<double> zero = {0.0, 0.0};
    solver.compute(zero, f1);
    solver.compute(zero, f2);
    CHECK(f1.vectors == f2.vectors);
    CHECK(f1.energies == f2.energies);
    CHECK(f1.energies(0) == doctest::Approx(-0.5));
    CHECK(f1.energies(1) == doctest::Approx(-1.5));
    CHECK(f1.energies(2) == doctest::Approx(2.5));
    CHECK(f1.energies(3) == doctest::Approx(-0.5));
}

TEST_CASE("hellmann-feynman force") {
    ChainModel model(kPaperParams);
    const BathModes modes = paper_bath({1.0, 0.3});
    PhasePoint x = thermal_point(modes, 5);
    FrameSolver solver(model);
    AdiabaticFrame f;

    SUBCASE("up-up column feels the full coupling shift") {
        solver.compute(coupling_sums(modes, x), f);
        const auto force = hellmann_feynman_force(model, modes, f, 0, x);
        for (int ks = 0; ks < 2; ++ks) {
            for (int i = 0; i < modes.n_modes; ++i) {
                const double w = modes.omega[static_cast<size_t>(i)];
                const double expected =
                    -w * w * x.r_bath(ks)[static_cast<size_t>(i)] +
                    modes.c[static_cast<size_t>(i)];
                CHECK(force[static_cast<size_t>(ks) * modes.n_modes + i] ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }

    SUBCASE("mixed states at equal bias feel a purely harmonic force") {
        const std::vector<double> b = {0.8, 0.8};
        solver.compute(b, f);
        for (int alpha : {1, 2}) {
            const auto force = hellmann_feynman_force(model, modes, f, alpha, x);
            for (int ks = 0; ks < 2; ++ks) {
                for (int i = 0; i < modes.n_modes; ++i) {
                    const double w = modes.omega[static_cast<size_t>(i)];
                    CHECK(force[static_cast<size_t>(ks) * modes.n_modes + i] ==
                          doctest::Approx(-w * w *
                                          x.r_bath(ks)[static_cast<size_t>(i)])
                              .epsilon(1e-12));
                }
            }
        }
    }

    SUBCASE("zero coupling strength means harmonic forces for every state") {
        const BathModes free_modes = decoupled_bath({1.0, 0.3});
        solver.compute(coupling_sums(free_modes, x), f);
        for (int alpha = 0; alpha < 4; ++alpha) {
            const auto force =
                hellmann_feynman_force(model, free_modes, f, alpha, x);
            for (int ks = 0; ks < 2; ++ks) {
                for (int i = 0; i < free_modes.n_modes; ++i) {
                    const double w = free_modes.omega[static_cast<size_t>(i)];
                    CHECK(force[static_cast<size_t>(ks) * free_modes.n_modes + i] ==
                          doctest::Approx(-w * w *
                                          x.r_bath(ks)[static_cast<size_t>(i)])
                              .epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("diagonal pairs accumulate no phase") {
    ChainModel model(kPaperParams);
    const BathModes modes = paper_bath({1.0, 0.3});
    const PhasePoint x0 = thermal_point(modes, 17);
    const PairTrajectory traj =
        propagate_pair(model, modes, x0, 1, 1, 2.0, 0.01, 20);
    for (double ph : traj.phase) CHECK(ph == 0.0);
}

TEST_CASE("zero coupling: exact harmonic motion and linear phase") {
    ChainModel model(kPaperParams);
    const BathModes modes = decoupled_bath({1.0, 0.3});
    const PhasePoint x0 = thermal_point(modes, 23);
    // mixed pair: columns 2 and 1 give E_a - E_a' = (jz+2j) - (jz-2j) = 4j
    const PairTrajectory traj =
        propagate_pair(model, modes, x0, 2, 1, 20.0, 0.01, 200);
    REQUIRE_FALSE(traj.aborted);

    for (size_t k = 0; k < traj.t.size(); ++k) {
        CHECK(traj.phase[k] == doctest::Approx(4.0 * traj.t[k]).epsilon(1e-12));
    }

    // harmonic motion: R(t) = R0 cos(wt) + P0 sin(wt)/w, per mode
    const double t_end = traj.t.back();
    const auto& xe = traj.x.back();
    double max_err = 0.0;
    for (int ks = 0; ks < 2; ++ks) {
        for (int i = 0; i < modes.n_modes; ++i) {
            const double w = modes.omega[static_cast<size_t>(i)];
            const double r0 = x0.r_bath(ks)[static_cast<size_t>(i)];
            const double p0 = x0.p_bath(ks)[static_cast<size_t>(i)];
            const double r_exact = r0 * std::cos(w * t_end) +
                                   p0 * std::sin(w * t_end) / w;
            max_err = std::max(
                max_err,
                std::abs(xe.r_bath(ks)[static_cast<size_t>(i)] - r_exact));
        }
    }
    // Verlet phase error ~ w^3 dt^2 t / 24 with thermal amplitudes O(10)
    CHECK(max_err < 0.05);
}

TEST_CASE("energy conservation of the pair integrator") {
    ChainModel model(kPaperParams);
    const BathModes modes = paper_bath({1.0, 0.3});
    const PhasePoint x0 = thermal_point(modes, 29);

    // (1,2): harmonic mean force; (1,1): state-dependent force
    for (auto [a, ap] : {std::pair{1, 2}, std::pair{1, 1}}) {
        auto drift = [&, a = a, ap = ap](double dt) {
            const int n_out = 40;
            const PairTrajectory traj =
                propagate_pair(model, modes, x0, a, ap, 20.0, dt, n_out);
            const double q0 = bath_energy(modes, traj.x.front()) +
                              0.5 * (traj.frames.front().energies(a) +
                                     traj.frames.front().energies(ap));
            double worst = 0.0;
            for (size_t k = 1; k < traj.x.size(); ++k) {
                const double q = bath_energy(modes, traj.x[k]) +
                                 0.5 * (traj.frames[k].energies(a) +
                                        traj.frames[k].energies(ap));
                worst = std::max(worst, std::abs(q - q0));
            }
            return worst / std::abs(q0);
        };

        const double d1 = drift(0.01);
        CHECK(d1 < 1e-4);
        // second-order integrator: halving dt cuts the drift by about 4
        const double d2 = drift(0.005);
        CHECK(d2 < 0.5 * d1);
    }
}

TEST_CASE("time reversal returns to the initial condition") {
    ChainModel model(kPaperParams);
    const BathModes modes = paper_bath({1.0, 0.3});
    const PhasePoint x0 = thermal_point(modes, 31);

    PairTrajectory fwd = propagate_pair(model, modes, x0, 1, 2, 5.0, 0.01, 1);
    PhasePoint turn = fwd.x.back();
    for (auto& p : turn.p) p = -p;
    const PairTrajectory back =
        propagate_pair(model, modes, turn, 1, 2, 5.0, 0.01, 1);

    double max_err = 0.0;
    for (size_t i = 0; i < x0.r.size(); ++i) {
        max_err = std::max(max_err, std::abs(back.x.back().r[i] - x0.r[i]));
        max_err = std::max(max_err, std::abs(-back.x.back().p[i] - x0.p[i]));
    }
    CHECK(max_err < 1e-9);
}

TEST_CASE("frame ordering stays continuous along trajectories") {
    ChainModel model(kPaperParams);
    // the hot case: high temperature, bias excursions large, delta = b1 - b2
    // crosses zero many times
    const BathModes modes = paper_bath({0.005, 0.005});
    const PhasePoint x0 = thermal_point(modes, 37);

    auto max_step_change = [&](double dt) {
        const int n_steps = static_cast<int>(std::lround(10.0 / dt));
        const PairTrajectory traj =
            propagate_pair(model, modes, x0, 1, 2, 10.0, dt, n_steps);
        double worst = 0.0;
        for (size_t k = 1; k < traj.frames.size(); ++k) {
            worst = std::max(
                worst, (traj.frames[k].vectors - traj.frames[k - 1].vectors)
                           .norm());
        }
        return worst;
    };

    const double c1 = max_step_change(0.01);
    CHECK(c1 < 0.2);  // no O(1) column swaps
    const double slope = c1 / 0.01;
    const double c2 = max_step_change(0.005);
    CHECK(c2 <= 1.5 * slope * 0.005);
}

TEST_CASE("unstable step size aborts with diagnostics") {
    ChainModel model(kPaperParams);
    const BathModes modes = paper_bath({1.0, 0.3});
    const PhasePoint x0 = thermal_point(modes, 41);
    // omega_max * dt = 30 >> 2: velocity Verlet diverges to non-finite values
    const PairTrajectory traj =
        propagate_pair(model, modes, x0, 1, 2, 10000.0, 10.0, 1);
    CHECK(traj.aborted);
    CHECK(traj.abort_step > 0);
}
