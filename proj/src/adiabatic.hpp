// adiabatic.hpp — Adiabatic frames of H(R), stable eigenvector ordering, and
// classical-like pair trajectories with accumulated quantum phases.
//
// Ordering convention: column j of a frame holds the eigenvector assigned to
// reference vector e^j by the metric g = |u - e|^2, minimized over the sign of
// u (equivalently: greedy max-|overlap| assignment), with the sign fixed so
// the assigned overlap is nonnegative. Standalone frames are ordered against
// the Cartesian basis; frames along a trajectory are ordered against the
// previous step's frame, which keeps columns continuous through the
// bias-degenerate configurations where the Cartesian metric ties.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bath.hpp"
#include "model.hpp"

namespace spinbath {

struct AdiabaticFrame {
    Eigen::VectorXd energies;  // E[alpha], indexed by assigned column
    Eigen::MatrixXd vectors;   // orthogonal, column alpha = u^alpha

    void resize(int dim) {
        energies.resize(dim);
        vectors.resize(dim, dim);
    }
};

// Greedy metric assignment of raw eigenpairs to the columns of `reference`
// (globally smallest remaining g, used rows/columns excluded, ties broken by
// lowest (alpha, j)). raw_vectors columns must be orthonormal.
void order_eigenvectors_into(const Eigen::MatrixXd& raw_vectors,
                             const Eigen::VectorXd& raw_energies,
                             const Eigen::MatrixXd* reference,
                             AdiabaticFrame& out);

AdiabaticFrame order_eigenvectors(const Eigen::MatrixXd& raw_vectors,
                                  const Eigen::VectorXd& raw_energies);

AdiabaticFrame order_eigenvectors(const Eigen::MatrixXd& raw_vectors,
                                  const Eigen::VectorXd& raw_energies,
                                  const Eigen::MatrixXd& reference);

// Dense symmetric diagonalization + Cartesian metric ordering.
AdiabaticFrame diagonalize_frame(const Eigen::MatrixXd& h);

// <alpha| sigma_z^(ks) |alpha> in a frame; ks is 0-based. sigma_z is diagonal,
// so this is sum_m sz[m] U(m,alpha)^2.
inline double sz_expectation(const ChainModel& model, const AdiabaticFrame& frame,
                             int alpha, int ks) {
    const auto& sz = model.sz_diag[static_cast<size_t>(ks)];
    const double* u = frame.vectors.col(alpha).data();
    double acc = 0.0;
    for (int m = 0; m < model.dim; ++m) {
        acc += sz[static_cast<size_t>(m)] * u[m] * u[m];
    }
    return acc;
}

// Hellmann-Feynman force F_{I,ks} = -w_I^2 R_{I,ks} + c_I <a|sigma_z^(ks)|a>,
// laid out like PhasePoint (bath-major).
std::vector<double> hellmann_feynman_force(const ChainModel& model,
                                           const BathModes& modes,
                                           const AdiabaticFrame& frame,
                                           int alpha, const PhasePoint& x);

// Frame computation with reusable workspace. For the two-spin j_x = j_y model
// a closed-form path (diagonal {1,4} block + 2x2 rotation) replaces the dense
// eigensolver; both paths agree to 1e-12 and share the ordering code.
class FrameSolver {
  public:
    explicit FrameSolver(const ChainModel& model);

    // Cartesian-referenced frame at coupling sums b (one per bath).
    void compute(std::span<const double> b, AdiabaticFrame& out);
    // Frame ordered against `prev` (trajectory continuity).
    void compute_tracked(std::span<const double> b, const AdiabaticFrame& prev,
                         AdiabaticFrame& out);

    // Force the dense eigensolver even where the closed form applies.
    void set_use_fast_path(bool on) { use_fast_ = on && model_->has_fast_frame(); }
    bool use_fast_path() const { return use_fast_; }

  private:
    void compute_raw(std::span<const double> b);

    const ChainModel* model_;
    bool use_fast_;
    Eigen::MatrixXd h_work_;
    Eigen::MatrixXd raw_vecs_;
    Eigen::VectorXd raw_vals_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver_;
    std::vector<int> sort_idx_;
};

// One trajectory of the matrix-element pair (alpha, alpha_prime), recorded at
// the output grid. Heavyweight (stores frames and coordinates); the estimator
// uses PairPropagator::run with a recording callback instead.
struct PairTrajectory {
    int alpha{0};
    int alpha_prime{0};
    std::vector<double> t;
    std::vector<double> phase;           // int_0^t (E_a - E_a') dtau
    std::vector<AdiabaticFrame> frames;
    std::vector<PhasePoint> x;
    bool aborted{false};
    int abort_step{-1};
};

class PairPropagator {
  public:
    PairPropagator(const ChainModel& model, const BathModes& modes);

    struct Status {
        bool aborted{false};
        int abort_step{-1};
        double abort_r_norm{0.0};
    };

    // Velocity-Verlet under the mean force (F^a + F^a')/2 with the frame
    // recomputed (continuity-ordered) every step; phase by trapezoidal rule.
    // record(k, frame, phase) is called at output index k = 0..n_steps/stride.
    template <class Record>
    Status run(const PhasePoint& x0, const AdiabaticFrame& frame0, int alpha,
               int alpha_prime, int n_steps, double dt, int record_stride,
               Record&& record) {
        const int nb = modes_->n_baths();
        const int nm = modes_->n_modes;
        const auto& c = modes_->c;
        r_ = x0.r;
        p_ = x0.p;
        cur_ = frame0;
        double phase = 0.0;
        double gap_prev = frame0.energies(alpha) - frame0.energies(alpha_prime);
        record(0, cur_, phase);

        for (int step = 1; step <= n_steps; ++step) {
            // half kick + drift, accumulating b at the new configuration
            for (int ks = 0; ks < nb; ++ks) {
                const double mz =
                    0.5 * (sz_expectation(*model_, cur_, alpha, ks) +
                           sz_expectation(*model_, cur_, alpha_prime, ks));
                double* r = r_.data() + static_cast<size_t>(ks) * nm;
                double* p = p_.data() + static_cast<size_t>(ks) * nm;
                double b = 0.0;
                for (int i = 0; i < nm; ++i) {
                    p[i] += 0.5 * dt * (-omega2_[static_cast<size_t>(i)] * r[i] +
                                        c[static_cast<size_t>(i)] * mz);
                    r[i] += dt * p[i];
                    b += c[static_cast<size_t>(i)] * r[i];
                }
                b_[static_cast<size_t>(ks)] = b;
            }

            bool finite = true;
            for (int ks = 0; ks < nb; ++ks) {
                const double b = b_[static_cast<size_t>(ks)];
                finite = finite && std::isfinite(b) && std::abs(b) < 1e100;
            }
            if (!finite) return abort_status(step);
            frames_.compute_tracked(b_, cur_, nxt_);
            const double gap_new =
                nxt_.energies(alpha) - nxt_.energies(alpha_prime);
            if (!std::isfinite(gap_new)) return abort_status(step);

            for (int ks = 0; ks < nb; ++ks) {
                const double mz =
                    0.5 * (sz_expectation(*model_, nxt_, alpha, ks) +
                           sz_expectation(*model_, nxt_, alpha_prime, ks));
                double* r = r_.data() + static_cast<size_t>(ks) * nm;
                double* p = p_.data() + static_cast<size_t>(ks) * nm;
                for (int i = 0; i < nm; ++i) {
                    p[i] += 0.5 * dt * (-omega2_[static_cast<size_t>(i)] * r[i] +
                                        c[static_cast<size_t>(i)] * mz);
                }
            }

            phase += 0.5 * dt * (gap_prev + gap_new);
            gap_prev = gap_new;
            std::swap(cur_, nxt_);
            if (step % record_stride == 0) {
                record(step / record_stride, cur_, phase);
            }
        }
        return {};
    }

    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& p() const { return p_; }
    FrameSolver& frames() { return frames_; }

  private:
    Status abort_status(int step) const;

    const ChainModel* model_;
    const BathModes* modes_;
    FrameSolver frames_;
    std::vector<double> omega2_;
    std::vector<double> b_;
    std::vector<double> r_, p_;
    AdiabaticFrame cur_, nxt_;
};

// Convenience wrapper used by tests; records frames and coordinates.
PairTrajectory propagate_pair(const ChainModel& model, const BathModes& modes,
                              const PhasePoint& x0, int alpha, int alpha_prime,
                              double t_max, double dt, int n_out);

// Coupling sums b_ks = sum_I c_I R_{I,ks} for a phase point.
std::vector<double> coupling_sums(const BathModes& modes, const PhasePoint& x);

// Bath energy H_B(X) = sum (P^2 + w^2 R^2)/2, for the conservation checks.
double bath_energy(const BathModes& modes, const PhasePoint& x);

}  // namespace spinbath
