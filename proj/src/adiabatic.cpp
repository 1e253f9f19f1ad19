#include "adiabatic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spinbath {

void order_eigenvectors_into(const Eigen::MatrixXd& raw_vectors,
                             const Eigen::VectorXd& raw_energies,
                             const Eigen::MatrixXd* reference,
                             AdiabaticFrame& out) {
    const int dim = static_cast<int>(raw_vectors.rows());
    if (raw_vectors.cols() != dim || raw_energies.size() != dim) {
        throw std::invalid_argument("order_eigenvectors: shape mismatch");
    }
    out.resize(dim);

    // Overlaps O(j, alpha) = ref_j . u_alpha; g = 2 - 2|O| once the sign of
    // u is optimized, so smallest g == largest |O|.
    Eigen::MatrixXd overlap = reference ? (reference->transpose() * raw_vectors)
                                        : raw_vectors;

    std::vector<char> used_alpha(static_cast<size_t>(dim), 0);
    std::vector<char> used_col(static_cast<size_t>(dim), 0);
    for (int round = 0; round < dim; ++round) {
        int best_a = -1, best_j = -1;
        double best = -1.0;
        for (int a = 0; a < dim; ++a) {
            if (used_alpha[static_cast<size_t>(a)]) continue;
            for (int jj = 0; jj < dim; ++jj) {
                if (used_col[static_cast<size_t>(jj)]) continue;
                const double v = std::abs(overlap(jj, a));
                if (v > best) {  // ties keep the lowest (alpha, j)
                    best = v;
                    best_a = a;
                    best_j = jj;
                }
            }
        }
        if (best_a < 0) {
            throw std::runtime_error(
                "eigenvector ordering failed: non-finite overlaps");
        }
        const double sign = overlap(best_j, best_a) < 0.0 ? -1.0 : 1.0;
        out.vectors.col(best_j) = sign * raw_vectors.col(best_a);
        out.energies(best_j) = raw_energies(best_a);
        used_alpha[static_cast<size_t>(best_a)] = 1;
        used_col[static_cast<size_t>(best_j)] = 1;
    }
}

AdiabaticFrame order_eigenvectors(const Eigen::MatrixXd& raw_vectors,
                                  const Eigen::VectorXd& raw_energies) {
    AdiabaticFrame f;
    order_eigenvectors_into(raw_vectors, raw_energies, nullptr, f);
    return f;
}

AdiabaticFrame order_eigenvectors(const Eigen::MatrixXd& raw_vectors,
                                  const Eigen::VectorXd& raw_energies,
                                  const Eigen::MatrixXd& reference) {
    AdiabaticFrame f;
    order_eigenvectors_into(raw_vectors, raw_energies, &reference, f);
    return f;
}

AdiabaticFrame diagonalize_frame(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw std::invalid_argument("diagonalize_frame: matrix must be square");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigensolver failed on " << h.rows() << "x" << h.cols()
            << " matrix, |H| = " << h.norm();
        throw std::runtime_error(msg.str());
    }
    return order_eigenvectors(solver.eigenvectors(), solver.eigenvalues());
}

std::vector<double> hellmann_feynman_force(const ChainModel& model,
                                           const BathModes& modes,
                                           const AdiabaticFrame& frame,
                                           int alpha, const PhasePoint& x) {
    const int nb = modes.n_baths();
    const int nm = modes.n_modes;
    if (x.n_baths != nb || x.n_modes != nm) {
        throw std::invalid_argument("hellmann_feynman_force: dimension mismatch");
    }
    std::vector<double> f(static_cast<size_t>(nb) * nm);
    for (int ks = 0; ks < nb; ++ks) {
        const double mz = sz_expectation(model, frame, alpha, ks);
        auto r = x.r_bath(ks);
        for (int i = 0; i < nm; ++i) {
            const double w = modes.omega[static_cast<size_t>(i)];
            f[static_cast<size_t>(ks) * nm + i] =
                -w * w * r[static_cast<size_t>(i)] +
                modes.c[static_cast<size_t>(i)] * mz;
        }
    }
    return f;
}

FrameSolver::FrameSolver(const ChainModel& model)
    : model_(&model), use_fast_(model.has_fast_frame()) {
    h_work_ = model.h_s;
    raw_vecs_.resize(model.dim, model.dim);
    raw_vals_.resize(model.dim);
    sort_idx_.resize(static_cast<size_t>(model.dim));
}

void FrameSolver::compute_raw(std::span<const double> b) {
    const int dim = model_->dim;
    if (static_cast<int>(b.size()) != model_->params.n_spins) {
        throw std::invalid_argument("FrameSolver: one coupling sum per bath");
    }

    if (use_fast_) {
        // Two-spin j_x = j_y closed form: {|1,1>,|0,0>} block is diagonal for
        // every R; the middle block is a 2x2 rotation with gap 2h.
        const double j = model_->params.j_x;
        const double jz = model_->params.j_z;
        const double b1 = b[0];
        const double b2 = b[1];
        const double delta = b1 - b2;
        const double h = std::hypot(delta, 2.0 * j);  // no overflow at large bias

        raw_vecs_.setZero();
        int k = 0;
        auto put = [&](double e, double v0, double v1, double v2, double v3) {
            raw_vals_(k) = e;
            raw_vecs_(0, k) = v0;
            raw_vecs_(1, k) = v1;
            raw_vecs_(2, k) = v2;
            raw_vecs_(3, k) = v3;
            ++k;
        };
        put(-jz - b1 - b2, 1.0, 0.0, 0.0, 0.0);
        put(-jz + b1 + b2, 0.0, 0.0, 0.0, 1.0);
        if (h == 0.0) {
            put(jz, 0.0, 1.0, 0.0, 0.0);
            put(jz, 0.0, 0.0, 1.0, 0.0);
        } else {
            // stable complements: h -+ delta = 4j^2 / (h +- delta)
            double sp, sm;  // h + delta, h - delta
            if (delta >= 0.0) {
                sp = h + delta;
                sm = 4.0 * j * j / sp;
            } else {
                sm = h - delta;
                sp = 4.0 * j * j / sm;
            }
            const double inv = 1.0 / std::sqrt(2.0 * h);
            const double a = std::sqrt(sp) * inv;
            const double c = std::sqrt(sm) * inv;
            put(jz - h, 0.0, a, c, 0.0);
            put(jz + h, 0.0, -c, a, 0.0);
        }
        // ascending raw order, matching the dense solver's convention
        std::iota(sort_idx_.begin(), sort_idx_.end(), 0);
        std::stable_sort(sort_idx_.begin(), sort_idx_.end(), [&](int l, int r) {
            return raw_vals_(l) < raw_vals_(r);
        });
        Eigen::MatrixXd vecs(dim, dim);
        Eigen::VectorXd vals(dim);
        for (int col = 0; col < dim; ++col) {
            vecs.col(col) = raw_vecs_.col(sort_idx_[static_cast<size_t>(col)]);
            vals(col) = raw_vals_(sort_idx_[static_cast<size_t>(col)]);
        }
        raw_vecs_ = vecs;
        raw_vals_ = vals;
        return;
    }

    h_work_ = model_->h_s;
    for (int ks = 0; ks < model_->params.n_spins; ++ks) {
        const auto& sz = model_->sz_diag[static_cast<size_t>(ks)];
        for (int m = 0; m < dim; ++m) {
            h_work_(m, m) -= b[static_cast<size_t>(ks)] * sz[static_cast<size_t>(m)];
        }
    }
    solver_.compute(h_work_);
    if (solver_.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigensolver failed at b = (";
        for (size_t i = 0; i < b.size(); ++i) msg << (i ? ", " : "") << b[i];
        msg << ")";
        throw std::runtime_error(msg.str());
    }
    raw_vecs_ = solver_.eigenvectors();
    raw_vals_ = solver_.eigenvalues();
}

void FrameSolver::compute(std::span<const double> b, AdiabaticFrame& out) {
    compute_raw(b);
    order_eigenvectors_into(raw_vecs_, raw_vals_, nullptr, out);
}

void FrameSolver::compute_tracked(std::span<const double> b,
                                  const AdiabaticFrame& prev,
                                  AdiabaticFrame& out) {
    compute_raw(b);
    order_eigenvectors_into(raw_vecs_, raw_vals_, &prev.vectors, out);
}

PairPropagator::PairPropagator(const ChainModel& model, const BathModes& modes)
    : model_(&model), modes_(&modes), frames_(model) {
    omega2_.resize(static_cast<size_t>(modes.n_modes));
    for (int i = 0; i < modes.n_modes; ++i) {
        omega2_[static_cast<size_t>(i)] =
            modes.omega[static_cast<size_t>(i)] * modes.omega[static_cast<size_t>(i)];
    }
    b_.resize(static_cast<size_t>(modes.n_baths()));
}

PairPropagator::Status PairPropagator::abort_status(int step) const {
    double norm2 = 0.0;
    for (double v : r_) norm2 += v * v;
    return {.aborted = true,
            .abort_step = step,
            .abort_r_norm = std::sqrt(norm2)};
}

std::vector<double> coupling_sums(const BathModes& modes, const PhasePoint& x) {
    std::vector<double> b(static_cast<size_t>(x.n_baths), 0.0);
    for (int ks = 0; ks < x.n_baths; ++ks) {
        auto r = x.r_bath(ks);
        double acc = 0.0;
        for (int i = 0; i < modes.n_modes; ++i) {
            acc += modes.c[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        }
        b[static_cast<size_t>(ks)] = acc;
    }
    return b;
}

double bath_energy(const BathModes& modes, const PhasePoint& x) {
    double e = 0.0;
    for (int ks = 0; ks < x.n_baths; ++ks) {
        auto r = x.r_bath(ks);
        auto p = x.p_bath(ks);
        for (int i = 0; i < modes.n_modes; ++i) {
            const double w = modes.omega[static_cast<size_t>(i)];
            e += 0.5 * p[static_cast<size_t>(i)] * p[static_cast<size_t>(i)] +
                 0.5 * w * w * r[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        }
    }
    return e;
}

PairTrajectory propagate_pair(const ChainModel& model, const BathModes& modes,
                              const PhasePoint& x0, int alpha, int alpha_prime,
                              double t_max, double dt, int n_out) {
    const int n_steps = static_cast<int>(std::lround(t_max / dt));
    if (n_steps < 1 || std::abs(n_steps * dt - t_max) > 1e-9 * std::max(1.0, t_max)) {
        throw std::invalid_argument("propagate_pair: dt must divide t_max");
    }
    if (n_steps % n_out != 0) {
        throw std::invalid_argument("propagate_pair: dt must divide the grid spacing");
    }
    const int stride = n_steps / n_out;

    PairPropagator prop(model, modes);
    FrameSolver init(model);
    AdiabaticFrame frame0;
    const auto b0 = coupling_sums(modes, x0);
    init.compute(b0, frame0);

    PairTrajectory traj;
    traj.alpha = alpha;
    traj.alpha_prime = alpha_prime;
    traj.t.resize(static_cast<size_t>(n_out) + 1);
    traj.phase.resize(static_cast<size_t>(n_out) + 1);
    traj.frames.resize(static_cast<size_t>(n_out) + 1);
    traj.x.assign(static_cast<size_t>(n_out) + 1, x0);

    PhasePoint snapshot = x0;
    auto status = prop.run(
        x0, frame0, alpha, alpha_prime, n_steps, dt, stride,
        [&](int k, const AdiabaticFrame& f, double phase) {
            traj.t[static_cast<size_t>(k)] = k * stride * dt;
            traj.phase[static_cast<size_t>(k)] = phase;
            traj.frames[static_cast<size_t>(k)] = f;
            snapshot.r = prop.r();
            snapshot.p = prop.p();
            traj.x[static_cast<size_t>(k)] = snapshot;
        });
    traj.aborted = status.aborted;
    traj.abort_step = status.abort_step;
    return traj;
}

}  // namespace spinbath
