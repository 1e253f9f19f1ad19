#include "estimator.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace spinbath {

namespace {

using cplx = std::complex<double>;

constexpr std::uint64_t kChunk = 32;  // samples per reduction chunk

// Welford accumulation with Chan's pairwise combination; keeps the variance
// exactly zero when every sample is identical and stays deterministic because
// chunks are always merged in index order.
struct Welford {
    double n{0.0};
    double mean{0.0};
    double m2{0.0};

    void add(double y) {
        n += 1.0;
        const double d = y - mean;
        mean += d / n;
        m2 += d * (y - mean);
    }

    void merge(const Welford& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const double delta = o.mean - mean;
        mean += delta * o.n / total;
        m2 += o.m2 + delta * delta * n * o.n / total;
        n = total;
    }

    double std_error() const {
        if (n < 2.0) return 0.0;
        const double var = std::max(0.0, m2 / (n - 1.0));
        return std::sqrt(var / n);
    }
};

struct Accumulator {
    // per time row: dim^2 real parts, dim^2 imaginary parts, trace re/im
    int dim{0};
    int stride{0};
    std::vector<Welford> stats;
    double max_trace_dev{0.0};
    double max_herm_dev{0.0};
    std::uint64_t accepted{0};
    std::uint64_t aborted{0};

    void init(int n_rows, int dimension) {
        dim = dimension;
        stride = 2 * dim * dim + 2;
        stats.assign(static_cast<size_t>(n_rows) * stride, Welford{});
        max_trace_dev = max_herm_dev = 0.0;
        accepted = aborted = 0;
    }

    Welford& re(int k, int i, int j) {
        return stats[static_cast<size_t>(k) * stride + i * dim + j];
    }
    Welford& im(int k, int i, int j) {
        return stats[static_cast<size_t>(k) * stride + dim * dim + i * dim + j];
    }
    Welford& trace_re(int k) {
        return stats[static_cast<size_t>(k) * stride + 2 * dim * dim];
    }
    Welford& trace_im(int k) {
        return stats[static_cast<size_t>(k) * stride + 2 * dim * dim + 1];
    }

    void merge(const Accumulator& other) {
        for (size_t i = 0; i < stats.size(); ++i) stats[i].merge(other.stats[i]);
        max_trace_dev = std::max(max_trace_dev, other.max_trace_dev);
        max_herm_dev = std::max(max_herm_dev, other.max_herm_dev);
        accepted += other.accepted;
        aborted += other.aborted;
    }
};

// Accumulation order is fixed by chunk index, so results are bit-identical
// for any worker count.
class OrderedReducer {
  public:
    OrderedReducer(Accumulator& global, std::uint64_t n_chunks)
        : global_(global), n_chunks_(n_chunks) {}

    void submit(std::uint64_t chunk_id, Accumulator&& part) {
        std::lock_guard lock(mu_);
        pending_.emplace(chunk_id, std::move(part));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            global_.merge(pending_.begin()->second);
            pending_.erase(pending_.begin());
            ++next_;
        }
    }

    bool complete() const { return next_ == n_chunks_; }

  private:
    Accumulator& global_;
    std::uint64_t n_chunks_;
    std::uint64_t next_{0};
    std::map<std::uint64_t, Accumulator> pending_;
    std::mutex mu_;
};

struct Worker {
    const ChainModel& model;
    const BathModes& modes;
    const WignerWidths& widths;
    const Eigen::MatrixXcd& rho0;
    const EstimatorOptions& opt;
    int n_steps;
    int stride;
    int n_rows;

    PairPropagator prop;
    FrameSolver init_frames;
    AdiabaticFrame frame0;
    PhasePoint x0;
    std::vector<double> b0;
    std::vector<Eigen::MatrixXcd> rho_local;

    Worker(const ChainModel& m, const BathModes& bm, const WignerWidths& w,
           const Eigen::MatrixXcd& r0, const EstimatorOptions& o, int steps,
           int str, int rows)
        : model(m), modes(bm), widths(w), rho0(r0), opt(o), n_steps(steps),
          stride(str), n_rows(rows), prop(m, bm), init_frames(m),
          x0(bm.n_baths(), bm.n_modes),
          b0(static_cast<size_t>(bm.n_baths())) {
        rho_local.assign(static_cast<size_t>(rows),
                         Eigen::MatrixXcd::Zero(m.dim, m.dim));
    }

    // returns false when the sample had an aborted trajectory
    bool run_sample(std::uint64_t sample_idx, Accumulator& acc) {
        auto rng = substream_rng(opt.seed, sample_idx);
        for (int ks = 0; ks < modes.n_baths(); ++ks) {
            sample_thermal(modes, widths, ks, rng, x0.r_bath(ks), x0.p_bath(ks));
        }
        for (int ks = 0; ks < modes.n_baths(); ++ks) {
            auto r = x0.r_bath(ks);
            double b = 0.0;
            for (int i = 0; i < modes.n_modes; ++i) {
                b += modes.c[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
            }
            b0[static_cast<size_t>(ks)] = b;
        }
        init_frames.compute(b0, frame0);

        const Eigen::MatrixXcd weights =
            frame0.vectors.transpose().cast<cplx>() * rho0 *
            frame0.vectors.cast<cplx>();

        for (auto& m : rho_local) m.setZero();
        const int dim = model.dim;
        for (int a = 0; a < dim; ++a) {
            for (int ap = a; ap < dim; ++ap) {
                cplx w = weights(a, ap);
                if (a == ap) w = cplx(w.real(), 0.0);
                if (std::abs(w) <= opt.weight_cutoff) continue;

                auto status = prop.run(
                    x0, frame0, a, ap, n_steps, opt.dt, stride,
                    [&](int k, const AdiabaticFrame& f, double phase) {
                        const cplx c = w * std::polar(1.0, -phase);
                        auto& out = rho_local[static_cast<size_t>(k)];
                        const auto ua = f.vectors.col(a);
                        const auto up = f.vectors.col(ap);
                        for (int mu = 0; mu < dim; ++mu) {
                            for (int nu = 0; nu < dim; ++nu) {
                                const double uu = ua(mu) * up(nu);
                                out(mu, nu) += c * uu;
                                if (a != ap) {
                                    out(nu, mu) += std::conj(c) * uu;
                                }
                            }
                        }
                    });
                if (status.aborted) return false;
            }
        }

        for (int k = 0; k < n_rows; ++k) {
            const auto& m = rho_local[static_cast<size_t>(k)];
            const cplx tr = m.trace();
            for (int i = 0; i < dim; ++i) {
                for (int jj = 0; jj < dim; ++jj) {
                    acc.re(k, i, jj).add(m(i, jj).real());
                    acc.im(k, i, jj).add(m(i, jj).imag());
                }
            }
            acc.trace_re(k).add(tr.real());
            acc.trace_im(k).add(tr.imag());
            acc.max_trace_dev =
                std::max(acc.max_trace_dev, std::abs(tr - cplx(1.0, 0.0)));
            const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
            acc.max_herm_dev = std::max(acc.max_herm_dev, herm);
        }
        return true;
    }
};

}  // namespace

Eigen::MatrixXcd initial_adiabatic_weights(const Eigen::MatrixXcd& rho_s0,
                                           const AdiabaticFrame& frame0) {
    if (rho_s0.rows() != rho_s0.cols() ||
        rho_s0.rows() != frame0.vectors.rows()) {
        throw std::invalid_argument("initial_adiabatic_weights: shape mismatch");
    }
    if (std::abs(rho_s0.trace() - cplx(1.0, 0.0)) > 1e-10) {
        throw std::invalid_argument("initial state must have unit trace");
    }
    if ((rho_s0 - rho_s0.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("initial state must be Hermitian");
    }
    return frame0.vectors.transpose().cast<cplx>() * rho_s0 *
           frame0.vectors.cast<cplx>();
}

ReducedDensitySeries estimate_reduced_density(const ChainModel& model,
                                              const BathModes& modes,
                                              const Eigen::MatrixXcd& rho_s0,
                                              const EstimatorOptions& opt) {
    if (modes.n_baths() != model.params.n_spins) {
        throw std::invalid_argument("one bath per spin required");
    }
    if (opt.n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (!(opt.dt > 0.0) || !(opt.t_max > 0.0) || opt.output_points < 1) {
        throw std::invalid_argument("invalid time grid");
    }
    const double spacing = opt.t_max / opt.output_points;
    const int stride = static_cast<int>(std::lround(spacing / opt.dt));
    if (stride < 1 || std::abs(stride * opt.dt - spacing) > 1e-9) {
        throw std::invalid_argument("dt must divide the output grid spacing");
    }
    const int n_steps = stride * opt.output_points;
    const int n_rows = opt.output_points + 1;

    // validates trace/hermiticity once up front (same checks per sample would
    // only re-do the rotation)
    {
        AdiabaticFrame id;
        id.resize(model.dim);
        id.vectors.setIdentity();
        id.energies.setZero();
        (void)initial_adiabatic_weights(rho_s0, id);
    }

    const WignerWidths widths = wigner_widths(modes);
    Accumulator global;
    global.init(n_rows, model.dim);
    const std::uint64_t n_chunks = (opt.n_samples + kChunk - 1) / kChunk;
    OrderedReducer reducer(global, n_chunks);

    int n_threads = opt.threads > 0
                        ? opt.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(n_threads), n_chunks));

    std::atomic<std::uint64_t> next_chunk{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));

    auto work = [&](int tid) {
        try {
            Worker worker(model, modes, widths, rho_s0, opt, n_steps, stride,
                          n_rows);
            Accumulator part;
            for (;;) {
                const std::uint64_t chunk = next_chunk.fetch_add(1);
                if (chunk >= n_chunks) break;
                part.init(n_rows, model.dim);
                const std::uint64_t lo = chunk * kChunk;
                const std::uint64_t hi =
                    std::min<std::uint64_t>(lo + kChunk, opt.n_samples);
                for (std::uint64_t s = lo; s < hi; ++s) {
                    if (worker.run_sample(s, part)) {
                        ++part.accepted;
                    } else {
                        ++part.aborted;
                    }
                }
                reducer.submit(chunk, std::move(part));
            }
        } catch (...) {
            errors[static_cast<size_t>(tid)] = std::current_exception();
        }
    };

    if (n_threads == 1) {
        work(0);
    } else {
        pool.reserve(static_cast<size_t>(n_threads));
        for (int tid = 0; tid < n_threads; ++tid) pool.emplace_back(work, tid);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    if (global.aborted >
        opt.max_aborted_fraction * static_cast<double>(opt.n_samples)) {
        throw std::runtime_error(
            "aborted trajectories exceed " +
            std::to_string(opt.max_aborted_fraction * 100) + "% of samples (" +
            std::to_string(global.aborted) + " of " +
            std::to_string(opt.n_samples) + ")");
    }
    if (global.accepted < 1) throw std::runtime_error("no accepted samples");

    ReducedDensitySeries out;
    out.n_samples = global.accepted;
    out.aborted = global.aborted;
    out.seed = opt.seed;
    out.max_sample_trace_dev = global.max_trace_dev;
    out.max_sample_herm_dev = global.max_herm_dev;
    out.t.resize(static_cast<size_t>(n_rows));
    out.rho.resize(static_cast<size_t>(n_rows));
    out.stderr_re.resize(static_cast<size_t>(n_rows));
    out.stderr_im.resize(static_cast<size_t>(n_rows));
    out.trace_dev.resize(static_cast<size_t>(n_rows));
    out.trace_stderr.resize(static_cast<size_t>(n_rows));

    for (int k = 0; k < n_rows; ++k) {
        const size_t ks = static_cast<size_t>(k);
        out.t[ks] = k * spacing;
        out.rho[ks].resize(model.dim, model.dim);
        out.stderr_re[ks].resize(model.dim, model.dim);
        out.stderr_im[ks].resize(model.dim, model.dim);
        for (int i = 0; i < model.dim; ++i) {
            for (int jj = 0; jj < model.dim; ++jj) {
                out.rho[ks](i, jj) = {global.re(k, i, jj).mean,
                                      global.im(k, i, jj).mean};
                out.stderr_re[ks](i, jj) = global.re(k, i, jj).std_error();
                out.stderr_im[ks](i, jj) = global.im(k, i, jj).std_error();
            }
        }
        out.trace_dev[ks] =
            std::hypot(global.trace_re(k).mean - 1.0, global.trace_im(k).mean);
        out.trace_stderr[ks] = std::hypot(global.trace_re(k).std_error(),
                                          global.trace_im(k).std_error());
    }
    return out;
}

}  // namespace spinbath
