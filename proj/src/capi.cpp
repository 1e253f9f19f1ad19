// capi.cpp — extern "C" surface over the C++ core.

#include "spinbath.h"

#include <cstring>
#include <string>

#include "config.hpp"
#include "estimator.hpp"
#include "harness.hpp"
#include "model.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <class Fn>
sb_status guarded(Fn&& fn) {
    try {
        fn();
        return SB_OK;
    } catch (const spinbath::ValidationError& e) {
        set_error(e.what());
        return SB_ERR_INVALID;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return SB_ERR_INVALID;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SB_ERR_RUNTIME;
    } catch (...) {
        set_error("unknown error");
        return SB_ERR_RUNTIME;
    }
}

}  // namespace

struct sb_config {
    spinbath::RunConfig cfg;
    std::string json_cache;
};

struct sb_series {
    std::vector<double> t;
    std::vector<Eigen::MatrixXcd> rho;
    std::vector<Eigen::MatrixXd> se_re, se_im;
    std::vector<double> trace_dev, trace_stderr;
    double max_sample_trace_dev{0.0};
    int dim{4};
};

extern "C" {

const char* sb_version(void) { return spinbath::kVersion; }

const char* sb_last_error(void) { return g_last_error.c_str(); }

sb_status sb_config_load(const char* path, sb_config** out) {
    if (!path || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    return guarded([&] {
        auto* handle = new sb_config{spinbath::load_config(path), {}};
        *out = handle;
    });
}

sb_status sb_config_parse(const char* json_text, sb_config** out) {
    if (!json_text || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    return guarded([&] {
        auto* handle = new sb_config{spinbath::parse_config(json_text), {}};
        *out = handle;
    });
}

sb_status sb_config_preset(const char* name, sb_config** out) {
    if (!name || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    return guarded([&] {
        auto* handle = new sb_config{spinbath::preset_config(name), {}};
        *out = handle;
    });
}

sb_status sb_config_set_samples(sb_config* config, uint64_t n) {
    if (!config) {
        set_error("null config");
        return SB_ERR_INVALID;
    }
    if (n < 1) {
        set_error("n_samples must be >= 1");
        return SB_ERR_INVALID;
    }
    config->cfg.run.n_samples = n;
    return SB_OK;
}

sb_status sb_config_set_seed(sb_config* config, uint64_t seed) {
    if (!config) {
        set_error("null config");
        return SB_ERR_INVALID;
    }
    config->cfg.run.seed = seed;
    return SB_OK;
}

sb_status sb_config_set_threads(sb_config* config, int threads) {
    if (!config || threads < 0) {
        set_error(config ? "threads must be >= 0" : "null config");
        return SB_ERR_INVALID;
    }
    config->cfg.run.threads = threads;
    return SB_OK;
}

const char* sb_config_json(sb_config* config) {
    if (!config) return "";
    config->json_cache = config->cfg.to_json();
    return config->json_cache.c_str();
}

void sb_config_free(sb_config* config) { delete config; }

sb_status sb_run(const sb_config* config, const char* mode,
                 const char* out_dir) {
    if (!config || !mode) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    return guarded([&] {
        spinbath::run_harness(config->cfg, spinbath::parse_run_mode(mode),
                              out_dir ? out_dir : "");
    });
}

sb_status sb_simulate(const sb_config* config, sb_series** out) {
    if (!config || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    return guarded([&] {
        const auto& cfg = config->cfg;
        spinbath::ChainModel model(cfg.model);
        auto modes = spinbath::discretize_bath(cfg.bath.n_modes, cfg.bath.xi,
                                               cfg.bath.omega_max, cfg.bath.beta);
        spinbath::EstimatorOptions opt;
        opt.dt = cfg.run.dt;
        opt.t_max = cfg.run.t_max;
        opt.output_points = cfg.run.output_points;
        opt.n_samples = cfg.run.n_samples;
        opt.seed = cfg.run.seed;
        opt.threads = cfg.run.threads;
        auto series = spinbath::estimate_reduced_density(
            model, modes, cfg.initial_state, opt);

        auto* handle = new sb_series;
        handle->t = series.t;
        handle->rho = series.rho;
        handle->se_re = series.stderr_re;
        handle->se_im = series.stderr_im;
        handle->trace_dev = series.trace_dev;
        handle->trace_stderr = series.trace_stderr;
        handle->max_sample_trace_dev = series.max_sample_trace_dev;
        handle->dim = model.dim;
        *out = handle;
    });
}

sb_status sb_analytic(const sb_config* config, sb_series** out) {
    if (!config || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    return guarded([&] {
        const auto s = spinbath::analytic_series(config->cfg);
        auto* handle = new sb_series;
        handle->t = s.t;
        handle->dim = 4;
        handle->rho.reserve(s.rho.size());
        for (const auto& m : s.rho) handle->rho.emplace_back(m);
        handle->se_re.assign(s.t.size(), Eigen::MatrixXd::Zero(4, 4));
        handle->se_im.assign(s.t.size(), Eigen::MatrixXd::Zero(4, 4));
        handle->trace_dev.assign(s.t.size(), 0.0);
        handle->trace_stderr.assign(s.t.size(), 0.0);
        for (size_t k = 0; k < s.rho.size(); ++k) {
            handle->trace_dev[k] =
                std::abs(s.rho[k].trace() - std::complex<double>(1, 0));
        }
        *out = handle;
    });
}

size_t sb_series_rows(const sb_series* series) {
    return series ? series->t.size() : 0;
}

size_t sb_series_dim(const sb_series* series) {
    return series ? static_cast<size_t>(series->dim) : 0;
}

sb_status sb_series_times(const sb_series* series, double* out) {
    if (!series || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    std::memcpy(out, series->t.data(), series->t.size() * sizeof(double));
    return SB_OK;
}

static sb_status copy_element(const sb_series* series,
                              const std::vector<Eigen::MatrixXcd>* rho,
                              const std::vector<Eigen::MatrixXd>* re_src,
                              const std::vector<Eigen::MatrixXd>* im_src,
                              size_t i, size_t j, double* re, double* im) {
    if (!series) {
        set_error("null series");
        return SB_ERR_INVALID;
    }
    if (i >= static_cast<size_t>(series->dim) ||
        j >= static_cast<size_t>(series->dim)) {
        set_error("element index out of range");
        return SB_ERR_INVALID;
    }
    for (size_t k = 0; k < series->t.size(); ++k) {
        if (rho) {
            const auto v = (*rho)[k](static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(j));
            if (re) re[k] = v.real();
            if (im) im[k] = v.imag();
        } else {
            if (re) re[k] = (*re_src)[k](static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j));
            if (im) im[k] = (*im_src)[k](static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j));
        }
    }
    return SB_OK;
}

sb_status sb_series_element(const sb_series* series, size_t i, size_t j,
                            double* re, double* im) {
    if (!series) {
        set_error("null series");
        return SB_ERR_INVALID;
    }
    return copy_element(series, &series->rho, nullptr, nullptr, i, j, re, im);
}

sb_status sb_series_stderr(const sb_series* series, size_t i, size_t j,
                           double* re, double* im) {
    if (!series) {
        set_error("null series");
        return SB_ERR_INVALID;
    }
    return copy_element(series, nullptr, &series->se_re, &series->se_im, i, j,
                        re, im);
}

sb_status sb_series_trace_dev(const sb_series* series, double* out) {
    if (!series || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    std::memcpy(out, series->trace_dev.data(),
                series->trace_dev.size() * sizeof(double));
    return SB_OK;
}

sb_status sb_series_trace_stderr(const sb_series* series, double* out) {
    if (!series || !out) {
        set_error("null argument");
        return SB_ERR_INVALID;
    }
    std::memcpy(out, series->trace_stderr.data(),
                series->trace_stderr.size() * sizeof(double));
    return SB_OK;
}

double sb_series_max_sample_trace_dev(const sb_series* series) {
    return series ? series->max_sample_trace_dev : 0.0;
}

void sb_series_free(sb_series* series) { delete series; }

}  // extern "C"
