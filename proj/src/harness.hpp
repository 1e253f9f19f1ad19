// harness.hpp — Experiment execution: mode dispatch, CSV persistence,
// comparison report, plot-script emission.

#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "estimator.hpp"
#include "lindblad.hpp"

namespace spinbath {

inline constexpr const char* kVersion = "0.1.0";

// Closed-form series on the same grid as the estimator output.
struct AnalyticSeries {
    std::vector<double> t;
    std::vector<Eigen::Matrix4cd> rho;
    RateSet rates;
    EigenSystemHS eig;
};

AnalyticSeries analytic_series(const RunConfig& config);

// Executes `mode` with the given configuration, writing outputs (CSV, report,
// plot script) into out_dir and printing a summary to stdout. Partial outputs
// are removed when a run fails. Throws ValidationError for bad input and
// std::runtime_error for runtime failures (including a failed oracle-check).
void run_harness(const RunConfig& config, RunMode mode,
                 const std::string& out_dir);

// --- pieces exposed for tests -----------------------------------------------

std::string series_csv_text(const RunConfig& config,
                            const ReducedDensitySeries& series);
std::string analytic_csv_text(const RunConfig& config, const AnalyticSeries& s);

// Sampler moment check: empirical vs closed-form Wigner variances.
struct SamplerMomentsRow {
    int bath;
    int mode;          // 0-based mode index
    double omega;
    double var_r_emp, var_r_exact;
    double var_p_emp, var_p_exact;
    double equipartition_ratio;  // Var(P) / (omega^2 Var(R)), empirical
};
std::vector<SamplerMomentsRow> sampler_moments(const BathModes& modes,
                                               const std::vector<int>& mode_idx,
                                               std::uint64_t n_samples,
                                               std::uint64_t seed);

// Self-contained matplotlib script reading only the listed CSVs; validates
// that the CSVs exist and carry the required columns.
std::string emit_plot_script(const std::string& out_dir,
                             const std::string& numeric_csv,
                             const std::string& analytic_csv);

struct OracleCheckResult {
    double max_abs_diff{0.0};
    double max_trace_dev{0.0};
    int n_trials{0};
};
OracleCheckResult oracle_check(const RunConfig& config, int n_trials,
                               std::uint64_t seed);

}  // namespace spinbath
