// config.hpp — Run configuration: typed schema, strict JSON loading, presets.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "model.hpp"

namespace spinbath {

// Configuration / input errors; everything else surfacing from a run is a
// runtime failure. The CLI maps these to distinct exit codes.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class RunMode { kSimulate, kAnalytic, kCompare, kSamplerCheck, kOracleCheck };

RunMode parse_run_mode(const std::string& name);
std::string run_mode_name(RunMode mode);

struct BathParams {
    int n_modes{200};
    double xi{0.007};
    double omega_max{3.0};
    std::vector<double> beta{1.0, 0.3};
};

struct RunSettings {
    double dt{0.01};
    double t_max{20.0};
    int output_points{200};
    std::uint64_t n_samples{5000};
    std::uint64_t seed{20260809};
    int threads{0};
    RunMode mode{RunMode::kCompare};
};

struct AnalyticOverrides {
    std::optional<double> g_c;
    std::optional<double> omega_total;      // "Omega" in the file schema
    std::optional<double> omega_ref_zero;   // gamma(0+-) evaluation frequency
};

struct RunConfig {
    SpinChainParams model;
    BathParams bath;
    RunSettings run;
    std::string initial_state_name{"psi-minus"};  // "custom" for explicit matrices
    Eigen::MatrixXcd initial_state;
    AnalyticOverrides analytic;

    // Compact JSON echo embedded in every output file header.
    std::string to_json() const;
};

// Named initial states: "up-up" (any chain length), "up-down" and "psi-minus"
// (two spins). psi-minus is (|1,1> - |1,0>)/sqrt2.
Eigen::MatrixXcd initial_state_preset(const std::string& name, int n_spins);

// Full validation of a parsed configuration; throws ValidationError naming the
// offending field.
void validate_config(const RunConfig& config);

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Shipped experiment presets: "fig1", "fig2", "fig3".
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace spinbath
