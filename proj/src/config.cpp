#include "config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace spinbath {

using nlohmann::json;

RunMode parse_run_mode(const std::string& name) {
    if (name == "simulate") return RunMode::kSimulate;
    if (name == "analytic") return RunMode::kAnalytic;
    if (name == "compare") return RunMode::kCompare;
    if (name == "sampler-check") return RunMode::kSamplerCheck;
    if (name == "oracle-check") return RunMode::kOracleCheck;
    throw ValidationError("unknown mode '" + name +
                          "' (expected simulate|analytic|compare|sampler-check|"
                          "oracle-check)");
}

std::string run_mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::kSimulate: return "simulate";
        case RunMode::kAnalytic: return "analytic";
        case RunMode::kCompare: return "compare";
        case RunMode::kSamplerCheck: return "sampler-check";
        case RunMode::kOracleCheck: return "oracle-check";
    }
    return "?";
}

Eigen::MatrixXcd initial_state_preset(const std::string& name, int n_spins) {
    const int dim = subsystem_dimension(n_spins);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    if (name == "up-up") {
        rho(0, 0) = 1.0;
        return rho;
    }
    if (n_spins != 2) {
        throw ValidationError("initial state '" + name +
                              "' is defined for two spins only");
    }
    if (name == "up-down") {
        rho(1, 1) = 1.0;
        return rho;
    }
    if (name == "psi-minus") {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
        psi(0) = 1.0 / std::sqrt(2.0);
        psi(1) = -1.0 / std::sqrt(2.0);
        rho = psi * psi.adjoint();
        return rho;
    }
    throw ValidationError("unknown initial state '" + name +
                          "' (expected up-up|up-down|psi-minus or a matrix)");
}

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError("unknown key '" + where + "." + it.key() + "'");
        }
    }
}

template <class T>
T get_field(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) {
        throw ValidationError("missing field '" + where + "." + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("field '" + where + "." + key +
                              "' has the wrong type");
    }
}

template <class T>
T get_field_or(const json& obj, const std::string& where, const std::string& key,
               T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("field '" + where + "." + key +
                              "' has the wrong type");
    }
}

Eigen::MatrixXcd parse_state_matrix(const json& node, int dim) {
    require_keys(node, "initial_state", {"re", "im"});
    const auto re = get_field<std::vector<std::vector<double>>>(node,
                                                                "initial_state", "re");
    auto im = get_field_or<std::vector<std::vector<double>>>(
        node, "initial_state", "im", {});
    if (im.empty()) {
        im.assign(re.size(), std::vector<double>(re.empty() ? 0 : re[0].size(), 0.0));
    }
    if (static_cast<int>(re.size()) != dim || static_cast<int>(im.size()) != dim) {
        throw ValidationError("initial_state matrix must be " + std::to_string(dim) +
                              "x" + std::to_string(dim));
    }
    Eigen::MatrixXcd rho(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (static_cast<int>(re[static_cast<size_t>(i)].size()) != dim ||
            static_cast<int>(im[static_cast<size_t>(i)].size()) != dim) {
            throw ValidationError("initial_state matrix must be " +
                                  std::to_string(dim) + "x" + std::to_string(dim));
        }
        for (int jj = 0; jj < dim; ++jj) {
            rho(i, jj) = {re[static_cast<size_t>(i)][static_cast<size_t>(jj)],
                          im[static_cast<size_t>(i)][static_cast<size_t>(jj)]};
        }
    }
    return rho;
}

}  // namespace

void validate_config(const RunConfig& c) {
    if (c.model.n_spins < 2 || c.model.n_spins > kMaxSpins) {
        throw ValidationError("model.n_spins must be in [2, " +
                              std::to_string(kMaxSpins) + "]");
    }
    if (!std::isfinite(c.model.j_x) || !std::isfinite(c.model.j_y) ||
        !std::isfinite(c.model.j_z)) {
        throw ValidationError("model couplings must be finite");
    }
    if (c.bath.n_modes < 1) throw ValidationError("bath.n_modes must be >= 1");
    if (c.bath.xi < 0.0) throw ValidationError("bath.xi must be >= 0");
    if (!(c.bath.omega_max > 0.0)) {
        throw ValidationError("bath.omega_max must be > 0");
    }
    if (static_cast<int>(c.bath.beta.size()) != c.model.n_spins) {
        throw ValidationError("bath.beta needs one entry per spin");
    }
    for (double b : c.bath.beta) {
        if (!(b > 0.0)) throw ValidationError("bath.beta entries must be > 0");
    }
    if (!(c.run.dt > 0.0)) throw ValidationError("run.dt must be > 0");
    if (!(c.run.t_max > 0.0)) throw ValidationError("run.t_max must be > 0");
    if (c.run.output_points < 1) {
        throw ValidationError("run.output_points must be >= 1");
    }
    const double spacing = c.run.t_max / c.run.output_points;
    const double stride = spacing / c.run.dt;
    if (std::abs(stride - std::lround(stride)) > 1e-9 || stride < 0.5) {
        throw ValidationError("run.dt must divide t_max/output_points");
    }
    if (c.run.n_samples < 1) throw ValidationError("run.n_samples must be >= 1");
    if (c.run.threads < 0) throw ValidationError("run.threads must be >= 0");

    const int dim = subsystem_dimension(c.model.n_spins);
    if (c.initial_state.rows() != dim || c.initial_state.cols() != dim) {
        throw ValidationError("initial_state dimension mismatch");
    }
    if ((c.initial_state - c.initial_state.adjoint()).cwiseAbs().maxCoeff() >
        1e-10) {
        throw ValidationError("initial_state must be Hermitian");
    }
    if (std::abs(c.initial_state.trace() - std::complex<double>(1.0, 0.0)) >
        1e-10) {
        throw ValidationError("initial_state must have unit trace");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c.initial_state);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-10) {
        throw ValidationError("initial_state must be positive semidefinite");
    }

    const bool needs_analytic = c.run.mode == RunMode::kAnalytic ||
                                c.run.mode == RunMode::kCompare ||
                                c.run.mode == RunMode::kOracleCheck;
    if (needs_analytic) {
        if (c.model.n_spins != 2) {
            throw ValidationError("analytic modes require n_spins = 2");
        }
        if (c.model.j_x != c.model.j_y) {
            throw ValidationError("analytic modes require j_x = j_y");
        }
        if (c.model.j_x < 0.0 || c.model.j_z < 0.0) {
            throw ValidationError("analytic modes require j >= 0 and j_z >= 0");
        }
    }
    if (c.analytic.g_c && *c.analytic.g_c < 0.0) {
        throw ValidationError("analytic.g_c must be >= 0");
    }
    if (c.analytic.omega_total && *c.analytic.omega_total < 0.0) {
        throw ValidationError("analytic.Omega must be >= 0");
    }
    if (c.analytic.omega_ref_zero && !(*c.analytic.omega_ref_zero > 0.0)) {
        throw ValidationError("analytic.omega_ref_zero must be > 0");
    }
}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // translate the byte offset into a line number
        size_t line = 1;
        for (size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ValidationError("config parse error at line " + std::to_string(line) +
                              ": " + e.what());
    }
    if (!root.is_object()) throw ValidationError("config must be a JSON object");
    require_keys(root, "config",
                 {"model", "bath", "run", "initial_state", "analytic"});

    RunConfig c;
    const json& model = root.contains("model") ? root.at("model") : json::object();
    require_keys(model, "model", {"n_spins", "j_x", "j_y", "j_z"});
    c.model.n_spins = get_field_or<int>(model, "model", "n_spins", 2);
    c.model.j_x = get_field_or<double>(model, "model", "j_x", 1.0);
    c.model.j_y = get_field_or<double>(model, "model", "j_y", 1.0);
    c.model.j_z = get_field_or<double>(model, "model", "j_z", 0.5);

    const json& bath = root.contains("bath") ? root.at("bath") : json::object();
    require_keys(bath, "bath", {"n_modes", "xi", "omega_max", "beta"});
    c.bath.n_modes = get_field_or<int>(bath, "bath", "n_modes", 200);
    c.bath.xi = get_field_or<double>(bath, "bath", "xi", 0.007);
    c.bath.omega_max = get_field_or<double>(bath, "bath", "omega_max", 3.0);
    c.bath.beta = get_field_or<std::vector<double>>(bath, "bath", "beta",
                                                    {1.0, 0.3});

    const json& run = root.contains("run") ? root.at("run") : json::object();
    require_keys(run, "run",
                 {"dt", "t_max", "output_points", "n_samples", "seed", "threads",
                  "mode"});
    c.run.dt = get_field_or<double>(run, "run", "dt", 0.01);
    c.run.t_max = get_field_or<double>(run, "run", "t_max", 20.0);
    c.run.output_points = get_field_or<int>(run, "run", "output_points", 200);
    c.run.n_samples = get_field_or<std::uint64_t>(run, "run", "n_samples", 5000);
    c.run.seed = get_field_or<std::uint64_t>(run, "run", "seed", 20260809);
    c.run.threads = get_field_or<int>(run, "run", "threads", 0);
    c.run.mode = parse_run_mode(
        get_field_or<std::string>(run, "run", "mode", "compare"));

    if (root.contains("initial_state")) {
        const json& st = root.at("initial_state");
        if (st.is_string()) {
            c.initial_state_name = st.get<std::string>();
            c.initial_state =
                initial_state_preset(c.initial_state_name, c.model.n_spins);
        } else if (st.is_object()) {
            c.initial_state_name = "custom";
            c.initial_state =
                parse_state_matrix(st, subsystem_dimension(c.model.n_spins));
        } else {
            throw ValidationError("initial_state must be a name or {re, im}");
        }
    } else {
        c.initial_state_name = "psi-minus";
        c.initial_state = initial_state_preset("psi-minus", c.model.n_spins);
    }

    if (root.contains("analytic")) {
        const json& an = root.at("analytic");
        require_keys(an, "analytic", {"g_c", "Omega", "omega_ref_zero"});
        if (an.contains("g_c")) {
            c.analytic.g_c = get_field<double>(an, "analytic", "g_c");
        }
        if (an.contains("Omega")) {
            c.analytic.omega_total = get_field<double>(an, "analytic", "Omega");
        }
        if (an.contains("omega_ref_zero")) {
            c.analytic.omega_ref_zero =
                get_field<double>(an, "analytic", "omega_ref_zero");
        }
    }

    validate_config(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string RunConfig::to_json() const {
    json root;
    root["model"] = {{"n_spins", model.n_spins},
                     {"j_x", model.j_x},
                     {"j_y", model.j_y},
                     {"j_z", model.j_z}};
    root["bath"] = {{"n_modes", bath.n_modes},
                    {"xi", bath.xi},
                    {"omega_max", bath.omega_max},
                    {"beta", bath.beta}};
    root["run"] = {{"dt", run.dt},
                   {"t_max", run.t_max},
                   {"output_points", run.output_points},
                   {"n_samples", run.n_samples},
                   {"seed", run.seed},
                   {"threads", run.threads},
                   {"mode", run_mode_name(run.mode)}};
    if (initial_state_name != "custom") {
        root["initial_state"] = initial_state_name;
    } else {
        const int dim = static_cast<int>(initial_state.rows());
        std::vector<std::vector<double>> re(static_cast<size_t>(dim)),
            im(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            for (int jj = 0; jj < dim; ++jj) {
                re[static_cast<size_t>(i)].push_back(initial_state(i, jj).real());
                im[static_cast<size_t>(i)].push_back(initial_state(i, jj).imag());
            }
        }
        root["initial_state"] = {{"re", re}, {"im", im}};
    }
    json an = json::object();
    if (analytic.g_c) an["g_c"] = *analytic.g_c;
    if (analytic.omega_total) an["Omega"] = *analytic.omega_total;
    if (analytic.omega_ref_zero) an["omega_ref_zero"] = *analytic.omega_ref_zero;
    if (!an.empty()) root["analytic"] = an;
    return root.dump();
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    c.model = {2, 1.0, 1.0, 0.5};
    c.bath.n_modes = 200;
    c.bath.xi = 0.007;
    c.bath.omega_max = 3.0;
    c.run = RunSettings{};
    if (name == "fig1") {
        c.bath.beta = {0.005, 0.005};
        c.initial_state_name = "up-down";
        c.run.mode = RunMode::kSimulate;
    } else if (name == "fig2") {
        c.bath.beta = {1.0, 0.3};
        c.initial_state_name = "psi-minus";
        c.run.mode = RunMode::kCompare;
    } else if (name == "fig3") {
        c.bath.beta = {0.005, 0.005};
        c.initial_state_name = "up-down";
        c.run.mode = RunMode::kCompare;
    } else {
        throw ValidationError("unknown preset '" + name +
                              "' (expected fig1|fig2|fig3)");
    }
    c.initial_state = initial_state_preset(c.initial_state_name, c.model.n_spins);
    validate_config(c);
    return c;
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3"}; }

}  // namespace spinbath
