#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "harness.hpp"

using namespace spinbath;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& extra = "") {
    return parse_config(R"({
        "bath": {"xi": 0.0, "beta": [0.005, 0.005]},
        "initial_state": "up-down",
        "run": {"t_max": 5.0, "output_points": 50, "n_samples": 4, "seed": 3)" +
                        extra + R"(}
    })");
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("spinbath_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int counter() {
        static int c = 0;
        return ++c;
    }
};

}  // namespace

TEST_CASE("analytic series at zero coupling is the undamped cosine") {
    const RunConfig c = small_config();
    const AnalyticSeries s = analytic_series(c);
    CHECK(s.rates.omega_total == 0.0);
    CHECK(s.rates.g_c == 0.0);
    for (size_t k = 0; k < s.t.size(); ++k) {
        CHECK(s.rho[k](1, 1).real() ==
              doctest::Approx(0.5 * (1 + std::cos(4 * s.t[k]))).epsilon(1e-12));
    }
}

TEST_CASE("numeric and analytic agree in the unitary limit") {
    const RunConfig c = small_config();
    ChainModel model(c.model);
    const BathModes modes =
        discretize_bath(c.bath.n_modes, c.bath.xi, c.bath.omega_max, c.bath.beta);
    EstimatorOptions opt;
    opt.dt = c.run.dt;
    opt.t_max = c.run.t_max;
    opt.output_points = c.run.output_points;
    opt.n_samples = c.run.n_samples;
    opt.seed = c.run.seed;
    const ReducedDensitySeries num =
        estimate_reduced_density(model, modes, c.initial_state, opt);
    const AnalyticSeries ana = analytic_series(c);
    double worst = 0.0;
    for (size_t k = 0; k < num.t.size(); ++k) {
        worst = std::max(
            worst,
            (num.rho[k] - ana.rho[k].cast<std::complex<double>>()).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("CSV output embeds the header and is reproducible") {
    const RunConfig c = small_config();
    ChainModel model(c.model);
    const BathModes modes =
        discretize_bath(c.bath.n_modes, c.bath.xi, c.bath.omega_max, c.bath.beta);
    EstimatorOptions opt;
    opt.t_max = c.run.t_max;
    opt.output_points = c.run.output_points;
    opt.n_samples = c.run.n_samples;
    opt.seed = c.run.seed;

    opt.threads = 1;
    const std::string csv1 = series_csv_text(
        c, estimate_reduced_density(model, modes, c.initial_state, opt));
    opt.threads = 2;
    const std::string csv2 = series_csv_text(
        c, estimate_reduced_density(model, modes, c.initial_state, opt));
    CHECK(csv1 == csv2);

    CHECK(csv1.rfind("# spinbath", 0) == 0);
    CHECK(csv1.find("# seed: 3") != std::string::npos);
    CHECK(csv1.find("\"initial_state\":\"up-down\"") != std::string::npos);
    CHECK(csv1.find("t,re_11,im_11,re_12") != std::string::npos);
    CHECK(csv1.find("se_re_11") != std::string::npos);

    // one header line + 51 rows
    size_t rows = 0;
    std::istringstream is(csv1);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '#') ++rows;
    }
    CHECK(rows == 52);
}

TEST_CASE("sampler moments are close at small sample counts") {
    const BathModes modes = discretize_bath(20, 0.007, 3.0, {0.5, 2.0});
    const auto rows = sampler_moments(modes, {0, 10, 19}, 20000, 5);
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
        CHECK(std::abs(r.var_r_emp / r.var_r_exact - 1.0) < 0.05);
        CHECK(std::abs(r.var_p_emp / r.var_p_exact - 1.0) < 0.05);
        CHECK(std::abs(r.equipartition_ratio - 1.0) < 0.05);
    }
    CHECK_THROWS_AS(sampler_moments(modes, {25}, 10, 1), std::invalid_argument);
}

TEST_CASE("plot script validates its inputs") {
    TempDir dir;
    const std::string good = (dir.path / "numeric.csv").string();
    {
        std::ofstream out(good);
        out << "# header\n";
        out << "t,re_11,im_11,re_22,im_22,re_33,im_33,re_44,im_44,"
               "se_re_11,se_re_22,se_re_33,se_re_44\n";
        out << "0,1,0,0,0,0,0,0,0,0,0,0,0\n";
    }
    const std::string script = emit_plot_script(dir.path.string(), good, "");
    CHECK(script.find("numeric.csv") != std::string::npos);
    CHECK(script.find("errorbar") != std::string::npos);

    const std::string bad = (dir.path / "bad.csv").string();
    {
        std::ofstream out(bad);
        out << "t,re_11\n0,1\n";
    }
    CHECK_THROWS_WITH_AS(emit_plot_script(dir.path.string(), bad, ""),
                         doctest::Contains("re_22"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        emit_plot_script(dir.path.string(), (dir.path / "nope.csv").string(), ""),
        doctest::Contains("missing CSV"), std::runtime_error);
}

TEST_CASE("run_harness compare writes the full output set") {
    TempDir dir;
    const RunConfig c = small_config();
    run_harness(c, RunMode::kCompare, dir.path.string());
    CHECK(fs::exists(dir.path / "numeric.csv"));
    CHECK(fs::exists(dir.path / "analytic.csv"));
    CHECK(fs::exists(dir.path / "report.json"));
    CHECK(fs::exists(dir.path / "plot.py"));

    std::ifstream in(dir.path / "report.json");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string report = buf.str();
    CHECK(report.find("\"rms_diff\"") != std::string::npos);
    CHECK(report.find("\"fit_numeric\"") != std::string::npos);
    CHECK(report.find("\"max_per_sample_dev\"") != std::string::npos);
}

TEST_CASE("run_harness oracle-check passes on the shipped presets") {
    TempDir dir;
    const RunConfig c = preset_config("fig2");
    run_harness(c, RunMode::kOracleCheck, dir.path.string());
    CHECK(fs::exists(dir.path / "report.json"));
}

TEST_CASE("oracle_check reports tiny deviations") {
    const OracleCheckResult res = oracle_check(preset_config("fig3"), 10, 99);
    CHECK(res.max_abs_diff < 1e-10);
    // stiff generator at beta = 0.005 (g_c ~ 1e3): expm holds the trace to ~1e-11
    CHECK(res.max_trace_dev < 1e-10);
}
