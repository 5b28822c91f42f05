#include "ymh/harness.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ymh;
namespace fs = std::filesystem;

namespace {
const fs::path kConfigs = fs::path(YMH_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t problem_count(const nlohmann::json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.problems.size();
    }
    return 0;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ymh_harness_" + name);
    fs::remove_all(p);
    return p;
}
}  // namespace

TEST_CASE("every shipped config validates") {
    int n = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        const ExperimentConfig cfg = load_config(entry.path());
        CHECK(cfg.raw.is_object());
        CHECK(std::find(scenario_names().begin(), scenario_names().end(), cfg.scenario) != scenario_names().end());
        ++n;
    }
    CHECK(n >= 7);
}

TEST_CASE("config validation reports every problem") {
    CHECK(problem_count({{"scenario", "fixed_cylinder"}}) == 0);
    CHECK(problem_count({{"scenario", "warp_drive"}}) == 1);
    CHECK(problem_count(nlohmann::json::object()) >= 1);
    CHECK(problem_count({{"scenario", "fixed_cylinder"}, {"colour", "blue"}}) == 1);
    CHECK(problem_count({{"scenario", "fixed_cylinder"}, {"colour", "blue"}, {"grid", {{"h_t", -1.0}}}}) == 2);
    CHECK(problem_count({{"scenario", "fixed_cylinder"}, {"seed", -3}}) == 1);
    CHECK(problem_count({{"scenario", "collar_family"}, {"T_list", {2.0, 3.0}}}) >= 1);
    CHECK(problem_count({{"scenario", "collar_family"}, {"T_list", {2.0, 4.0, 3.0}}}) >= 1);
    CHECK(problem_count({{"scenario", "collar_family"}, {"delta_list", {0.5, 0.2, 1.5}}}) >= 1);
    CHECK(problem_count({{"scenario", "fixed_cylinder"}, {"thresholds", {{"nu_zero", 30.0}}}}) == 1);
    CHECK(problem_count({{"scenario", "ode_only"}, {"ode", {{"position", {1.0, 0.0}}}}}) == 1);
    CHECK_THROWS_AS(load_config(kConfigs / "does_not_exist.json"), ConfigError);
}

TEST_CASE("config hash is stable and key-order independent") {
    const nlohmann::json a = nlohmann::json::parse(R"({"scenario": "ode_only", "seed": 3})");
    const nlohmann::json b = nlohmann::json::parse(R"({"seed": 3, "scenario": "ode_only"})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(nlohmann::json::parse(R"({"scenario": "ode_only", "seed": 4})")));
}

TEST_CASE("reports are byte-identical across runs") {
    for (const char* name : {"neumann_ode.json", "gradient_line.json", "vortex_family.json", "degenerate_family.json"}) {
        CAPTURE(name);
        const ExperimentConfig cfg = load_config(kConfigs / name);
        const RunReport a = run_experiment(cfg), b = run_experiment(cfg);
        CHECK(a.failures.empty());
        CHECK(a.all_pass());
        CHECK(report_json(a).dump(2) == report_json(b).dump(2));
        CHECK(a.files == b.files);
    }
}

TEST_CASE("thread count does not change the report") {
    const ExperimentConfig cfg = load_config(kConfigs / "vortex_family.json");
    setenv("YMH_LAB_THREADS", "1", 1);
    CHECK(thread_count() == 1);
    const std::string one = report_json(run_experiment(cfg)).dump();
    setenv("YMH_LAB_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    const std::string three = report_json(run_experiment(cfg)).dump();
    unsetenv("YMH_LAB_THREADS");
    CHECK(one == three);
    CHECK(thread_count() >= 1);
}

TEST_CASE("emit writes the report, timings and data files") {
    const ExperimentConfig cfg = load_config(kConfigs / "neumann_ode.json");
    const RunReport r = run_experiment(cfg);
    const fs::path out = scratch("emit");
    const auto written = emit(r, out);
    CHECK(written.size() == r.files.size() + 2);
    const nlohmann::json rep = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(rep["config_hash"] == config_hash(cfg.raw));
    CHECK(rep["scenario"] == "ode_only");
    CHECK(rep["all_pass"] == true);
    CHECK_FALSE(rep.contains("timing"));
    CHECK(nlohmann::json::parse(slurp(out / "timing.json")).is_object());
    for (const auto& [path, text] : r.files) CHECK(slurp(out / path) == text);
    fs::remove_all(out);
}

TEST_CASE("an empty report still emits valid JSON") {
    RunReport r;
    r.scenario = "ode_only";
    const fs::path out = scratch("empty");
    emit(r, out);
    const nlohmann::json rep = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(rep["verdicts"].empty());
    CHECK(rep["failures"].empty());
    // No verdicts means nothing was certified.
    CHECK(rep["all_pass"] == r.all_pass());
    fs::remove_all(out);
}

TEST_CASE("stage failures are recorded, not thrown") {
    ExperimentConfig cfg = load_config(kConfigs / "neumann_ode.json");
    cfg.ode.h_s = 0.5;
    const RunReport r = run_experiment(cfg);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].stage == "scenario");
    CHECK_FALSE(r.all_pass());
    CHECK(report_json(r)["failures"][0]["message"].get<std::string>().find("drift") != std::string::npos);
    CHECK(r.verdict("neumann_drift") == nullptr);
}

TEST_CASE("emit reports unwritable destinations") {
    RunReport r;
    const fs::path blocker = scratch("blocker");
    { std::ofstream(blocker) << "x"; }
    CHECK_THROWS(emit(r, blocker / "sub"));
    fs::remove_all(blocker);
}
