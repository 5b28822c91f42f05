// ymh-lab: run, validate and list experiment scenarios.
#include "ymh/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kStage = 2;

int report_config_error(const ymh::ConfigError& e) {
    for (const auto& p : e.problems) fmt::print(stderr, "config error: {}\n", p);
    return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yang-Mills-Higgs neck experiments on cylinders and collars"};
    app.require_subcommand(1);

    std::string run_config, out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment and write its report");
    run->add_option("config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", validate_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    auto* list = app.add_subcommand("list-scenarios", "Print the scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    if (*list) {
        for (const auto& s : ymh::scenario_names()) fmt::print("{}\n", s);
        return kOk;
    }

    if (*validate) {
        try {
            const auto cfg = ymh::load_config(validate_config);
            fmt::print("ok {} {}\n", cfg.scenario, ymh::config_hash(cfg.raw));
            return kOk;
        } catch (const ymh::ConfigError& e) {
            return report_config_error(e);
        }
    }

    ymh::ExperimentConfig cfg;
    try {
        cfg = ymh::load_config(run_config);
    } catch (const ymh::ConfigError& e) {
        return report_config_error(e);
    }

    const ymh::RunReport report = ymh::run_experiment(cfg);
    try {
        const auto files = ymh::emit(report, out_dir);
        fmt::print("wrote {} files to {}\n", files.size(), out_dir);
    } catch (const std::exception& e) {
        fmt::print(stderr, "emit failed: {}\n", e.what());
        return kStage;
    }
    for (const auto& v : report.verdicts)
        fmt::print("{:<36} {} value={:.6g} threshold={:.6g}\n", v.name, v.pass ? "PASS" : "FAIL", v.value, v.threshold);
    for (const auto& f : report.failures)
        fmt::print(stderr, "stage failure: {} (member {}): {}\n", f.stage, f.member, f.message);
    return report.failures.empty() ? kOk : kStage;
}
