#pragma once

#include "ymh/lie_action.hpp"
#include "ymh/metrics_family.hpp"
#include "ymh/ymh_core.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymh {

struct OdeSettings {
    std::string flow = "neumann";  ///< neumann | twisted_geodesic | gradient_line
    double kappa = 1.0;
    double beta_jz = 1.0;
    double s_max = 20.0;
    double h_s = 1e-3;
    std::vector<double> position{1.0, 0.0, 0.0};
    std::vector<double> velocity{0.0, 0.0, 1.0};
};

struct Thresholds {
    double kernel_tol = 1e-9;
    double angle_tol = 1e-6;
    double concentration_threshold = 0.1;
    double concentration_window = 1.0;
    double nu_zero = 0.05;
    double nu_infinite = 20.0;
    double fixed_point_tol = 1e-6;
    double sequence_tol = 0.05;  ///< relative, last solved identity residual
    double identity_tol = 1e-8;  ///< absolute, manufactured identity residual
};

/// Parsed and range-checked experiment description.
struct ExperimentConfig {
    nlohmann::json raw;
    std::string scenario;
    ActionSpec action;

    double h_t = 0.05;
    int n_theta = 16;
    double T = 8.0;
    std::vector<double> T_list;
    std::vector<double> delta_list;
    ChiKind chi = ChiKind::flat_one;
    double alpha_jz = 0.0;  ///< flat comparison connection alpha = alpha_jz * J_z
    double lambda = 1.0;    ///< constant weight for single-cylinder scenarios

    std::string boundary = "tilted_pole";  ///< tilted_pole | great_circle
    double epsilon = 0.15;
    double nu = 1.0;

    SolverOptions solver;
    Thresholds thresholds;
    std::uint64_t seed = 0;
    double init_noise = 1e-3;
    int manufactured_refine = 10;
    int n_s = 201;
    std::string expected_classification;
    OdeSettings ode;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    std::vector<std::string> problems;
};

const std::vector<std::string>& scenario_names();

/// Throws ConfigError listing every out-of-range or malformed field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical (sorted-key) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct StageFailure {
    std::string stage;
    int member = -1;
    std::string message;
};

struct RunReport {
    std::string config_hash;
    std::string scenario;
    nlohmann::json body = nlohmann::json::object();
    std::vector<Verdict> verdicts;
    std::vector<StageFailure> failures;
    std::map<std::string, std::string> files;  ///< relative path -> CSV text
    std::map<std::string, double> timing;      ///< seconds per stage, kept out of report.json

    bool all_pass() const;
    const Verdict* verdict(const std::string& name) const;
};

RunReport run_experiment(const ExperimentConfig& cfg);

/// Deterministic report document (no timings).
nlohmann::json report_json(const RunReport& r);

/// Writes report.json, timing.json and every CSV; returns the paths written.
std::vector<std::filesystem::path> emit(const RunReport& r, const std::filesystem::path& out_dir);

/// Worker count: YMH_LAB_THREADS if set and positive, else hardware concurrency.
int thread_count();

}  // namespace ymh
