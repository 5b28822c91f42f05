#include "ymh/harness.hpp"

#include "ymh/scenarios.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace ymh {

ConfigError::ConfigError(std::vector<std::string> p)
    : std::runtime_error(p.empty() ? "invalid config" : "invalid config: " + p.front()), problems(std::move(p)) {}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"fixed_cylinder",    "collar_family",       "vortex_family",
                                                "degenerate_family", "half_cylinder_limit", "ode_only"};
    return names;
}

namespace {

using json = nlohmann::json;

// Field reader that records problems instead of throwing on the first one.
class Reader {
public:
    Reader(const json& j, std::string prefix, std::vector<std::string>& problems)
        : j_(j), prefix_(std::move(prefix)), problems_(problems) {}

    void allow(std::initializer_list<const char*> keys) {
        if (!j_.is_object()) {
            problems_.push_back(fmt::format("{}: expected an object", prefix_.empty() ? "config" : prefix_));
            return;
        }
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) problems_.push_back(fmt::format("{}: unknown field", path(it.key())));
    }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

    double number(const char* key, double def, double lo, double hi, bool open_lo = false) {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number()) {
            problems_.push_back(fmt::format("{}: expected a number", path(key)));
            return def;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x) || x > hi || (open_lo ? x <= lo : x < lo)) {
            problems_.push_back(fmt::format("{} = {} outside {}{}, {}]", path(key), x, open_lo ? "(" : "[", lo, hi));
            return def;
        }
        return x;
    }

    int integer(const char* key, int def, int lo, int hi) {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) {
            problems_.push_back(fmt::format("{}: expected an integer", path(key)));
            return def;
        }
        const long long x = v.get<long long>();
        if (x < lo || x > hi) {
            problems_.push_back(fmt::format("{} = {} outside [{}, {}]", path(key), x, lo, hi));
            return def;
        }
        return static_cast<int>(x);
    }

    bool boolean(const char* key, bool def) {
        if (!has(key)) return def;
        if (!j_.at(key).is_boolean()) {
            problems_.push_back(fmt::format("{}: expected true or false", path(key)));
            return def;
        }
        return j_.at(key).get<bool>();
    }

    std::string choice(const char* key, const std::string& def, const std::vector<std::string>& options) {
        if (!has(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_string()) {
            problems_.push_back(fmt::format("{}: expected a string", path(key)));
            return def;
        }
        const std::string s = v.get<std::string>();
        for (const auto& o : options)
            if (s == o) return s;
        problems_.push_back(fmt::format("{}: '{}' is not one of the accepted values", path(key), s));
        return def;
    }

    std::vector<double> numbers(const char* key, double lo, double hi) {
        std::vector<double> out;
        if (!has(key)) return out;
        const json& v = j_.at(key);
        if (!v.is_array()) {
            problems_.push_back(fmt::format("{}: expected an array of numbers", path(key)));
            return out;
        }
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>()) || e.get<double>() < lo || e.get<double>() > hi) {
                problems_.push_back(fmt::format("{}: entries must be numbers in [{}, {}]", path(key), lo, hi));
                return {};
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    Reader sub(const char* key) const {
        static const json empty = json::object();
        return Reader(has(key) ? j_.at(key) : empty, path(key), problems_);
    }

private:
    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    const json& j_;
    std::string prefix_;
    std::vector<std::string>& problems_;
};

}  // namespace

ExperimentConfig parse_config(const json& j) {
    std::vector<std::string> problems;
    ExperimentConfig c;
    c.raw = j;
    Reader r(j, "", problems);
    r.allow({"scenario", "seed", "action", "center_c", "grid", "T", "T_list", "delta_list", "chi", "alpha_jz", "lambda",
             "boundary", "solver", "thresholds", "init_noise", "manufactured_refine", "n_s", "expected_classification",
             "ode", "description"});
    if (!r.has("scenario")) problems.push_back("scenario: required");
    c.scenario = r.choice("scenario", "", scenario_names());

    if (r.has("seed")) {
        if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
            problems.push_back("seed: expected a non-negative integer");
        else
            c.seed = j.at("seed").get<std::uint64_t>();
    }

    const double center = r.number("center_c", 0.0, -10.0, 10.0);
    if (r.has("action")) {
        try {
            c.action = action_spec_from_json(j.at("action"));
        } catch (const std::exception& e) {
            problems.push_back(fmt::format("action: {}", e.what()));
        }
    } else {
        c.action = circle_on_sphere(center);
    }

    Reader g = r.sub("grid");
    g.allow({"h_t", "n_theta"});
    c.h_t = g.number("h_t", c.h_t, 0.0, 1.0, true);
    c.n_theta = g.integer("n_theta", c.n_theta, 8, 1024);

    c.T = r.number("T", c.T, kMinCollarHalfLength, 100.0);
    c.T_list = r.numbers("T_list", kMinCollarHalfLength, 100.0);
    c.delta_list = r.numbers("delta_list", 0.0, 1.0);
    for (double d : c.delta_list)
        if (!(d > 0.0 && d < 1.0)) problems.push_back("delta_list: entries must lie in (0, 1)");
    for (std::size_t k = 1; k < c.T_list.size(); ++k)
        if (!(c.T_list[k] > c.T_list[k - 1])) problems.push_back("T_list: must be strictly increasing");
    for (std::size_t k = 1; k < c.delta_list.size(); ++k)
        if (!(c.delta_list[k] < c.delta_list[k - 1])) problems.push_back("delta_list: must be strictly decreasing");
    c.chi = chi_kind_from_string(r.choice("chi", "flat_one", {"flat_one", "smooth_bump"}));
    c.alpha_jz = r.number("alpha_jz", c.alpha_jz, -10.0, 10.0);
    c.lambda = r.number("lambda", c.lambda, 0.0, 1e6, true);

    Reader b = r.sub("boundary");
    b.allow({"kind", "epsilon", "nu"});
    c.boundary = b.choice("kind", c.boundary, {"tilted_pole", "great_circle"});
    c.epsilon = b.number("epsilon", c.epsilon, 0.0, 1.0);
    c.nu = b.number("nu", c.nu, 0.0, 10.0);

    Reader s = r.sub("solver");
    s.allow({"step", "max_iters", "tol", "boundary", "update_connection", "update_section"});
    c.solver.step = s.number("step", c.solver.step, 0.0, 1e3, true);
    c.solver.max_iters = s.integer("max_iters", c.solver.max_iters, 0, 10000000);
    c.solver.tol = s.number("tol", c.solver.tol, 0.0, 1.0, true);
    c.solver.boundary = s.choice("boundary", "fixed", {"fixed", "free"}) == "fixed" ? BoundaryMode::fixed : BoundaryMode::free;
    c.solver.update_connection = s.boolean("update_connection", false);
    c.solver.update_section = s.boolean("update_section", true);

    Reader t = r.sub("thresholds");
    t.allow({"kernel_tol", "angle_tol", "concentration_threshold", "concentration_window", "nu_zero", "nu_infinite",
             "fixed_point_tol", "sequence_tol", "identity_tol"});
    Thresholds& th = c.thresholds;
    th.kernel_tol = t.number("kernel_tol", th.kernel_tol, 0.0, 1.0, true);
    th.angle_tol = t.number("angle_tol", th.angle_tol, 0.0, 1.0, true);
    th.concentration_threshold = t.number("concentration_threshold", th.concentration_threshold, 0.0, 1e6, true);
    th.concentration_window = t.number("concentration_window", th.concentration_window, 0.0, 200.0, true);
    th.nu_zero = t.number("nu_zero", th.nu_zero, 0.0, 1e3, true);
    th.nu_infinite = t.number("nu_infinite", th.nu_infinite, 0.0, 1e6, true);
    th.fixed_point_tol = t.number("fixed_point_tol", th.fixed_point_tol, 0.0, 1.0, true);
    th.sequence_tol = t.number("sequence_tol", th.sequence_tol, 0.0, 1.0, true);
    th.identity_tol = t.number("identity_tol", th.identity_tol, 0.0, 1.0, true);
    if (th.nu_zero >= th.nu_infinite) problems.push_back("thresholds: nu_zero must be below nu_infinite");

    c.init_noise = r.number("init_noise", c.init_noise, 0.0, 0.1);
    c.manufactured_refine = r.integer("manufactured_refine", c.manufactured_refine, 1, 100);
    c.n_s = r.integer("n_s", c.n_s, 8, 100000);
    c.expected_classification = r.choice("expected_classification", "",
                                         {"twisted_geodesic", "single_orbit", "infinite_geodesic", "neumann_orbit", "unresolved"});

    Reader o = r.sub("ode");
    o.allow({"flow", "kappa", "beta_jz", "s_max", "h_s", "position", "velocity"});
    c.ode.flow = o.choice("flow", c.ode.flow, {"neumann", "twisted_geodesic", "gradient_line"});
    c.ode.kappa = o.number("kappa", c.ode.kappa, 0.0, 100.0);
    c.ode.beta_jz = o.number("beta_jz", c.ode.beta_jz, -100.0, 100.0);
    c.ode.s_max = o.number("s_max", c.ode.s_max, 0.0, 1e4, true);
    c.ode.h_s = o.number("h_s", c.ode.h_s, 0.0, 1.0, true);
    if (o.has("position")) c.ode.position = o.numbers("position", -10.0, 10.0);
    if (o.has("velocity")) c.ode.velocity = o.numbers("velocity", -100.0, 100.0);
    if (c.ode.position.size() != 3 || c.ode.velocity.size() != 3)
        problems.push_back("ode: position and velocity need 3 entries");

    // Scenario-level requirements.
    const bool family = c.scenario == "collar_family" || c.scenario == "vortex_family" || c.scenario == "degenerate_family";
    if (family) {
        const std::size_t n = std::max(c.T_list.size(), c.delta_list.size());
        if (n < 3) problems.push_back(fmt::format("{}: needs at least 3 members in T_list or delta_list", c.scenario));
        if (!c.T_list.empty() && !c.delta_list.empty()) problems.push_back("give either T_list or delta_list, not both");
    }
    if (c.scenario != "ode_only" && c.action.K != 3) problems.push_back("action: the PDE scenarios use the 2-sphere (K = 3)");
    if (c.scenario == "collar_family" && c.chi == ChiKind::smooth_bump) {
        for (double T : c.T_list)
            if (T < 2.0) problems.push_back("chi smooth_bump requires every T >= 2");
        for (double d : c.delta_list)
            if (-std::log(d) < 2.0) problems.push_back("chi smooth_bump requires every delta <= e^-2");
    }
    if (c.scenario == "collar_family") {
        for (double d : c.delta_list)
            if (-std::log(d) < kMinCollarHalfLength) problems.push_back("delta_list: collar length below the minimum");
    }

    if (!problems.empty()) throw ConfigError(problems);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({fmt::format("cannot open {}", path.string())});
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({fmt::format("{}: {}", path.string(), e.what())});
    }
    return parse_config(j);
}

std::string config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

bool RunReport::all_pass() const {
    if (!failures.empty()) return false;
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

const Verdict* RunReport::verdict(const std::string& name) const {
    for (const auto& v : verdicts)
        if (v.name == name) return &v;
    return nullptr;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport r;
    try {
        if (cfg.scenario == "fixed_cylinder") r = run_fixed_cylinder(cfg);
        else if (cfg.scenario == "collar_family") r = run_collar_family(cfg);
        else if (cfg.scenario == "vortex_family") r = run_vortex_family(cfg);
        else if (cfg.scenario == "degenerate_family") r = run_degenerate_family(cfg);
        else if (cfg.scenario == "half_cylinder_limit") r = run_half_cylinder_limit(cfg);
        else if (cfg.scenario == "ode_only") r = run_ode_only(cfg);
        else throw std::invalid_argument("unknown scenario " + cfg.scenario);
    } catch (const std::exception& e) {
        r.failures.push_back({"scenario", -1, e.what()});
    }
    r.scenario = cfg.scenario;
    r.config_hash = config_hash(cfg.raw);
    r.timing["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

json report_json(const RunReport& r) {
    json j;
    j["config_hash"] = r.config_hash;
    j["scenario"] = r.scenario;
    j["results"] = r.body;
    json v = json::array();
    for (const auto& x : r.verdicts)
        v.push_back({{"name", x.name}, {"pass", x.pass}, {"value", x.value}, {"threshold", x.threshold}});
    j["verdicts"] = v;
    json f = json::array();
    for (const auto& x : r.failures) f.push_back({{"stage", x.stage}, {"member", x.member}, {"message", x.message}});
    j["failures"] = f;
    json files = json::array();
    for (const auto& [name, text] : r.files) files.push_back(name);
    j["files"] = files;
    j["all_pass"] = r.all_pass();
    return j;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create directory {}: {}", p.parent_path().string(), ec.message()));
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", p.string()));
    out << text;
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", p.string()));
}

}  // namespace

std::vector<std::filesystem::path> emit(const RunReport& r, const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::filesystem::path& rel, const std::string& text) {
        write_text(out_dir / rel, text);
        written.push_back(out_dir / rel);
    };
    put("report.json", report_json(r).dump(2) + "\n");
    json timing(r.timing);
    put("timing.json", timing.dump(2) + "\n");
    for (const auto& [name, text] : r.files) put(name, text);
    return written;
}

int thread_count() {
    if (const char* env = std::getenv("YMH_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 256L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ymh
