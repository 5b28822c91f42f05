#include "ymh/metrics_family.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace ymh {

std::string to_string(ChiKind k) { return k == ChiKind::flat_one ? "flat_one" : "smooth_bump"; }

ChiKind chi_kind_from_string(const std::string& s) {
    if (s == "flat_one") return ChiKind::flat_one;
    if (s == "smooth_bump") return ChiKind::smooth_bump;
    throw std::invalid_argument("unknown chi kind '" + s + "'");
}

namespace {

double f_exp(double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; }

// Smooth odd step from -1 (x <= -1) to 1 (x >= 1).
double smooth_sign(double x) {
    if (x <= -1.0) return -1.0;
    if (x >= 1.0) return 1.0;
    const double y = 0.5 * (x + 1.0);
    return 2.0 * f_exp(y) / (f_exp(y) + f_exp(1.0 - y)) - 1.0;
}

// Smoothed |t|: equal to |t| outside [-1, 1], S' = smooth_sign.
double smooth_abs(double t) {
    if (std::abs(t) >= 1.0) return std::abs(t);
    const int n = 2000;  // Simpson panels
    const double a = -1.0, h = (t - a) / n;
    double s = smooth_sign(a) + smooth_sign(t);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * smooth_sign(a + k * h);
    return 1.0 + s * h / 3.0;
}

double lambda_at(ChiKind kind, double delta, double t) {
    if (kind == ChiKind::flat_one) return delta * delta * std::exp(-t);
    return delta * delta * std::exp(smooth_abs(t));
}

}  // namespace

double chi_value(ChiKind kind, double delta, double r) {
    if (kind == ChiKind::flat_one) return 1.0;
    const double t = std::log(delta * delta / r);
    return std::exp(2.0 * (smooth_abs(t) + t));
}

WeightProfile CollarMetric::weight() const {
    WeightProfile w;
    w.lambda = lambda;
    w.delta = delta;
    w.T_half = T_half;
    w.C = C;
    return w;
}

CollarMetric collar_profile(double delta, int n_t, ChiKind chi) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("collar_profile: delta must lie in (0, 1)");
    if (n_t < 8) throw std::invalid_argument("collar_profile: n_t must be at least 8");
    const double T = -std::log(delta);
    if (T < kMinCollarHalfLength) throw std::invalid_argument("collar_profile: collar length degenerates (T too small)");
    if (chi == ChiKind::smooth_bump && T < 2.0)
        throw std::invalid_argument("collar_profile: smooth_bump needs T >= 2 so that chi = 1 for r >= delta^(3/2)");
    CollarMetric m;
    m.delta = delta;
    m.T_half = T;
    m.chi = chi;
    const double h = 2.0 * T / (n_t - 1);
    for (int i = 0; i < n_t; ++i) {
        const double t = -T + i * h;
        m.t.push_back(t);
        m.lambda.push_back(lambda_at(chi, delta, t));
    }
    m.C = exponential_bound_check(m.lambda, delta, T).C_min;
    return m;
}

BoundCheck exponential_bound_check(const std::vector<double>& profile, double delta, double T) {
    if (profile.size() < 2) throw std::invalid_argument("exponential_bound_check: profile too short");
    const int n = static_cast<int>(profile.size());
    const double h = 2.0 * T / (n - 1);
    BoundCheck b;
    for (int i = 0; i < n; ++i) {
        const double t = -T + i * h;
        b.C_min = std::max(b.C_min, std::abs(profile[i]) * std::exp(T - std::abs(t)) / delta);
    }
    b.pass = std::isfinite(b.C_min);
    return b;
}

CollarFamily family(const std::vector<double>& deltas, const std::vector<ChiKind>& chis, int n_t) {
    if (deltas.empty()) throw std::invalid_argument("family: empty delta list");
    if (chis.size() != deltas.size()) throw std::invalid_argument("family: one chi kind per member required");
    for (std::size_t k = 1; k < deltas.size(); ++k) {
        if (!(deltas[k] < deltas[k - 1])) throw std::invalid_argument("family: deltas must be strictly decreasing");
        if (chis[k] != chis[0]) throw std::invalid_argument("family: mixed chi kinds");
    }
    CollarFamily f;
    f.chi = chis[0];
    for (double d : deltas) {
        f.members.push_back(collar_profile(d, n_t, f.chi));
        f.C = std::max(f.C, f.members.back().C);
    }
    return f;
}

CollarFamily family(const std::vector<double>& deltas, ChiKind chi, int n_t) {
    return family(deltas, std::vector<ChiKind>(deltas.size(), chi), n_t);
}

std::string profile_csv(const CollarMetric& m) {
    std::string out = "t,lambda\n";
    for (std::size_t i = 0; i < m.t.size(); ++i) out += fmt::format("{:.17g},{:.17g}\n", m.t[i], m.lambda[i]);
    return out;
}

nlohmann::json manifest(const CollarFamily& f) {
    nlohmann::json j;
    std::vector<double> d, T;
    for (const auto& m : f.members) {
        d.push_back(m.delta);
        T.push_back(m.T_half);
    }
    j["deltas"] = d;
    j["T"] = T;
    j["C"] = f.C;
    j["chi_kind"] = to_string(f.chi);
    return j;
}

}  // namespace ymh
