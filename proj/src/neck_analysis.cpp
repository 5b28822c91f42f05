#include "ymh/neck_analysis.hpp"

#include "ymh/numerics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ymh {

namespace {

// d_alpha u at node (i, j): periodic central difference plus X u.
Eigen::VectorXd twisted_derivative(const SectionField& u, const Eigen::MatrixXd& X, int i, int j) {
    const CylinderGrid& g = u.grid;
    const Eigen::VectorXd up = u.at(g.node(i, g.wrap(j + 1)));
    const Eigen::VectorXd um = u.at(g.node(i, g.wrap(j - 1)));
    return (up - um) / (2.0 * g.h_theta()) + X * u.at(g.node(i, j));
}

double value_at_zero(const std::vector<double>& profile, const CylinderGrid& g) {
    const int mid = g.middle_row();
    if (g.n_t % 2 == 1) return profile[mid];
    return 0.5 * (profile[mid] + profile[mid + 1]);
}

}  // namespace

NeckDiagnostics diagnostics(const ConnectionField& A, const SectionField& u, const AlgebraElement& alpha) {
    if (A.grid != u.grid || A.K != u.K || alpha.K() != u.K) throw std::invalid_argument("diagnostics: grid or dimension mismatch");
    if (A.max_abs_a_t() > 1e-12) throw std::invalid_argument("diagnostics: connection is not in temporal gauge (a_t != 0)");
    const CylinderGrid& g = u.grid;
    const Eigen::MatrixXd X = alpha.matrix();
    const NodeField ut = d_t(u.u);
    const CovariantDerivative D = covariant_derivative(A, u);
    const double hth = g.h_theta();

    NeckDiagnostics d;
    d.T_half = g.T_half;
    for (int i = 0; i < g.n_t; ++i) {
        double th = 0.0, rad = 0.0, cov = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            const double dh = twisted_derivative(u, X, i, j).squaredNorm();
            const double dt = ut.vec(n).squaredNorm();
            th += dh;
            rad += dt - dh;
            const double du = D.d_t.vec(n).squaredNorm() + D.d_theta.vec(n).squaredNorm();
            cov += du;
            d.sup_du = std::max(d.sup_du, std::sqrt(du));
        }
        d.t.push_back(g.t(i));
        d.theta_profile.push_back(hth * th);
        d.e_profile.push_back(hth * rad);
        d.total_energy += g.row_weight(i) * hth * (rad + 2.0 * th);
        d.covariant_energy += g.row_weight(i) * hth * cov;
    }
    d.e0 = value_at_zero(d.e_profile, g);
    return d;
}

double decomposed_energy(const NeckDiagnostics& d, double h_t) {
    double s = 0.0;
    const std::size_t n = d.t.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 * h_t : h_t;
        s += w * (d.e_profile[i] + 2.0 * d.theta_profile[i]);
    }
    return s;
}

RadialBalance radial_balance_check(const NeckDiagnostics& d, const std::vector<double>& f_l1_profile, double h_t) {
    if (f_l1_profile.size() != d.t.size()) throw std::invalid_argument("radial_balance_check: profile length mismatch");
    RadialBalance r;
    const std::size_t n = d.t.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 * h_t : h_t;
        r.f_l1 += w * f_l1_profile[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) r.deviation = std::max(r.deviation, std::abs(d.e_profile[i] - d.e0));
    r.bound = 2.0 * d.sup_du * r.f_l1;
    r.pass = r.deviation <= 1.1 * r.bound + 1e-12;
    return r;
}

DecayFit decay_fit(const NeckDiagnostics& d, double sigma, double abs_t_lo, double abs_t_hi) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double at = std::abs(d.t[i]);
        if (at < abs_t_lo - 1e-12 || at > abs_t_hi + 1e-12) continue;
        if (!(d.theta_profile[i] >= 1e-14)) continue;
        x.push_back(at - d.T_half);
        y.push_back(std::log(d.theta_profile[i]));
    }
    if (x.size() < 4) throw std::invalid_argument("decay_fit: fewer than 4 usable rows in the window");
    const LinearFit f = fit_line(x, y);
    DecayFit out;
    out.fitted_rate = f.slope;
    out.amplitude = std::exp(f.intercept);
    out.r_squared = f.r_squared;
    out.rows_used = static_cast<int>(x.size());
    out.meets_rate = out.fitted_rate >= 0.9 * sigma;
    return out;
}

std::vector<ConcentrationHit> concentration_scan(const ConnectionField& A, const SectionField& u, double window_len,
                                                 double threshold) {
    const CylinderGrid& g = u.grid;
    if (!(window_len > 0.0) || window_len > 2.0 * g.T_half + 1e-12)
        throw std::invalid_argument("concentration_scan: window length must lie in (0, 2T]");
    const CovariantDerivative D = covariant_derivative(A, u);
    std::vector<double> density(static_cast<std::size_t>(g.n_t), 0.0);
    for (int i = 0; i < g.n_t; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            s += D.d_t.vec(n).squaredNorm() + D.d_theta.vec(n).squaredNorm();
        }
        density[i] = s * g.h_theta();
    }
    const double h = g.h_t();
    const int half = std::max(1, static_cast<int>(std::llround(0.5 * window_len / h)));
    std::vector<std::pair<int, double>> above;
    for (int c = half; c + half < g.n_t; ++c) {
        double w = 0.5 * h * (density[c - half] + density[c + half]);
        for (int i = c - half + 1; i < c + half; ++i) w += h * density[i];
        if (w > threshold) above.emplace_back(c, w);
    }
    std::vector<ConcentrationHit> hits;
    for (std::size_t k = 0; k < above.size();) {
        std::size_t e = k;
        auto best = above[k];
        while (e + 1 < above.size() && above[e + 1].first == above[e].first + 1) {
            ++e;
            if (above[e].second > best.second) best = above[e];
        }
        hits.push_back({g.t(best.first), best.second});
        k = e + 1;
    }
    return hits;
}

std::string to_string(Trend t) {
    switch (t) {
        case Trend::converging: return "converging";
        case Trend::diverging: return "diverging";
        default: return "oscillating";
    }
}

Trend classify_trend(const std::vector<double>& v) {
    if (v.size() < 3) return Trend::converging;
    const std::size_t n = v.size();
    const double last_diff = std::abs(v[n - 1] - v[n - 2]);
    const double last_rel = last_diff / std::max(std::abs(v.back()), 1e-300);
    bool increasing = true, diffs_shrink = true;
    for (std::size_t k = 1; k < n; ++k) {
        if (!(v[k] > v[k - 1])) increasing = false;
        if (k + 1 < n && std::abs(v[k + 1] - v[k]) > std::abs(v[k] - v[k - 1]) * (1.0 + 1e-9) + 1e-14) diffs_shrink = false;
    }
    // Steady growth that does not decelerate is read as divergence.
    if (increasing && last_rel > 0.02 && last_diff >= 0.5 * (v[1] - v[0])) return Trend::diverging;
    if (diffs_shrink || last_rel <= 0.02) return Trend::converging;
    return Trend::oscillating;
}

std::string to_string(NeckClass c) {
    switch (c) {
        case NeckClass::twisted_geodesic: return "twisted_geodesic";
        case NeckClass::single_orbit: return "single_orbit";
        case NeckClass::infinite_geodesic: return "infinite_geodesic";
        case NeckClass::neumann_orbit: return "neumann_orbit";
        default: return "unresolved";
    }
}

SequenceReport build_sequence(const std::vector<SequenceEntry>& entries, const AlgebraElement& alpha_inf) {
    SequenceReport s;
    s.entries = entries;
    s.alpha_inf = alpha_inf;
    for (auto& e : s.entries) {
        e.rho = (e.alpha - alpha_inf).norm();
        s.mu_trace.push_back(e.T * e.e);
        s.nu_trace.push_back(e.T * std::sqrt(std::max(e.e, 0.0)));
        s.kappa_trace.push_back(e.T * e.rho);
        s.omega_trace.push_back(e.T * e.rho * e.rho);
    }
    s.mu_trend = classify_trend(s.mu_trace);
    s.nu_trend = classify_trend(s.nu_trace);
    s.kappa_trend = classify_trend(s.kappa_trace);
    s.omega_trend = classify_trend(s.omega_trace);
    return s;
}

EnergyIdentity energy_identity_check(const SequenceReport& seq, const std::vector<double>& energies,
                                     const std::vector<double>& orbit_terms) {
    const std::size_t n = seq.entries.size();
    if (n < 3) throw std::invalid_argument("energy_identity_check: at least 3 sequence entries required");
    if (energies.size() != n || orbit_terms.size() != n) throw std::invalid_argument("energy_identity_check: length mismatch");
    EnergyIdentity id;
    for (std::size_t k = 0; k < n; ++k) {
        const double mu = seq.mu_trace[k];
        id.residual_nondeg.push_back(std::abs(energies[k] - 2.0 * mu));
        id.residual_deg.push_back(std::abs(energies[k] - 2.0 * orbit_terms[k] - 2.0 * mu));
    }
    id.lhs = energies.back();
    id.rhs_nondeg = 2.0 * seq.mu_trace.back();
    id.rhs_deg = 2.0 * orbit_terms.back() + 2.0 * seq.mu_trace.back();
    auto decreasing = [](const std::vector<double>& r) {
        for (std::size_t k = 1; k < r.size(); ++k)
            if (r[k] > r[k - 1]) return false;
        return true;
    };
    id.nondeg_decreasing = decreasing(id.residual_nondeg);
    id.deg_decreasing = decreasing(id.residual_deg);
    return id;
}

double orbit_term(const SectionField& u, const AlgebraElement& alpha, const AlgebraElement& alpha_inf) {
    const CylinderGrid& g = u.grid;
    const Eigen::MatrixXd Y = (alpha - alpha_inf).matrix();
    double s = 0.0;
    for (int i = 0; i < g.n_t; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.n_theta; ++j) row += (Y * u.at(g.node(i, j))).squaredNorm();
        s += g.row_weight(i) * g.h_theta() * row;
    }
    return s;
}

double fixed_point_residual(const SectionField& u, const AlgebraElement& alpha_inf) {
    const CylinderGrid& g = u.grid;
    const Eigen::MatrixXd R = expm(2.0 * std::numbers::pi * alpha_inf.matrix());
    double m = 0.0;
    const int i = g.middle_row();
    for (int j = 0; j < g.n_theta; ++j) {
        const Eigen::VectorXd y = u.at(g.node(i, j));
        m = std::max(m, (R * y - y).norm());
    }
    return m;
}

NeckClass classify_neck(SequenceReport& seq, const SectionField& last_u, const ClassifyOptions& opts) {
    if (seq.entries.empty()) throw std::invalid_argument("classify_neck: empty sequence");
    std::vector<AlgebraElement> alphas;
    for (const auto& e : seq.entries) alphas.push_back(e.alpha);
    const DegenerationResult deg =
        classify_degeneration(alphas, seq.alpha_inf, opts.n_theta, opts.kernel_tol, opts.angle_tol);
    seq.degenerating = deg.degenerating;
    seq.fixed_point_residual = fixed_point_residual(last_u, seq.alpha_inf);
    seq.length = 0.0;
    const double nu = seq.nu_trace.back();
    NeckClass c = NeckClass::unresolved;
    if (seq.degenerating) {
        if (seq.kappa_trend == Trend::converging && nu <= opts.nu_infinite) c = NeckClass::neumann_orbit;
    } else if (nu < opts.nu_zero && seq.nu_trend != Trend::diverging) {
        c = NeckClass::single_orbit;
    } else if (seq.nu_trend == Trend::diverging || nu > opts.nu_infinite) {
        c = NeckClass::infinite_geodesic;
    } else if (seq.nu_trend == Trend::converging) {
        c = NeckClass::twisted_geodesic;
        seq.length = 2.0 * nu / std::sqrt(2.0 * std::numbers::pi);
    }
    seq.classification = c;
    return c;
}

ReparamLimit reparameterized_limit(const SectionField& u, int n_s, const AlgebraElement& alpha) {
    if (n_s < 8) throw std::invalid_argument("reparameterized_limit: n_s must be at least 8");
    const CylinderGrid& g = u.grid;
    const double T = g.T_half;
    const Eigen::MatrixXd X = alpha.matrix();
    const NodeField ut = d_t(u.u);
    ReparamLimit lim;
    lim.n_s = n_s;
    lim.n_theta = g.n_theta;
    for (int k = 0; k < n_s; ++k) {
        const double s = -1.0 + 2.0 * k / (n_s - 1);
        lim.s.push_back(s);
        const double pos = (T * s + T) / g.h_t();
        const int i0 = std::clamp(static_cast<int>(std::floor(pos)), 0, g.n_t - 2);
        const double w = std::clamp(pos - i0, 0.0, 1.0);
        for (int j = 0; j < g.n_theta; ++j) {
            const int a = g.node(i0, j), b = g.node(i0 + 1, j);
            Eigen::VectorXd v = (1.0 - w) * u.at(a) + w * u.at(b);
            lim.v.push_back(v);
            lim.T_dt.push_back(T * ((1.0 - w) * ut.vec(a).norm() + w * ut.vec(b).norm()));
            lim.T_dhat.push_back(T * ((1.0 - w) * twisted_derivative(u, X, i0, j).norm() +
                                      w * twisted_derivative(u, X, i0 + 1, j).norm()));
        }
    }
    return lim;
}

double curve_length(const ReparamLimit& lim, int j) {
    if (j < 0 || j >= lim.n_theta) throw std::out_of_range("curve_length: theta index");
    double L = 0.0;
    for (int k = 0; k + 1 < lim.n_s; ++k)
        L += (lim.v[static_cast<std::size_t>(k + 1) * lim.n_theta + j] - lim.v[static_cast<std::size_t>(k) * lim.n_theta + j]).norm();
    return L;
}

std::string profile_csv(const NeckDiagnostics& d) {
    std::string out = "t,theta_energy,e_t\n";
    for (std::size_t i = 0; i < d.t.size(); ++i)
        out += fmt::format("{:.17g},{:.17g},{:.17g}\n", d.t[i], d.theta_profile[i], d.e_profile[i]);
    return out;
}

nlohmann::json to_json(const SequenceReport& seq) {
    nlohmann::json j;
    nlohmann::json members = nlohmann::json::array();
    for (const auto& e : seq.entries) {
        members.push_back({{"T", e.T},
                           {"delta", e.delta},
                           {"e", e.e},
                           {"alpha", std::vector<double>(e.alpha.coeffs().data(), e.alpha.coeffs().data() + e.alpha.coeffs().size())},
                           {"rho", e.rho}});
    }
    j["members"] = members;
    j["mu_trace"] = seq.mu_trace;
    j["nu_trace"] = seq.nu_trace;
    j["kappa_trace"] = seq.kappa_trace;
    j["omega_trace"] = seq.omega_trace;
    j["trends"] = {{"mu", to_string(seq.mu_trend)},
                   {"nu", to_string(seq.nu_trend)},
                   {"kappa", to_string(seq.kappa_trend)},
                   {"omega", to_string(seq.omega_trend)}};
    j["classification"] = to_string(seq.classification);
    j["length"] = seq.length;
    j["degenerating"] = seq.degenerating;
    j["fixed_point_residual"] = seq.fixed_point_residual;
    return j;
}

}  // namespace ymh
