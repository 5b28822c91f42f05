#include "ymh/gauge.hpp"
#include "ymh/numerics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ymh {

GaugeTransform::GaugeTransform(const CylinderGrid& g, int k)
    : grid(g), K(k), s(static_cast<std::size_t>(g.nodes()), Eigen::MatrixXd::Identity(k, k)) {}

namespace {

void check_grid(const GaugeTransform& s, const CylinderGrid& g, int K) {
    if (s.grid != g || s.K != K) throw std::invalid_argument("apply_gauge: grid mismatch");
}

Eigen::VectorXd log_coeffs(const Eigen::MatrixXd& R) { return coeffs_from_skew(minimal_log(R).log); }

// s^{-1} X s for X given by coefficients.
Eigen::VectorXd conjugate(int K, const Eigen::MatrixXd& s, const double* c) {
    const Eigen::MatrixXd X = skew_from_coeffs(K, c);
    return coeffs_from_skew(s.transpose() * X * s);
}

Eigen::MatrixXd link(int K, double h, const double* c) { return expm(h * skew_from_coeffs(K, c)); }

}  // namespace

ConnectionField apply_gauge(const GaugeTransform& s, const ConnectionField& A) {
    const auto& g = A.grid;
    check_grid(s, g, A.K);
    const int K = A.K;
    ConnectionField out(g, K);
    const double ht = 1.0 / (2.0 * g.h_theta());
    for (int i = 0; i < g.n_t; ++i) {
        const TStencil st = dt_stencil(g, i);
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            const Eigen::MatrixXd sinv = s.s[n].transpose();
            Eigen::VectorXd mc_t = Eigen::VectorXd::Zero(algebra_dim(K));
            for (int k = 0; k < 3; ++k) {
                if (st.row[k] == i || st.w[k] == 0.0) continue;
                mc_t += st.w[k] * log_coeffs(sinv * s.s[g.node(st.row[k], j)]);
            }
            const Eigen::VectorXd mc_th = ht * (log_coeffs(sinv * s.s[g.node(i, g.wrap(j + 1))]) -
                                                log_coeffs(sinv * s.s[g.node(i, g.wrap(j - 1))]));
            out.a_t.vec(n) = mc_t + conjugate(K, s.s[n], A.a_t.at(n));
            out.a_theta.vec(n) = mc_th + conjugate(K, s.s[n], A.a_theta.at(n));
        }
    }
    return out;
}

SectionField apply_gauge(const GaugeTransform& s, const SectionField& u) {
    check_grid(s, u.grid, u.K);
    SectionField out(u.grid, u.K);
    for (int n = 0; n < u.grid.nodes(); ++n) out.at(n) = s.s[n].transpose() * u.at(n);
    out.renormalize();
    return out;
}

std::pair<ConnectionField, SectionField> apply_gauge(const GaugeTransform& s, const ConnectionField& A,
                                                     const SectionField& u) {
    return {apply_gauge(s, A), apply_gauge(s, u)};
}

// ---------------------------------------------------------------------------

Holonomy circle_holonomy(const std::vector<AlgebraElement>& a_theta) {
    if (a_theta.empty()) throw std::invalid_argument("circle_holonomy: no samples");
    const int K = a_theta.front().K();
    const double h = 2.0 * std::numbers::pi / static_cast<double>(a_theta.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(K, K);
    for (const auto& a : a_theta) H = maybe_reorthonormalize(H * expm(h * a.matrix()));
    Holonomy out;
    out.matrix = H;
    out.phases = minimal_log(H).phases;
    return out;
}

Holonomy holonomy(const ConnectionField& A, int t_index) {
    if (t_index < 0 || t_index >= A.grid.n_t) throw std::out_of_range("holonomy: row index out of range");
    std::vector<AlgebraElement> row;
    row.reserve(A.grid.n_theta);
    for (int j = 0; j < A.grid.n_theta; ++j) row.push_back(A.at_theta(A.grid.node(t_index, j)));
    return circle_holonomy(row);
}

// ---------------------------------------------------------------------------

BalancedGauge balanced_temporal_gauge(const ConnectionField& A) {
    const auto& g = A.grid;
    const int K = A.K;
    const int mid = g.middle_row();
    const double h = g.h_t();
    const double hth = g.h_theta();
    GaugeTransform s1(g, K);

    auto a_t_at = [&](int i, int j, double frac, int dir) -> Eigen::MatrixXd {
        // Linear interpolation of a_t between row i and row i + dir.
        const Eigen::VectorXd c0 = A.a_t.vec(g.node(i, j));
        const Eigen::VectorXd c1 = A.a_t.vec(g.node(i + dir, j));
        const Eigen::VectorXd c = (1.0 - frac) * c0 + frac * c1;
        return skew_from_coeffs(K, c.data());
    };

    for (int j = 0; j < g.n_theta; ++j) {
        for (int dir : {+1, -1}) {
            Eigen::MatrixXd S = Eigen::MatrixXd::Identity(K, K);
            const double step = dir * h;
            for (int i = mid; (dir > 0 ? i < g.n_t - 1 : i > 0); i += dir) {
                // ds/dt = -a_t s
                const Eigen::MatrixXd a0 = a_t_at(i, j, 0.0, dir);
                const Eigen::MatrixXd ah = a_t_at(i, j, 0.5, dir);
                const Eigen::MatrixXd a1 = a_t_at(i, j, 1.0, dir);
                const Eigen::MatrixXd k1 = -a0 * S;
                const Eigen::MatrixXd k2 = -ah * (S + 0.5 * step * k1);
                const Eigen::MatrixXd k3 = -ah * (S + 0.5 * step * k2);
                const Eigen::MatrixXd k4 = -a1 * (S + step * k3);
                S = S + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (!S.allFinite()) throw std::runtime_error("balanced_temporal_gauge: ODE step produced non-finite values");
                S = reorthonormalize(S);
                s1.s[g.node(i + dir, j)] = S;
            }
        }
    }

    // Links of the once-transformed connection; a_t is zero by construction.
    std::vector<Eigen::MatrixXd> U(static_cast<std::size_t>(g.nodes()));
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            const int np = g.node(i, g.wrap(j + 1));
            U[n] = s1.s[n].transpose() * link(K, hth, A.a_theta.at(n)) * s1.s[np];
        }

    Eigen::MatrixXd hol = Eigen::MatrixXd::Identity(K, K);
    for (int j = 0; j < g.n_theta; ++j) hol = hol * U[g.node(mid, j)];
    hol = reorthonormalize(hol);
    const OrthogonalLog lg = minimal_log(hol);

    BalancedGauge out;
    out.tie_at_pi = lg.tie_at_pi;
    out.alpha = AlgebraElement::from_matrix(lg.log / (2.0 * std::numbers::pi));
    const Eigen::MatrixXd step_alpha = expm(hth * out.alpha.matrix());

    std::vector<Eigen::MatrixXd> flat(static_cast<std::size_t>(g.n_theta));
    flat[0] = Eigen::MatrixXd::Identity(K, K);
    for (int j = 0; j + 1 < g.n_theta; ++j)
        flat[j + 1] = reorthonormalize(U[g.node(mid, j)].transpose() * flat[j] * step_alpha);

    out.s = GaugeTransform(g, K);
    out.A = ConnectionField(g, K);
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            out.s.s[n] = reorthonormalize(s1.s[n] * flat[j]);
            const Eigen::MatrixXd Up = flat[j].transpose() * U[n] * flat[g.wrap(j + 1)];
            out.A.a_theta.vec(n) = coeffs_from_skew(minimal_log(reorthonormalize(Up)).log) / hth;
        }
    // The middle circle is flat by construction; pin it to alpha exactly.
    for (int j = 0; j < g.n_theta; ++j) out.A.a_theta.vec(g.node(mid, j)) = out.alpha.coeffs();
    return out;
}

// ---------------------------------------------------------------------------

HolonomyProbe holonomy_limit_probe(const CircleFamily& family, const std::vector<double>& r_list, double tol) {
    if (r_list.empty()) throw std::invalid_argument("holonomy_limit_probe: empty radius list");
    for (std::size_t k = 0; k < r_list.size(); ++k) {
        if (!(r_list[k] > 0.0)) throw std::invalid_argument("holonomy_limit_probe: radii must be positive");
        if (k > 0 && !(r_list[k] < r_list[k - 1]))
            throw std::invalid_argument("holonomy_limit_probe: radii must be strictly decreasing");
    }
    HolonomyProbe p;
    p.r = r_list;
    for (double r : r_list) p.phases.push_back(circle_holonomy(family(r)).phases);
    p.cauchy_defect.assign(r_list.size(), 0.0);
    for (std::size_t k = 1; k < r_list.size(); ++k) {
        double d = 0.0;
        for (std::size_t m = 0; m < p.phases[k].size(); ++m) d = std::max(d, std::abs(p.phases[k][m] - p.phases[k - 1][m]));
        p.cauchy_defect[k] = d;
    }
    bool monotone = true;
    for (std::size_t k = 2; k < r_list.size(); ++k)
        if (p.cauchy_defect[k] > p.cauchy_defect[k - 1] + 1e-14) monotone = false;
    p.converged = monotone && p.cauchy_defect.back() < tol;
    return p;
}

std::string holonomy_csv(const HolonomyProbe& probe) {
    const std::size_t m = probe.phases.empty() ? 0 : probe.phases.front().size();
    std::string out = "r_or_t";
    for (std::size_t k = 0; k < m; ++k) out += fmt::format(",phase_{}", k + 1);
    out += ",cauchy_defect\n";
    for (std::size_t k = 0; k < probe.r.size(); ++k) {
        out += fmt::format("{:.17g}", probe.r[k]);
        for (double ph : probe.phases[k]) out += fmt::format(",{:.17g}", ph);
        out += fmt::format(",{:.17g}\n", probe.cauchy_defect[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------

FlatnessProfile flatness_profile(const ConnectionField& A, const AlgebraElement& alpha) {
    if (A.max_abs_a_t() > 1e-12) throw std::invalid_argument("flatness_profile: connection is not in temporal gauge");
    const auto& g = A.grid;
    const NodeField dt = d_t(A.a_theta);
    const NodeField dth = d_theta(A.a_theta);
    FlatnessProfile out;
    std::vector<double> x, y;
    for (int i = 0; i < g.n_t; ++i) {
        double w = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            const double v = (A.a_theta.vec(n) - alpha.coeffs()).norm() + dt.vec(n).norm() + dth.vec(n).norm();
            w = std::max(w, v);
        }
        out.t.push_back(g.t(i));
        out.w.push_back(w);
        if (w > 1e-300) {
            x.push_back(std::abs(g.t(i)) - g.T_half);
            y.push_back(std::log(w));
        }
    }
    if (x.size() >= 2) {
        const LinearFit f = fit_line(x, y);
        out.slope = f.slope;
        out.amplitude = std::exp(f.intercept);
        out.r_squared = f.r_squared;
    }
    return out;
}

}  // namespace ymh
