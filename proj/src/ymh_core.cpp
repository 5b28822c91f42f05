#include "ymh/ymh_core.hpp"

#include <fmt/format.h>

#include <cmath>

namespace ymh {

WeightProfile WeightProfile::constant(const CylinderGrid& g, double value) {
    WeightProfile w;
    w.lambda.assign(static_cast<std::size_t>(g.n_t), value);
    w.T_half = g.T_half;
    return w;
}

void WeightProfile::validate(const CylinderGrid& g) const {
    if (static_cast<int>(lambda.size()) != g.n_t) throw std::invalid_argument("WeightProfile: one lambda per t-row required");
    for (double l : lambda)
        if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("WeightProfile: lambda must be positive");
}

namespace {

struct Gradient {
    NodeField u, at, ath;  // raw partial derivatives
};

void check_inputs(const ConnectionField& A, const SectionField& u, const WeightProfile& w, const ActionSpec& spec) {
    if (A.grid != u.grid || A.K != u.K || spec.K != u.K) throw std::invalid_argument("ymh: grid or dimension mismatch");
    w.validate(u.grid);
}

EnergyTerms evaluate(const ConnectionField& A, const SectionField& u, const WeightProfile& w, const ActionSpec& spec,
                     Gradient* grad) {
    const CylinderGrid& g = u.grid;
    const int K = u.K;
    const int m = algebra_dim(K);
    const CovariantDerivative D = covariant_derivative(A, u);
    const NodeField F = curvature(A);
    const bool has_mu = spec.moment_map.has_value();
    const double hth = g.h_theta();
    const double c2 = 1.0 / (2.0 * hth);

    if (grad) {
        grad->u = NodeField(g, K);
        grad->at = NodeField(g, m);
        grad->ath = NodeField(g, m);
    }

    EnergyTerms e;
    std::vector<double> tmp(K);
    for (int i = 0; i < g.n_t; ++i) {
        const double W = g.row_weight(i) * hth;
        const double lam2 = w.lambda[i] * w.lambda[i];
        const TStencil st = dt_stencil(g, i);
        double row_du = 0.0, row_ym = 0.0, row_h = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            const double* Dt = D.d_t.at(n);
            const double* Dth = D.d_theta.at(n);
            const double* f = F.at(n);
            double sdu = 0.0, sf = 0.0;
            for (int d = 0; d < K; ++d) sdu += Dt[d] * Dt[d] + Dth[d] * Dth[d];
            for (int k = 0; k < m; ++k) sf += f[k] * f[k];
            row_du += sdu;
            row_ym += sf / lam2;
            Eigen::VectorXd mu_minus_c;
            if (has_mu) {
                mu_minus_c = spec.moment_map->value(u.at(n)) - spec.center_c;
                row_h += lam2 * mu_minus_c.squaredNorm();
            }
            if (!grad) continue;

            const double* un = u.u.at(n);
            // Dirichlet part.
            for (int k = 0; k < 3; ++k) {
                if (st.w[k] == 0.0) continue;
                double* gr = grad->u.at(g.node(st.row[k], j));
                for (int d = 0; d < K; ++d) gr[d] += 2.0 * W * st.w[k] * Dt[d];
            }
            {
                double* gp = grad->u.at(g.node(i, g.wrap(j + 1)));
                double* gm = grad->u.at(g.node(i, g.wrap(j - 1)));
                for (int d = 0; d < K; ++d) {
                    gp[d] += 2.0 * W * c2 * Dth[d];
                    gm[d] -= 2.0 * W * c2 * Dth[d];
                }
            }
            double* gu = grad->u.at(n);
            apply_skew(K, A.a_t.at(n), Dt, tmp.data());
            for (int d = 0; d < K; ++d) gu[d] -= 2.0 * W * tmp[d];
            apply_skew(K, A.a_theta.at(n), Dth, tmp.data());
            for (int d = 0; d < K; ++d) gu[d] -= 2.0 * W * tmp[d];
            {
                double* gat = grad->at.at(n);
                double* gath = grad->ath.at(n);
                int k = 0;
                for (int p = 0; p < K; ++p)
                    for (int q = p + 1; q < K; ++q, ++k) {
                        gat[k] += 2.0 * W * (Dt[p] * un[q] - Dt[q] * un[p]);
                        gath[k] += 2.0 * W * (Dth[p] * un[q] - Dth[q] * un[p]);
                    }
            }
            // Yang-Mills part.
            if (sf > 0.0) {
                const Eigen::VectorXd GF = (2.0 * W / lam2) * F.vec(n);
                for (int k = 0; k < 3; ++k) {
                    if (st.w[k] == 0.0) continue;
                    grad->ath.vec(g.node(st.row[k], j)) += st.w[k] * GF;
                }
                grad->at.vec(g.node(i, g.wrap(j + 1))) -= c2 * GF;
                grad->at.vec(g.node(i, g.wrap(j - 1))) += c2 * GF;
                const Eigen::Map<const Eigen::VectorXd> at(A.a_t.at(n), m);
                const Eigen::Map<const Eigen::VectorXd> ath(A.a_theta.at(n), m);
                grad->ath.vec(n) += bracket(K, GF, at);
                grad->at.vec(n) += bracket(K, ath, GF);
            }
            // Higgs part.
            if (has_mu) {
                const Eigen::MatrixXd Gm = spec.moment_map->gradient(u.at(n));
                grad->u.vec(n) += (2.0 * W * lam2) * (Gm * mu_minus_c);
            }
        }
        e.energy_term += g.row_weight(i) * hth * row_du;
        e.yang_mills_term += g.row_weight(i) * hth * row_ym;
        e.higgs_term += g.row_weight(i) * hth * row_h;
    }
    e.total = e.energy_term + e.yang_mills_term + e.higgs_term;
    return e;
}

ElResidual to_residual(const Gradient& gr, const SectionField& u, const ActionSpec& spec) {
    const CylinderGrid& g = u.grid;
    ElResidual r{NodeField(g, u.K), NodeField(g, gr.at.dim), NodeField(g, gr.at.dim)};
    const Eigen::MatrixXd B = generator_basis(spec);
    const Eigen::MatrixXd P = B * B.transpose();
    for (int i = 0; i < g.n_t; ++i) {
        const double W = g.row_weight(i) * g.h_theta();
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            const auto y = u.at(n);
            const Eigen::VectorXd gu = gr.u.vec(n);
            r.section.vec(n) = (gu - gu.dot(y) * y) / W;
            r.connection_t.vec(n) = P * gr.at.vec(n) / W;
            r.connection_theta.vec(n) = P * gr.ath.vec(n) / W;
        }
    }
    return r;
}

}  // namespace

EnergyTerms ymh_energy(const ConnectionField& A, const SectionField& u, const WeightProfile& w, const ActionSpec& spec) {
    check_inputs(A, u, w, spec);
    return evaluate(A, u, w, spec, nullptr);
}

ElResidual el_residual(const ConnectionField& A, const SectionField& u, const WeightProfile& w, const ActionSpec& spec) {
    check_inputs(A, u, w, spec);
    if (u.max_norm_defect() > 1e-8) throw std::domain_error("el_residual: section is off the sphere");
    Gradient gr;
    evaluate(A, u, w, spec, &gr);
    return to_residual(gr, u, spec);
}

// ---------------------------------------------------------------------------

namespace {

struct State {
    ConnectionField A;
    SectionField u;
};

double sup_rows(const NodeField& f, int lo, int hi) {
    double m = 0.0;
    for (int i = lo; i <= hi; ++i)
        for (int j = 0; j < f.grid.n_theta; ++j) m = std::max(m, f.vec(f.grid.node(i, j)).norm());
    return m;
}

}  // namespace

SolveResult gradient_flow_solve(const ConnectionField& A0, const SectionField& u0, const WeightProfile& w,
                                const ActionSpec& spec, const SolverOptions& opts) {
    check_inputs(A0, u0, w, spec);
    const CylinderGrid& g = u0.grid;
    const bool fixed = opts.boundary == BoundaryMode::fixed;
    const int lo = fixed ? 1 : 0;
    const int hi = fixed ? g.n_t - 2 : g.n_t - 1;
    const double hth = g.h_theta();

    // Diagonal preconditioner for the connection: min(1, lambda^2) per row.
    std::vector<double> pre(static_cast<std::size_t>(g.n_t));
    for (int i = 0; i < g.n_t; ++i) pre[i] = std::min(1.0, w.lambda[i] * w.lambda[i]);

    State x{A0, u0};
    x.u.renormalize();

    auto gradient_at = [&](const State& s, EnergyTerms& e) {
        Gradient gr;
        e = evaluate(s.A, s.u, w, spec, &gr);
        ElResidual r = to_residual(gr, s.u, spec);
        for (int i = 0; i < g.n_t; ++i) {
            const bool frozen_row = i < lo || i > hi;
            for (int j = 0; j < g.n_theta; ++j) {
                const int n = g.node(i, j);
                if (frozen_row || !opts.update_section) r.section.vec(n).setZero();
                if (frozen_row || !opts.update_connection) {
                    r.connection_t.vec(n).setZero();
                    r.connection_theta.vec(n).setZero();
                }
            }
        }
        return r;
    };

    // L2 pairing with the connection preconditioner applied to b when `precond`.
    auto pair = [&](const ElResidual& a, const ElResidual& b, bool precond) {
        double s = 0.0;
        for (int i = 0; i < g.n_t; ++i) {
            const double W = g.row_weight(i) * hth;
            const double p = precond ? pre[i] : 1.0;
            for (int j = 0; j < g.n_theta; ++j) {
                const int n = g.node(i, j);
                s += W * (a.section.vec(n).dot(b.section.vec(n)) + p * a.connection_t.vec(n).dot(b.connection_t.vec(n)) +
                          p * a.connection_theta.vec(n).dot(b.connection_theta.vec(n)));
            }
        }
        return s;
    };

    auto advance = [&](const State& s, const ElResidual& r, double tau) {
        State out = s;
        for (int i = lo; i <= hi; ++i) {
            for (int j = 0; j < g.n_theta; ++j) {
                const int n = g.node(i, j);
                out.u.at(n) -= tau * r.section.vec(n);
                out.A.a_t.vec(n) -= tau * pre[i] * r.connection_t.vec(n);
                out.A.a_theta.vec(n) -= tau * pre[i] * r.connection_theta.vec(n);
            }
        }
        out.u.renormalize();
        return out;
    };

    SolveResult res;
    EnergyTerms e;
    ElResidual r = gradient_at(x, e);
    double tau = opts.step;
    double last_step = 0.0;
    for (int it = 0;; ++it) {
        TraceRow row;
        row.iter = it;
        row.energy = e;
        row.res_u = sup_rows(r.section, 0, g.n_t - 1);
        row.res_A = std::max(sup_rows(r.connection_t, 0, g.n_t - 1), sup_rows(r.connection_theta, 0, g.n_t - 1));
        row.step = last_step;
        res.trace.push_back(row);
        if (row.res_u < opts.tol && row.res_A < opts.tol) {
            res.converged = true;
            res.iterations = it;
            break;
        }
        if (it >= opts.max_iters) {
            res.iterations = it;
            break;
        }
        const double slope = pair(r, r, true);
        const double slack = 1e-12 * std::max(1.0, std::abs(e.total));
        State trial;
        EnergyTerms et;
        while (true) {
            trial = advance(x, r, tau);
            et = ymh_energy(trial.A, trial.u, w, spec);
            if (!std::isfinite(et.total))
                throw SolverError(SolverError::Kind::divergence, fmt::format("gradient_flow_solve: non-finite energy at iteration {}", it));
            if (et.total <= e.total - opts.armijo * tau * slope + slack) break;
            tau *= 0.5;
            if (tau < opts.min_step)
                throw SolverError(SolverError::Kind::step_collapse,
                                  fmt::format("gradient_flow_solve: line search collapsed at iteration {}", it));
        }
        if (et.total > e.total + slack)
            throw SolverError(SolverError::Kind::divergence, fmt::format("gradient_flow_solve: energy increased at iteration {}", it));
        EnergyTerms en;
        ElResidual rn = gradient_at(trial, en);
        last_step = tau;
        double next = 2.0 * tau;
        if (opts.barzilai_borwein) {
            // s = x_new - x, y = r_new - r, BB1 step <s, P^{-1} s> / <s, y>.
            double ss = 0.0, sy = 0.0;
            for (int i = lo; i <= hi; ++i) {
                const double W = g.row_weight(i) * hth;
                for (int j = 0; j < g.n_theta; ++j) {
                    const int n = g.node(i, j);
                    const Eigen::VectorXd su = trial.u.at(n) - x.u.at(n);
                    const Eigen::VectorXd yu = rn.section.vec(n) - r.section.vec(n);
                    ss += W * su.squaredNorm();
                    sy += W * su.dot(yu);
                    const Eigen::VectorXd st = trial.A.a_t.vec(n) - x.A.a_t.vec(n);
                    const Eigen::VectorXd sth = trial.A.a_theta.vec(n) - x.A.a_theta.vec(n);
                    ss += W * (st.squaredNorm() + sth.squaredNorm()) / pre[i];
                    sy += W * (st.dot(rn.connection_t.vec(n) - r.connection_t.vec(n)) +
                               sth.dot(rn.connection_theta.vec(n) - r.connection_theta.vec(n)));
                }
            }
            if (sy > 0.0 && std::isfinite(ss / sy)) next = std::clamp(ss / sy, 1e-3 * tau, 1e3 * tau);
        }
        tau = std::max(next, opts.min_step * 4.0);
        x = std::move(trial);
        e = en;
        r = std::move(rn);
    }
    res.A = std::move(x.A);
    res.u = std::move(x.u);
    return res;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::string out = "iter,energy,e_term,ym_term,higgs_term,res_u,res_A,step\n";
    for (const auto& r : trace)
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.iter, r.energy.total,
                           r.energy.energy_term, r.energy.yang_mills_term, r.energy.higgs_term, r.res_u, r.res_A, r.step);
    return out;
}

NodeField vortex_residual(const ConnectionField& A, const SectionField& u, const ActionSpec& spec) {
    if (!spec.complex_structure) throw std::invalid_argument("vortex_residual: action has no complex structure");
    const CovariantDerivative D = covariant_derivative(A, u);
    NodeField out(u.grid, u.K);
    for (int n = 0; n < u.grid.nodes(); ++n)
        out.vec(n) = D.d_t.vec(n) + (*spec.complex_structure)(u.at(n), D.d_theta.vec(n));
    return out;
}

std::vector<double> forcing_l1_profile(const SectionField& u, const AlgebraElement& alpha) {
    const CylinderGrid& g = u.grid;
    const double ht2 = 1.0 / (g.h_t() * g.h_t());
    const double hth = g.h_theta();
    const double hth2 = 1.0 / (hth * hth);
    const Eigen::MatrixXd X = alpha.matrix();
    const Eigen::MatrixXd X2 = X * X;
    std::vector<double> out(static_cast<std::size_t>(g.n_t), 0.0);
    for (int i = 1; i + 1 < g.n_t; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const Eigen::VectorXd y = u.at(g.node(i, j));
            const Eigen::VectorXd up = u.at(g.node(i + 1, j)), um = u.at(g.node(i - 1, j));
            const Eigen::VectorXd vp = u.at(g.node(i, g.wrap(j + 1))), vm = u.at(g.node(i, g.wrap(j - 1)));
            Eigen::VectorXd f = (up - 2.0 * y + um) * ht2 + (vp - 2.0 * y + vm) * hth2 + X * (vp - vm) / hth + X2 * y;
            f -= f.dot(y) * y;
            row += hth * f.norm();
        }
        out[i] = row;
    }
    return out;
}

}  // namespace ymh
