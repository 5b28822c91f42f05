#include "ymh/lattice_fields.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ymh {

CylinderGrid::CylinderGrid(double T, int nt, int ntheta) : T_half(T), n_t(nt), n_theta(ntheta) {
    if (!(T > 0.0)) throw std::invalid_argument("CylinderGrid: T_half must be positive");
    if (nt < 8 || ntheta < 8) throw std::invalid_argument("CylinderGrid: n_t and n_theta must be at least 8");
}

double CylinderGrid::h_theta() const { return 2.0 * std::numbers::pi / n_theta; }

double CylinderGrid::row_weight(int i) const {
    const double w = (i == 0 || i == n_t - 1) ? 0.5 : 1.0;
    return w * h_t();
}

double CylinderGrid::area() const { return 2.0 * T_half * 2.0 * std::numbers::pi; }

bool CylinderGrid::operator==(const CylinderGrid& o) const {
    return T_half == o.T_half && n_t == o.n_t && n_theta == o.n_theta;
}

TStencil dt_stencil(const CylinderGrid& g, int i) {
    const double h2 = 2.0 * g.h_t();
    const int n = g.n_t;
    if (i == 0) return {{0, 1, 2}, {-3.0 / h2, 4.0 / h2, -1.0 / h2}};
    if (i == n - 1) return {{n - 1, n - 2, n - 3}, {3.0 / h2, -4.0 / h2, 1.0 / h2}};
    return {{i - 1, i + 1, i}, {-1.0 / h2, 1.0 / h2, 0.0}};
}

// ---------------------------------------------------------------------------

ConnectionField::ConnectionField(const CylinderGrid& g, int k)
    : grid(g), K(k), a_t(g, algebra_dim(k)), a_theta(g, algebra_dim(k)) {}

AlgebraElement ConnectionField::at_t(int node) const { return AlgebraElement(K, a_t.vec(node)); }
AlgebraElement ConnectionField::at_theta(int node) const { return AlgebraElement(K, a_theta.vec(node)); }
void ConnectionField::set_t(int node, const AlgebraElement& X) { a_t.vec(node) = X.coeffs(); }
void ConnectionField::set_theta(int node, const AlgebraElement& X) { a_theta.vec(node) = X.coeffs(); }

ConnectionField ConnectionField::constant(const CylinderGrid& g, const AlgebraElement& a) {
    ConnectionField A(g, a.K());
    for (int n = 0; n < g.nodes(); ++n) A.set_theta(n, a);
    return A;
}

double ConnectionField::max_abs_a_t() const {
    double m = 0.0;
    for (double v : a_t.data) m = std::max(m, std::abs(v));
    return m;
}

SectionField::SectionField(const CylinderGrid& g, int k) : grid(g), K(k), u(g, k) {}

void SectionField::renormalize() {
    for (int n = 0; n < grid.nodes(); ++n) {
        auto v = at(n);
        const double r = v.norm();
        if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("SectionField: cannot renormalize a zero or non-finite vector");
        v /= r;
    }
}

double SectionField::max_norm_defect() const {
    double m = 0.0;
    for (int n = 0; n < grid.nodes(); ++n) m = std::max(m, std::abs(at(n).norm() - 1.0));
    return m;
}

// ---------------------------------------------------------------------------

NodeField d_t(const NodeField& f) {
    const auto& g = f.grid;
    NodeField out(g, f.dim);
    for (int i = 0; i < g.n_t; ++i) {
        const TStencil s = dt_stencil(g, i);
        for (int j = 0; j < g.n_theta; ++j) {
            double* o = out.at(g.node(i, j));
            for (int k = 0; k < 3; ++k) {
                const double* src = f.at(g.node(s.row[k], j));
                for (int d = 0; d < f.dim; ++d) o[d] += s.w[k] * src[d];
            }
        }
    }
    return out;
}

NodeField d_theta(const NodeField& f) {
    const auto& g = f.grid;
    NodeField out(g, f.dim);
    const double c = 1.0 / (2.0 * g.h_theta());
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const double* p = f.at(g.node(i, g.wrap(j + 1)));
            const double* q = f.at(g.node(i, g.wrap(j - 1)));
            double* o = out.at(g.node(i, j));
            for (int d = 0; d < f.dim; ++d) o[d] = c * (p[d] - q[d]);
        }
    return out;
}

CovariantDerivative covariant_derivative(const ConnectionField& A, const SectionField& u) {
    if (A.grid != u.grid || A.K != u.K) throw std::invalid_argument("covariant_derivative: grid mismatch");
    CovariantDerivative D{d_t(u.u), d_theta(u.u)};
    std::vector<double> tmp(u.K);
    for (int n = 0; n < u.grid.nodes(); ++n) {
        apply_skew(u.K, A.a_t.at(n), u.u.at(n), tmp.data());
        for (int d = 0; d < u.K; ++d) D.d_t.at(n)[d] += tmp[d];
        apply_skew(u.K, A.a_theta.at(n), u.u.at(n), tmp.data());
        for (int d = 0; d < u.K; ++d) D.d_theta.at(n)[d] += tmp[d];
    }
    return D;
}

NodeField curvature(const ConnectionField& A) {
    NodeField F = d_t(A.a_theta);
    const NodeField dth = d_theta(A.a_t);
    for (int n = 0; n < A.grid.nodes(); ++n) {
        const Eigen::VectorXd br = bracket(A.K, A.a_t.vec(n), A.a_theta.vec(n));
        F.vec(n) += br - dth.vec(n);
    }
    return F;
}

double l2_norm_squared(const NodeField& f, const std::vector<double>* weight) {
    const auto& g = f.grid;
    if (weight) {
        if (static_cast<int>(weight->size()) != g.nodes()) throw std::invalid_argument("l2_norm_squared: weight size mismatch");
        for (double w : *weight)
            if (!(w > 0.0)) throw std::invalid_argument("l2_norm_squared: weight must be positive");
    }
    double total = 0.0;
    for (int i = 0; i < g.n_t; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.n_theta; ++j) {
            const int n = g.node(i, j);
            double s = f.vec(n).squaredNorm();
            if (weight) s *= (*weight)[n];
            row += s;
        }
        total += g.row_weight(i) * g.h_theta() * row;
    }
    return total;
}

double sup_norm(const NodeField& f) {
    double m = 0.0;
    for (int n = 0; n < f.grid.nodes(); ++n) m = std::max(m, f.vec(n).norm());
    return m;
}

double inner_product(const NodeField& a, const NodeField& b) {
    if (a.grid != b.grid || a.dim != b.dim) throw std::invalid_argument("inner_product: field mismatch");
    const auto& g = a.grid;
    double total = 0.0;
    for (int i = 0; i < g.n_t; ++i) {
        double row = 0.0;
        for (int j = 0; j < g.n_theta; ++j) row += a.vec(g.node(i, j)).dot(b.vec(g.node(i, j)));
        total += g.row_weight(i) * g.h_theta() * row;
    }
    return total;
}

NodeField pointwise_norm(const CovariantDerivative& D) {
    NodeField out(D.d_t.grid, 1);
    for (int n = 0; n < out.grid.nodes(); ++n)
        out.at(n)[0] = std::sqrt(D.d_t.vec(n).squaredNorm() + D.d_theta.vec(n).squaredNorm());
    return out;
}

bool under_resolved(const CovariantDerivative& D) {
    const auto& g = D.d_t.grid;
    return sup_norm(pointwise_norm(D)) * std::max(g.h_t(), g.h_theta()) > 0.5;
}

std::string snapshot_csv(const std::vector<std::pair<std::string, const NodeField*>>& columns) {
    if (columns.empty()) throw std::invalid_argument("snapshot_csv: no columns");
    const CylinderGrid& g = columns.front().second->grid;
    std::string out = "it,itheta,t,theta";
    for (const auto& [name, f] : columns) {
        if (f->grid != g) throw std::invalid_argument("snapshot_csv: grid mismatch");
        if (f->dim == 1) out += "," + name;
        else
            for (int d = 0; d < f->dim; ++d) out += fmt::format(",{}_{}", name, d + 1);
    }
    out += "\n";
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            out += fmt::format("{},{},{:.17g},{:.17g}", i, j, g.t(i), g.theta(j));
            for (const auto& col : columns) {
                const double* p = col.second->at(g.node(i, j));
                for (int d = 0; d < col.second->dim; ++d) out += fmt::format(",{:.17g}", p[d]);
            }
            out += "\n";
        }
    return out;
}

}  // namespace ymh
