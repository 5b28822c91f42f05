#pragma once

#include "ymh/lie_action.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ymh {

/**
 * @brief Uniform grid on [-T, T] x S^1.
 *
 * The t-nodes include both boundary circles, so h_t = 2T / (n_t - 1).
 * Nodes are stored row-major: node(i, j) = i * n_theta + j.
 */
struct CylinderGrid {
    double T_half = 1.0;
    int n_t = 8;
    int n_theta = 8;

    CylinderGrid() = default;
    CylinderGrid(double T, int nt, int ntheta);

    double h_t() const { return 2.0 * T_half / (n_t - 1); }
    double h_theta() const;
    double t(int i) const { return -T_half + i * h_t(); }
    double theta(int j) const { return j * h_theta(); }
    int node(int i, int j) const { return i * n_theta + j; }
    int nodes() const { return n_t * n_theta; }
    int wrap(int j) const { return ((j % n_theta) + n_theta) % n_theta; }
    /// Trapezoid weight of row i times h_t.
    double row_weight(int i) const;
    /// Row at (or just below) t = 0.
    int middle_row() const { return (n_t - 1) / 2; }
    double area() const;

    bool operator==(const CylinderGrid& o) const;
    bool operator!=(const CylinderGrid& o) const { return !(*this == o); }
};

/// Three-point first-derivative stencil in t for row i.
struct TStencil {
    int row[3];
    double w[3];
};
TStencil dt_stencil(const CylinderGrid& g, int i);

/// Per-node array of `dim` doubles.
struct NodeField {
    CylinderGrid grid;
    int dim = 1;
    std::vector<double> data;

    NodeField() = default;
    NodeField(const CylinderGrid& g, int d) : grid(g), dim(d), data(static_cast<std::size_t>(g.nodes()) * d, 0.0) {}

    double* at(int node) { return data.data() + static_cast<std::size_t>(node) * dim; }
    const double* at(int node) const { return data.data() + static_cast<std::size_t>(node) * dim; }
    Eigen::Map<Eigen::VectorXd> vec(int node) { return {at(node), dim}; }
    Eigen::Map<const Eigen::VectorXd> vec(int node) const { return {at(node), dim}; }
};

/// Algebra-valued connection a_t dt + a_theta dtheta, stored as so(K) coefficients.
struct ConnectionField {
    CylinderGrid grid;
    int K = 3;
    NodeField a_t;
    NodeField a_theta;

    ConnectionField() = default;
    ConnectionField(const CylinderGrid& g, int K);

    int m() const { return algebra_dim(K); }
    AlgebraElement at_t(int node) const;
    AlgebraElement at_theta(int node) const;
    void set_t(int node, const AlgebraElement& X);
    void set_theta(int node, const AlgebraElement& X);

    static ConnectionField constant(const CylinderGrid& g, const AlgebraElement& a_theta);
    double max_abs_a_t() const;
};

/// Section u with values on the unit sphere of R^K.
struct SectionField {
    CylinderGrid grid;
    int K = 3;
    NodeField u;

    SectionField() = default;
    SectionField(const CylinderGrid& g, int K);

    Eigen::Map<Eigen::VectorXd> at(int node) { return u.vec(node); }
    Eigen::Map<const Eigen::VectorXd> at(int node) const { return u.vec(node); }
    void renormalize();
    double max_norm_defect() const;

    template <class F>
    static SectionField from_function(const CylinderGrid& g, int K, F&& f) {
        SectionField s(g, K);
        for (int i = 0; i < g.n_t; ++i)
            for (int j = 0; j < g.n_theta; ++j) s.at(g.node(i, j)) = f(g.t(i), g.theta(j));
        s.renormalize();
        return s;
    }
};

struct CovariantDerivative {
    NodeField d_t;
    NodeField d_theta;
};

/// Central first derivatives of a node field (one-sided second order at the t ends).
NodeField d_t(const NodeField& f);
NodeField d_theta(const NodeField& f);

CovariantDerivative covariant_derivative(const ConnectionField& A, const SectionField& u);

/// F = d_t a_theta - d_theta a_t + [a_t, a_theta] per node, as coefficients.
NodeField curvature(const ConnectionField& A);

/// Trapezoid in t, rectangle in theta; weight must be positive if supplied.
double l2_norm_squared(const NodeField& f, const std::vector<double>* weight = nullptr);
double sup_norm(const NodeField& f);
double inner_product(const NodeField& a, const NodeField& b);

/// Pointwise |D_t u|^2 + |D_theta u|^2 combined into a scalar field of norms.
NodeField pointwise_norm(const CovariantDerivative& D);

/// True when sup|Du| * max(h_t, h_theta) exceeds 0.5.
bool under_resolved(const CovariantDerivative& D);

/// CSV with header "it,itheta,t,theta,<names>" and one row per node.
std::string snapshot_csv(const std::vector<std::pair<std::string, const NodeField*>>& columns);

}  // namespace ymh
