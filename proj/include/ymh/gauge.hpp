#pragma once

#include "ymh/lattice_fields.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ymh {

/// Group-valued node field s(t, theta).
struct GaugeTransform {
    CylinderGrid grid;
    int K = 3;
    std::vector<Eigen::MatrixXd> s;

    GaugeTransform() = default;
    GaugeTransform(const CylinderGrid& g, int K);  ///< identity

    template <class F>
    static GaugeTransform from_function(const CylinderGrid& g, int K, F&& f) {
        GaugeTransform out(g, K);
        for (int i = 0; i < g.n_t; ++i)
            for (int j = 0; j < g.n_theta; ++j) out.s[g.node(i, j)] = maybe_reorthonormalize(f(g.t(i), g.theta(j)));
        return out;
    }
};

/**
 * @brief (s^{-1} ds + s^{-1} A s, s^{-1} u).
 *
 * The Maurer-Cartan term is a central difference of log(s(x)^{-1} s(x + e))
 * at e = 0, with the one-sided t stencil at the ends.
 */
std::pair<ConnectionField, SectionField> apply_gauge(const GaugeTransform& s, const ConnectionField& A,
                                                     const SectionField& u);
ConnectionField apply_gauge(const GaugeTransform& s, const ConnectionField& A);
SectionField apply_gauge(const GaugeTransform& s, const SectionField& u);

struct Holonomy {
    Eigen::MatrixXd matrix;
    std::vector<double> phases;  ///< sorted eigenphases in (-pi, pi]
};

/// Ordered product exp(h a_0) exp(h a_1) ... exp(h a_{n-1}) around one circle.
Holonomy circle_holonomy(const std::vector<AlgebraElement>& a_theta);
Holonomy holonomy(const ConnectionField& A, int t_index);

struct BalancedGauge {
    GaugeTransform s;
    ConnectionField A;
    AlgebraElement alpha;
    bool tie_at_pi = false;
};

/**
 * @brief Balanced temporal gauge.
 *
 * Solves ds/dt + a_t s = 0 from the middle row with RK4 (re-orthonormalizing
 * each step), then flattens the middle circle to the minimal logarithm of its
 * holonomy. Theta components are transformed link by link, so the holonomy of
 * every circle is conjugated exactly.
 */
BalancedGauge balanced_temporal_gauge(const ConnectionField& A);

struct HolonomyProbe {
    std::vector<double> r;
    std::vector<std::vector<double>> phases;
    std::vector<double> cauchy_defect;  ///< defect[k] compares r[k] with r[k-1]; defect[0] = 0
    bool converged = false;
};

using CircleFamily = std::function<std::vector<AlgebraElement>(double r)>;

HolonomyProbe holonomy_limit_probe(const CircleFamily& family, const std::vector<double>& r_list, double tol);

/// Columns (r_or_t, phase_1..phase_m, cauchy_defect).
std::string holonomy_csv(const HolonomyProbe& probe);

struct FlatnessProfile {
    std::vector<double> t;
    std::vector<double> w;
    double slope = 0.0;      ///< fit of log w against |t| - T
    double amplitude = 0.0;  ///< exp(intercept)
    double r_squared = 0.0;
};

FlatnessProfile flatness_profile(const ConnectionField& A, const AlgebraElement& alpha);

}  // namespace ymh
