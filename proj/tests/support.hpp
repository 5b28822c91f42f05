#pragma once

// Hand-rolled generators for the property tests. Every draw goes through
// CounterRng so failures reproduce from the printed seed.

#include "ymh/gauge.hpp"
#include "ymh/lattice_fields.hpp"
#include "ymh/numerics.hpp"

#include <cmath>
#include <numbers>

namespace ymh::testing {

inline Eigen::VectorXd random_unit(CounterRng& rng, int K) {
    Eigen::VectorXd v(K);
    for (int d = 0; d < K; ++d) v[d] = rng.normal();
    return v.normalized();
}

inline Eigen::VectorXd random_tangent(CounterRng& rng, const Eigen::VectorXd& y) {
    Eigen::VectorXd v(y.size());
    for (int d = 0; d < y.size(); ++d) v[d] = rng.normal();
    return v - v.dot(y) * y;
}

inline AlgebraElement random_algebra(CounterRng& rng, int K, double scale = 1.0) {
    Eigen::VectorXd c(algebra_dim(K));
    for (int k = 0; k < c.size(); ++k) c[k] = scale * rng.normal();
    return AlgebraElement(K, c);
}

/// Low-mode trigonometric profile in (t, theta), periodic in theta.
struct SmoothProfile {
    double a0, a1, b1, a2, kt, phase;
    double operator()(double t, double th) const {
        return a0 + a1 * std::cos(th + phase) * std::cos(kt * t) + b1 * std::sin(th) * std::sin(0.5 * kt * t) +
               a2 * std::cos(2.0 * th - phase) * std::exp(-0.1 * t * t);
    }
};

inline SmoothProfile random_profile(CounterRng& rng, double amp = 1.0) {
    return {amp * rng.normal(), amp * rng.normal(), amp * rng.normal(), 0.5 * amp * rng.normal(), rng.uniform(0.2, 1.2),
            rng.uniform(0.0, 2.0 * std::numbers::pi)};
}

/// Smooth section: normalize(e_3 + small smooth perturbation).
inline SectionField random_section(CounterRng& rng, const CylinderGrid& g, double amp = 0.6) {
    const SmoothProfile p0 = random_profile(rng, amp), p1 = random_profile(rng, amp), p2 = random_profile(rng, amp);
    return SectionField::from_function(g, 3, [&](double t, double th) {
        Eigen::VectorXd y(3);
        y << p0(t, th), p1(t, th), 1.5 + 0.3 * p2(t, th);
        return y;
    });
}

/// S^1-valued gauge s = exp(phi J_z) with phi = p(t, theta) + theta: winding
/// number one, so the Maurer-Cartan term is not small.
struct CircleGauge {
    SmoothProfile p;
    explicit CircleGauge(CounterRng& rng, double amp = 0.5) : p(random_profile(rng, amp)) {}
    GaugeTransform on(const CylinderGrid& g) const {
        return GaugeTransform::from_function(
            g, 3, [&](double t, double th) { return expm(((p(t, th) + th) * J_z()).matrix()); });
    }
};

/// Smooth so(3)-valued connection.
inline ConnectionField random_connection(CounterRng& rng, const CylinderGrid& g, double amp = 0.4) {
    ConnectionField A(g, 3);
    std::vector<SmoothProfile> pt, pth;
    for (int k = 0; k < 3; ++k) {
        pt.push_back(random_profile(rng, amp));
        pth.push_back(random_profile(rng, amp));
    }
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j)
            for (int k = 0; k < 3; ++k) {
                A.a_t.at(g.node(i, j))[k] = pt[k](g.t(i), g.theta(j));
                A.a_theta.at(g.node(i, j))[k] = pth[k](g.t(i), g.theta(j));
            }
    return A;
}

}  // namespace ymh::testing
