#pragma once

#include "ymh/lie_action.hpp"

#include <string>
#include <vector>

namespace ymh {

struct CurveState {
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;
    double s = 0.0;
};

struct Trajectory {
    std::vector<double> s;
    std::vector<Eigen::VectorXd> x;
    std::vector<Eigen::VectorXd> v;
    std::vector<double> invariant;  ///< |v|^2, H, or h depending on the flow
    double drift_per_unit_s = 0.0;  ///< max |I(s) - I(0)| / s_max
};

/// Sphere geodesic by RK4 with projection after each step.
Trajectory twisted_geodesic_integrate(const CurveState& start, const AlgebraElement& alpha, double s_max, double h_s);

/// u(s_k, theta_j) = exp(-theta_j X) gamma(s_k), row-major in (k, j).
std::vector<Eigen::VectorXd> twisted_surface(const Trajectory& traj, const AlgebraElement& alpha, int n_theta);

/**
 * @brief (gamma'' + kappa^2 beta^2 gamma)^T = 0 on the sphere.
 *
 * Conserved: H = |gamma'|^2 + <gamma, kappa^2 beta^2 gamma>. Throws when the
 * drift of H per unit s exceeds drift_bound.
 */
Trajectory neumann_integrate(const CurveState& start, double kappa, const AlgebraElement& beta, double s_max,
                             double h_s, double drift_bound = 1e-8);

/// gamma' = kappa grad h with h = <mu, beta>; invariant column holds h.
/// Steps that would lower h (roundoff at a critical point) are rejected.
Trajectory hamiltonian_gradient_line(const Eigen::VectorXd& start, double kappa, const AlgebraElement& beta,
                                     const ActionSpec& spec, double s_max, double h_s);

/// Tangent gradient of h = <mu(y), beta> at y.
Eigen::VectorXd hamiltonian_gradient(const ActionSpec& spec, const AlgebraElement& beta, const Eigen::VectorXd& y);

/// max over samples of |beta gamma - J grad h(gamma)|.
double moment_identity_defect(const Trajectory& traj, const AlgebraElement& beta, const ActionSpec& spec);

/// True when the invariant never decreases between consecutive samples.
bool non_decreasing(const std::vector<double>& values);

/// max |(v'' + kappa^2 beta^2 v)^T| over interior samples of a uniformly sampled curve.
double neumann_residual(const std::vector<Eigen::VectorXd>& curve, double h_s, double kappa, const AlgebraElement& beta);

/// Columns (s, x_1..x_K, v_1..v_K, invariant).
std::string trajectory_csv(const Trajectory& traj);

}  // namespace ymh
