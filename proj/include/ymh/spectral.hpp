#pragma once

#include "ymh/lie_action.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <vector>

namespace ymh {

/**
 * @brief Twisted circle operator d = D + X on R^K-valued fields.
 *
 * A circle field is stored node-major: entry j*K + d is component d at
 * theta_j. D is the forward difference (u_{j+1} - u_j)/h, which commutes with
 * X, so d is normal and L = d^T d is symmetric non-negative.
 */
struct TwistedOperator {
    AlgebraElement alpha;
    int n_theta = 0;
    Eigen::MatrixXd d;  ///< discrete twisted derivative
    Eigen::MatrixXd L;  ///< d^T d

    double h() const;
    int K() const { return alpha.K(); }
};

TwistedOperator assemble(const AlgebraElement& alpha, int n_theta);

struct SpectralReport {
    std::string alpha_id;
    std::vector<double> eigenvalues;  ///< ascending
    int kernel_dim = 0;
    double sigma_sq = 0.0;
    double poincare_constant = 0.0;
    Eigen::MatrixXd eigenvectors;     ///< columns match eigenvalues; not serialized
};

SpectralReport spectrum(const TwistedOperator& op, double kernel_tol = 1e-9);

/// Orthonormal basis of ker L (eigenvectors below kernel_tol).
Eigen::MatrixXd kernel_basis(const SpectralReport& rep);

struct PoincareResult {
    double lhs = 0.0;  ///< int |d u|^2
    double rhs = 0.0;  ///< C_A int |d^2 u|^2
    bool pass = false;
};

PoincareResult poincare_check(const TwistedOperator& op, const SpectralReport& rep, const Eigen::VectorXd& u);
PoincareResult poincare_check(const TwistedOperator& op, const Eigen::VectorXd& u);

struct DegenerationResult {
    bool degenerating = false;
    int limit_kernel_dim = 0;
    std::vector<int> kernel_dims;
    std::vector<double> containment_angle;   ///< largest principal angle per n
    std::vector<double> poincare_constants;  ///< C_{A_n}
    std::vector<double> alpha_defect;        ///< |alpha_n - alpha_inf|
    double max_tail_poincare = 0.0;
};

DegenerationResult classify_degeneration(const std::vector<AlgebraElement>& alphas, const AlgebraElement& alpha_inf,
                                         int n_theta = 64, double kernel_tol = 1e-9, double angle_tol = 1e-6);

/// {alpha_id, eigenvalues[:m], kernel_dim, sigma_sq, poincare_constant}
nlohmann::json to_json(const SpectralReport& rep, int m = 8);

}  // namespace ymh
