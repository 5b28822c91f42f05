#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ymh {

/// Number of strict-upper coefficients of a K x K skew matrix.
inline int algebra_dim(int K) { return K * (K - 1) / 2; }

/**
 * @brief Element of so(K), stored by its strict upper triangle.
 *
 * Coefficient c_k belongs to the pair (p,q), p<q, in row-major order and
 * multiplies E_k = e_p e_q^T - e_q e_p^T. The inner product is
 * <X,Y> = -tr(XY)/2, so the coefficients are orthonormal and |J_z| = 1.
 */
class AlgebraElement {
public:
    AlgebraElement() = default;
    explicit AlgebraElement(int K);
    AlgebraElement(int K, Eigen::VectorXd coeffs);

    /// Reads the strict upper triangle; the lower triangle is ignored.
    static AlgebraElement from_matrix(const Eigen::MatrixXd& m);

    int K() const { return K_; }
    const Eigen::VectorXd& coeffs() const { return c_; }
    Eigen::VectorXd& coeffs() { return c_; }

    Eigen::MatrixXd matrix() const;
    double norm() const { return c_.norm(); }
    double frobenius_norm() const { return std::sqrt(2.0) * c_.norm(); }

    AlgebraElement operator+(const AlgebraElement& o) const;
    AlgebraElement operator-(const AlgebraElement& o) const;
    AlgebraElement operator*(double s) const;

private:
    int K_ = 0;
    Eigen::VectorXd c_;
};

AlgebraElement operator*(double s, const AlgebraElement& X);

/// Orthogonal K x K matrix with drift control.
class GroupElement {
public:
    GroupElement() = default;
    explicit GroupElement(Eigen::MatrixXd m);
    static GroupElement identity(int K);

    const Eigen::MatrixXd& matrix() const { return m_; }
    int K() const { return static_cast<int>(m_.rows()); }
    GroupElement inverse() const;
    GroupElement operator*(const GroupElement& o) const;
    double orthogonality_drift() const;

private:
    Eigen::MatrixXd m_;
};

/// Polar-factor re-orthonormalization via SVD.
Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& m);
/// Re-orthonormalizes only when the drift exceeds 1e-12.
Eigen::MatrixXd maybe_reorthonormalize(const Eigen::MatrixXd& m);
double orthogonality_drift(const Eigen::MatrixXd& m);

// Coefficient-level helpers used by the lattice code.
Eigen::MatrixXd skew_from_coeffs(int K, const double* c);
Eigen::VectorXd coeffs_from_skew(const Eigen::MatrixXd& m);
/// out = X(c) * y
void apply_skew(int K, const double* c, const double* y, double* out);
/// Coefficients of [X(a), X(b)].
Eigen::VectorXd bracket(int K, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Matrix exponential (Pade scaling and squaring).
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);
GroupElement exp_algebra(const AlgebraElement& X, double scale = 1.0);

struct OrthogonalLog {
    Eigen::MatrixXd log;          ///< skew matrix L with exp(L) = R
    std::vector<double> phases;   ///< eigenphases of R in (-pi, pi], sorted
    bool tie_at_pi = false;       ///< some eigenphase hit pi exactly
};

/// Minimal logarithm of an orthogonal matrix via real Schur form.
OrthogonalLog minimal_log(const Eigen::MatrixXd& R, double tie_tol = 1e-10);

enum class ManifoldKind { unit_sphere };

/**
 * @brief Moment map in generator coordinates.
 *
 * value(y) has one entry per generator; gradient(y) is the K x n_gen
 * matrix of ambient gradients.
 */
struct MomentMap {
    std::string name;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> gradient;
};

/// J_y acting on tangent vectors at y.
using ComplexStructure = std::function<Eigen::VectorXd(const Eigen::VectorXd& y, const Eigen::VectorXd& v)>;

struct ActionSpec {
    int K = 3;
    ManifoldKind manifold_kind = ManifoldKind::unit_sphere;
    std::vector<AlgebraElement> generators;
    Eigen::VectorXd center_c;
    std::string moment_map_name;
    std::optional<MomentMap> moment_map;
    std::optional<ComplexStructure> complex_structure;

    int n_generators() const { return static_cast<int>(generators.size()); }
};

/// Looks up a registered moment map; throws if the name is unknown.
MomentMap lookup_moment_map(const std::string& name, const ActionSpec& spec);

/// J_y v = v x y on S^2, so that v . J w is the area form.
Eigen::VectorXd sphere_complex_structure(const Eigen::VectorXd& y, const Eigen::VectorXd& v);

/// Rotation generator about the given axis of R^3.
AlgebraElement so3_generator(int axis);
inline AlgebraElement J_z() { return so3_generator(2); }

/// S^1 acting on S^2 by rotation about e_3, height moment map, c given.
ActionSpec circle_on_sphere(double c = 0.0);

Eigen::VectorXd infinitesimal_action(const AlgebraElement& X, const Eigen::VectorXd& y);
Eigen::VectorXd tangent_project(const Eigen::VectorXd& y, const Eigen::VectorXd& v);
Eigen::VectorXd second_fundamental_form(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& w);
Eigen::VectorXd moment_value(const ActionSpec& spec, const Eigen::VectorXd& y);

/// Coefficients of X in the orthonormalized generator span, as an element.
AlgebraElement project_to_span(const ActionSpec& spec, const AlgebraElement& X);
/// Orthonormal basis (columns, coefficient space) of the generator span.
Eigen::MatrixXd generator_basis(const ActionSpec& spec);
/// Expresses X in generator coordinates (least squares).
Eigen::VectorXd generator_coordinates(const ActionSpec& spec, const AlgebraElement& X);

enum class ElementClass { critical, non_critical };
std::string to_string(ElementClass c);

/// Orthonormal basis of {y : M y = 0} using singular values below tol.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, double tol);
/// Largest principal angle between two subspaces (pi/2 when dims differ).
double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

ElementClass classify_element(const ActionSpec& spec, const AlgebraElement& X, double tol = 1e-8);

nlohmann::json to_json(const ActionSpec& spec);
ActionSpec action_spec_from_json(const nlohmann::json& j);

}  // namespace ymh
