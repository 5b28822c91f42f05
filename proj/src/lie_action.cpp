#include "ymh/lie_action.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ymh {

AlgebraElement::AlgebraElement(int K) : K_(K), c_(Eigen::VectorXd::Zero(algebra_dim(K))) {}

AlgebraElement::AlgebraElement(int K, Eigen::VectorXd coeffs) : K_(K), c_(std::move(coeffs)) {
    if (c_.size() != algebra_dim(K)) throw std::invalid_argument("AlgebraElement: coefficient count does not match K");
}

AlgebraElement AlgebraElement::from_matrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("AlgebraElement: matrix must be square");
    return AlgebraElement(static_cast<int>(m.rows()), coeffs_from_skew(m));
}

Eigen::MatrixXd AlgebraElement::matrix() const { return skew_from_coeffs(K_, c_.data()); }

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
    if (o.K_ != K_) throw std::invalid_argument("AlgebraElement: dimension mismatch");
    return AlgebraElement(K_, c_ + o.c_);
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const {
    if (o.K_ != K_) throw std::invalid_argument("AlgebraElement: dimension mismatch");
    return AlgebraElement(K_, c_ - o.c_);
}

AlgebraElement AlgebraElement::operator*(double s) const { return AlgebraElement(K_, s * c_); }

AlgebraElement operator*(double s, const AlgebraElement& X) { return X * s; }

// ---------------------------------------------------------------------------

double orthogonality_drift(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd e = m.transpose() * m - Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return e.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

Eigen::MatrixXd maybe_reorthonormalize(const Eigen::MatrixXd& m) {
    if (orthogonality_drift(m) > 1e-12) return reorthonormalize(m);
    return m;
}

GroupElement::GroupElement(Eigen::MatrixXd m) : m_(maybe_reorthonormalize(m)) {}

GroupElement GroupElement::identity(int K) { return GroupElement(Eigen::MatrixXd::Identity(K, K)); }

GroupElement GroupElement::inverse() const { return GroupElement(m_.transpose()); }

GroupElement GroupElement::operator*(const GroupElement& o) const { return GroupElement(m_ * o.m_); }

double GroupElement::orthogonality_drift() const { return ymh::orthogonality_drift(m_); }

// ---------------------------------------------------------------------------

Eigen::MatrixXd skew_from_coeffs(int K, const double* c) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(K, K);
    int k = 0;
    for (int p = 0; p < K; ++p)
        for (int q = p + 1; q < K; ++q, ++k) {
            m(p, q) = c[k];
            m(q, p) = -c[k];
        }
    return m;
}

Eigen::VectorXd coeffs_from_skew(const Eigen::MatrixXd& m) {
    const int K = static_cast<int>(m.rows());
    Eigen::VectorXd c(algebra_dim(K));
    int k = 0;
    for (int p = 0; p < K; ++p)
        for (int q = p + 1; q < K; ++q, ++k) c[k] = m(p, q);
    return c;
}

void apply_skew(int K, const double* c, const double* y, double* out) {
    for (int i = 0; i < K; ++i) out[i] = 0.0;
    int k = 0;
    for (int p = 0; p < K; ++p)
        for (int q = p + 1; q < K; ++q, ++k) {
            out[p] += c[k] * y[q];
            out[q] -= c[k] * y[p];
        }
}

Eigen::VectorXd bracket(int K, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (K == 3) {
        // so(3) coefficients (c01, c02, c12) correspond to the axis (-c12, c02, -c01).
        const Eigen::Vector3d x(-a[2], a[1], -a[0]);
        const Eigen::Vector3d y(-b[2], b[1], -b[0]);
        const Eigen::Vector3d z = x.cross(y);
        return Eigen::Vector3d(-z[2], z[1], -z[0]);
    }
    const Eigen::MatrixXd A = skew_from_coeffs(K, a.data());
    const Eigen::MatrixXd B = skew_from_coeffs(K, b.data());
    return coeffs_from_skew(A * B - B * A);
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd r = m.exp();
    return r;
}

GroupElement exp_algebra(const AlgebraElement& X, double scale) {
    return GroupElement(expm(scale * X.matrix()));
}

OrthogonalLog minimal_log(const Eigen::MatrixXd& R, double tie_tol) {
    const int K = static_cast<int>(R.rows());
    OrthogonalLog out;
    out.log = Eigen::MatrixXd::Zero(K, K);
    Eigen::RealSchur<Eigen::MatrixXd> schur(R);
    const Eigen::MatrixXd& T = schur.matrixT();
    const Eigen::MatrixXd& Q = schur.matrixU();
    const double pi = std::numbers::pi;
    std::vector<int> minus_one;
    int i = 0;
    while (i < K) {
        if (i + 1 < K && std::abs(T(i + 1, i)) > 0.0) {
            const double a = 0.5 * (T(i, i) + T(i + 1, i + 1));
            const double s = 0.5 * (T(i + 1, i) - T(i, i + 1));
            double phi = std::atan2(s, a);
            if (std::abs(std::abs(phi) - pi) <= tie_tol) {
                phi = pi;
                out.tie_at_pi = true;
            }
            const Eigen::VectorXd qi = Q.col(i), qj = Q.col(i + 1);
            out.log += phi * (qj * qi.transpose() - qi * qj.transpose());
            out.phases.push_back(phi);
            out.phases.push_back(-phi == -pi ? pi : -phi);
            i += 2;
        } else {
            if (T(i, i) < 0.0) minus_one.push_back(i);
            else out.phases.push_back(0.0);
            i += 1;
        }
    }
    if (minus_one.size() % 2 != 0) throw std::domain_error("minimal_log: matrix is not in SO(K)");
    for (std::size_t k = 0; k < minus_one.size(); k += 2) {
        const Eigen::VectorXd qi = Q.col(minus_one[k]), qj = Q.col(minus_one[k + 1]);
        out.log += pi * (qj * qi.transpose() - qi * qj.transpose());
        out.phases.push_back(pi);
        out.phases.push_back(pi);
        out.tie_at_pi = true;
    }
    out.log = 0.5 * (out.log - out.log.transpose()).eval();
    std::sort(out.phases.begin(), out.phases.end());
    return out;
}

// ---------------------------------------------------------------------------

AlgebraElement so3_generator(int axis) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    switch (axis) {
        case 0: c[2] = -1.0; break;  // J_x e_2 = e_3
        case 1: c[1] = 1.0; break;   // J_y e_3 = e_1
        case 2: c[0] = -1.0; break;  // J_z e_1 = e_2
        default: throw std::invalid_argument("so3_generator: axis must be 0, 1 or 2");
    }
    return AlgebraElement(3, c);
}

namespace {

Eigen::Vector3d so3_axis(const AlgebraElement& X) {
    const Eigen::VectorXd& c = X.coeffs();
    return Eigen::Vector3d(-c[2], c[1], -c[0]);
}

}  // namespace

MomentMap lookup_moment_map(const std::string& name, const ActionSpec& spec) {
    if (name == "height") {
        if (spec.K != 3) throw std::invalid_argument("moment map 'height' requires K = 3");
        Eigen::MatrixXd axes(3, spec.n_generators());
        for (int g = 0; g < spec.n_generators(); ++g) axes.col(g) = so3_axis(spec.generators[g]);
        MomentMap m;
        m.name = name;
        m.value = [axes](const Eigen::VectorXd& y) -> Eigen::VectorXd { return axes.transpose() * y; };
        m.gradient = [axes](const Eigen::VectorXd&) -> Eigen::MatrixXd { return axes; };
        return m;
    }
    throw std::invalid_argument("no moment map registered under '" + name + "'");
}

Eigen::VectorXd sphere_complex_structure(const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    const Eigen::Vector3d yy = y.head<3>();
    const Eigen::Vector3d vv = v.head<3>();
    return vv.cross(yy);
}

ActionSpec circle_on_sphere(double c) {
    ActionSpec s;
    s.K = 3;
    s.generators = {J_z()};
    s.center_c = Eigen::VectorXd::Constant(1, c);
    s.moment_map_name = "height";
    s.moment_map = lookup_moment_map("height", s);
    s.complex_structure = sphere_complex_structure;
    return s;
}

Eigen::VectorXd infinitesimal_action(const AlgebraElement& X, const Eigen::VectorXd& y) {
    if (y.size() != X.K()) throw std::invalid_argument("infinitesimal_action: dimension mismatch");
    Eigen::VectorXd out(X.K());
    apply_skew(X.K(), X.coeffs().data(), y.data(), out.data());
    return out;
}

Eigen::VectorXd tangent_project(const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
    if (y.size() != v.size()) throw std::invalid_argument("tangent_project: dimension mismatch");
    if (std::abs(y.norm() - 1.0) > 1e-6) throw std::domain_error("tangent_project: point is not on the sphere");
    return v - v.dot(y) * y;
}

Eigen::VectorXd second_fundamental_form(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& w) {
    if (std::abs(v.dot(y)) > 1e-8 || std::abs(w.dot(y)) > 1e-8)
        throw std::domain_error("second_fundamental_form: arguments must be tangent");
    return v.dot(w) * y;
}

Eigen::VectorXd moment_value(const ActionSpec& spec, const Eigen::VectorXd& y) {
    if (!spec.moment_map) throw std::invalid_argument("moment_value: no moment map registered for this action");
    return spec.moment_map->value(y);
}

Eigen::MatrixXd generator_basis(const ActionSpec& spec) {
    const int m = algebra_dim(spec.K);
    if (spec.generators.empty()) return Eigen::MatrixXd::Zero(m, 0);
    Eigen::MatrixXd G(m, spec.n_generators());
    for (int g = 0; g < spec.n_generators(); ++g) G.col(g) = spec.generators[g].coeffs();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()[k] > 1e-12) ++rank;
    return svd.matrixU().leftCols(rank);
}

AlgebraElement project_to_span(const ActionSpec& spec, const AlgebraElement& X) {
    const Eigen::MatrixXd B = generator_basis(spec);
    return AlgebraElement(spec.K, B * (B.transpose() * X.coeffs()));
}

Eigen::VectorXd generator_coordinates(const ActionSpec& spec, const AlgebraElement& X) {
    Eigen::MatrixXd G(algebra_dim(spec.K), spec.n_generators());
    for (int g = 0; g < spec.n_generators(); ++g) G.col(g) = spec.generators[g].coeffs();
    return G.completeOrthogonalDecomposition().solve(X.coeffs());
}

std::string to_string(ElementClass c) { return c == ElementClass::critical ? "critical" : "non_critical"; }

Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, double tol) {
    const int n = static_cast<int>(M.cols());
    if (M.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()[k] > tol) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.cols() != B.cols()) return std::numbers::pi / 2;
    if (A.cols() == 0) return 0.0;
    const Eigen::MatrixXd resid = B - A * (A.transpose() * B);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(resid);
    const double s = std::clamp(svd.singularValues()[0], 0.0, 1.0);
    return std::asin(s);
}

ElementClass classify_element(const ActionSpec& spec, const AlgebraElement& X, double tol) {
    const int K = spec.K;
    const Eigen::MatrixXd R = expm(2.0 * std::numbers::pi * X.matrix());
    const Eigen::MatrixXd fixed_alpha = null_space(R - Eigen::MatrixXd::Identity(K, K), tol);
    Eigen::MatrixXd stacked(K * spec.n_generators(), K);
    for (int g = 0; g < spec.n_generators(); ++g) stacked.middleRows(g * K, K) = spec.generators[g].matrix();
    const Eigen::MatrixXd fixed_group = null_space(stacked, tol);
    if (fixed_alpha.cols() != fixed_group.cols()) return ElementClass::critical;
    return max_principal_angle(fixed_alpha, fixed_group) <= tol ? ElementClass::non_critical : ElementClass::critical;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ActionSpec& spec) {
    nlohmann::json j;
    j["K"] = spec.K;
    j["manifold_kind"] = "unit_sphere";
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& g : spec.generators)
        gens.push_back(std::vector<double>(g.coeffs().data(), g.coeffs().data() + g.coeffs().size()));
    j["generators"] = gens;
    j["center_c"] = std::vector<double>(spec.center_c.data(), spec.center_c.data() + spec.center_c.size());
    j["moment_map"] = spec.moment_map_name;
    j["complex_structure"] = spec.complex_structure ? "sphere_cross" : "none";
    return j;
}

ActionSpec action_spec_from_json(const nlohmann::json& j) {
    ActionSpec s;
    s.K = j.at("K").get<int>();
    if (s.K < 2) throw std::invalid_argument("ActionSpec: K must be at least 2");
    if (j.at("manifold_kind").get<std::string>() != "unit_sphere")
        throw std::invalid_argument("ActionSpec: only unit_sphere is supported");
    for (const auto& g : j.at("generators")) {
        const auto v = g.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != algebra_dim(s.K))
            throw std::invalid_argument("ActionSpec: generator must list K(K-1)/2 strict upper entries");
        s.generators.emplace_back(s.K, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    const auto c = j.at("center_c").get<std::vector<double>>();
    if (static_cast<int>(c.size()) != s.n_generators())
        throw std::invalid_argument("ActionSpec: center_c needs one entry per generator");
    s.center_c = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    s.moment_map_name = j.value("moment_map", std::string());
    if (!s.moment_map_name.empty()) s.moment_map = lookup_moment_map(s.moment_map_name, s);
    if (j.value("complex_structure", std::string("none")) == "sphere_cross") {
        if (s.K != 3) throw std::invalid_argument("ActionSpec: sphere_cross complex structure requires K = 3");
        s.complex_structure = sphere_complex_structure;
    }
    return s;
}

}  // namespace ymh
