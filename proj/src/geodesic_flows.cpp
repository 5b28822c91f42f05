#include "ymh/geodesic_flows.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace ymh {

namespace {

using Vec = Eigen::VectorXd;
// Second-order system y'' = acc(y, v) on the unit sphere.
using Accel = std::function<Vec(const Vec& y, const Vec& v)>;

void check_start(const CurveState& st) {
    if (std::abs(st.position.norm() - 1.0) > 1e-10) throw std::invalid_argument("curve start must lie on the sphere");
    if (st.velocity.size() != st.position.size()) throw std::invalid_argument("curve start: dimension mismatch");
    if (std::abs(st.position.dot(st.velocity)) > 1e-10) throw std::invalid_argument("curve start velocity must be tangent");
}

void project(Vec& y, Vec& v) {
    y /= y.norm();
    v -= v.dot(y) * y;
}

Trajectory integrate_second_order(const CurveState& st, double s_max, double h_s, const Accel& acc,
                                  const std::function<double(const Vec&, const Vec&)>& invariant) {
    if (!(h_s > 0.0) || !(s_max > 0.0)) throw std::invalid_argument("integrator: step and range must be positive");
    const int steps = static_cast<int>(std::llround(s_max / h_s));
    const double h = s_max / steps;
    Trajectory tr;
    Vec y = st.position, v = st.velocity;
    const double I0 = invariant(y, v);
    auto record = [&](double s) {
        tr.s.push_back(s);
        tr.x.push_back(y);
        tr.v.push_back(v);
        const double I = invariant(y, v);
        tr.invariant.push_back(I);
        tr.drift_per_unit_s = std::max(tr.drift_per_unit_s, std::abs(I - I0) / s_max);
    };
    record(st.s);
    for (int k = 0; k < steps; ++k) {
        const Vec k1y = v, k1v = acc(y, v);
        const Vec y2 = y + 0.5 * h * k1y, v2 = v + 0.5 * h * k1v;
        const Vec k2y = v2, k2v = acc(y2, v2);
        const Vec y3 = y + 0.5 * h * k2y, v3 = v + 0.5 * h * k2v;
        const Vec k3y = v3, k3v = acc(y3, v3);
        const Vec y4 = y + h * k3y, v4 = v + h * k3v;
        const Vec k4y = v4, k4v = acc(y4, v4);
        y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        project(y, v);
        record(st.s + (k + 1) * h);
    }
    return tr;
}

}  // namespace

Trajectory twisted_geodesic_integrate(const CurveState& start, const AlgebraElement& alpha, double s_max, double h_s) {
    check_start(start);
    if (alpha.K() != start.position.size()) throw std::invalid_argument("twisted_geodesic_integrate: dimension mismatch");
    const Accel acc = [](const Vec& y, const Vec& v) -> Vec { return -v.squaredNorm() * y; };
    Trajectory tr = integrate_second_order(start, s_max, h_s, acc, [](const Vec&, const Vec& v) { return v.squaredNorm(); });
    if (tr.drift_per_unit_s > 1e-6) throw std::runtime_error("twisted_geodesic_integrate: step too large (speed drift)");
    return tr;
}

std::vector<Eigen::VectorXd> twisted_surface(const Trajectory& traj, const AlgebraElement& alpha, int n_theta) {
    std::vector<Eigen::MatrixXd> rot;
    for (int j = 0; j < n_theta; ++j) rot.push_back(expm(-(2.0 * std::numbers::pi * j / n_theta) * alpha.matrix()));
    std::vector<Eigen::VectorXd> out;
    out.reserve(traj.x.size() * static_cast<std::size_t>(n_theta));
    for (const auto& x : traj.x)
        for (int j = 0; j < n_theta; ++j) out.push_back(rot[j] * x);
    return out;
}

Trajectory neumann_integrate(const CurveState& start, double kappa, const AlgebraElement& beta, double s_max,
                             double h_s, double drift_bound) {
    check_start(start);
    const Eigen::MatrixXd Q = kappa * kappa * beta.matrix() * beta.matrix();  // kappa^2 beta^2, symmetric
    const Accel acc = [Q](const Vec& y, const Vec& v) -> Vec {
        const Vec F = -Q * y;
        return F - F.dot(y) * y - v.squaredNorm() * y;
    };
    const auto H = [Q](const Vec& y, const Vec& v) { return v.squaredNorm() + y.dot(Q * y); };
    Trajectory tr = integrate_second_order(start, s_max, h_s, acc, H);
    if (tr.drift_per_unit_s > drift_bound) throw std::runtime_error("neumann_integrate: step too large (H drift)");
    return tr;
}

Eigen::VectorXd hamiltonian_gradient(const ActionSpec& spec, const AlgebraElement& beta, const Eigen::VectorXd& y) {
    if (!spec.moment_map) throw std::invalid_argument("hamiltonian_gradient: action has no moment map");
    const Eigen::VectorXd b = generator_coordinates(spec, beta);
    const Eigen::VectorXd g = spec.moment_map->gradient(y) * b;
    return g - g.dot(y) * y;
}

Trajectory hamiltonian_gradient_line(const Eigen::VectorXd& start, double kappa, const AlgebraElement& beta,
                                     const ActionSpec& spec, double s_max, double h_s) {
    if (!spec.moment_map || !spec.complex_structure)
        throw std::invalid_argument("hamiltonian_gradient_line: action needs a moment map and a complex structure");
    if (std::abs(start.norm() - 1.0) > 1e-10) throw std::invalid_argument("hamiltonian_gradient_line: start must lie on the sphere");
    if (!(h_s > 0.0) || !(s_max > 0.0)) throw std::invalid_argument("hamiltonian_gradient_line: step and range must be positive");
    const Eigen::VectorXd b = generator_coordinates(spec, beta);
    auto h_of = [&](const Vec& y) { return spec.moment_map->value(y).dot(b); };
    auto f = [&](const Vec& y) -> Vec { return kappa * hamiltonian_gradient(spec, beta, y); };
    const int steps = static_cast<int>(std::llround(s_max / h_s));
    const double h = s_max / steps;
    Trajectory tr;
    Vec y = start;
    const double h0 = h_of(y);
    for (int k = 0; k <= steps; ++k) {
        if (k > 0) {
            const Vec k1 = f(y);
            const Vec k2 = f(y + 0.5 * h * k1);
            const Vec k3 = f(y + 0.5 * h * k2);
            const Vec k4 = f(y + h * k3);
            Vec next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            next /= next.norm();
            // Near a critical point the update is below roundoff; a step that
            // would lower h is rejected and the state is kept.
            if (h_of(next) >= h_of(y)) y = next;
        }
        tr.s.push_back(k * h);
        tr.x.push_back(y);
        tr.v.push_back(f(y));
        tr.invariant.push_back(h_of(y));
        tr.drift_per_unit_s = std::max(tr.drift_per_unit_s, std::abs(tr.invariant.back() - h0) / s_max);
    }
    return tr;
}

double moment_identity_defect(const Trajectory& traj, const AlgebraElement& beta, const ActionSpec& spec) {
    if (!spec.complex_structure) throw std::invalid_argument("moment_identity_defect: no complex structure");
    const Eigen::MatrixXd B = beta.matrix();
    double m = 0.0;
    for (const auto& y : traj.x) {
        const Vec lhs = B * y;
        const Vec rhs = (*spec.complex_structure)(y, hamiltonian_gradient(spec, beta, y));
        m = std::max(m, (lhs - rhs).norm());
    }
    return m;
}

bool non_decreasing(const std::vector<double>& values) {
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] < values[k - 1]) return false;
    return true;
}

double neumann_residual(const std::vector<Eigen::VectorXd>& curve, double h_s, double kappa, const AlgebraElement& beta) {
    const Eigen::MatrixXd Q = kappa * kappa * beta.matrix() * beta.matrix();
    double m = 0.0;
    for (std::size_t k = 1; k + 1 < curve.size(); ++k) {
        const Vec& y = curve[k];
        Vec r = (curve[k + 1] - 2.0 * y + curve[k - 1]) / (h_s * h_s) + Q * y;
        r -= r.dot(y) / y.squaredNorm() * y;
        m = std::max(m, r.norm());
    }
    return m;
}

std::string trajectory_csv(const Trajectory& traj) {
    const int K = traj.x.empty() ? 0 : static_cast<int>(traj.x.front().size());
    std::string out = "s";
    for (int d = 0; d < K; ++d) out += fmt::format(",x_{}", d + 1);
    for (int d = 0; d < K; ++d) out += fmt::format(",v_{}", d + 1);
    out += ",invariant\n";
    for (std::size_t k = 0; k < traj.s.size(); ++k) {
        out += fmt::format("{:.17g}", traj.s[k]);
        for (int d = 0; d < K; ++d) out += fmt::format(",{:.17g}", traj.x[k][d]);
        for (int d = 0; d < K; ++d) out += fmt::format(",{:.17g}", traj.v[k][d]);
        out += fmt::format(",{:.17g}\n", traj.invariant[k]);
    }
    return out;
}

}  // namespace ymh
