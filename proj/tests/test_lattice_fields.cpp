#include "support.hpp"
#include "ymh/lattice_fields.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>

using namespace ymh;

namespace {
constexpr double pi = std::numbers::pi;

NodeField scalar_field(const CylinderGrid& g, double (*f)(double, double)) {
    NodeField out(g, 1);
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) out.at(g.node(i, j))[0] = f(g.t(i), g.theta(j));
    return out;
}
}  // namespace

TEST_CASE("grid geometry") {
    const CylinderGrid g(2.0, 41, 16);
    CHECK(g.h_t() == doctest::Approx(0.1));
    CHECK(g.h_theta() == doctest::Approx(2 * pi / 16));
    CHECK(g.t(0) == -2.0);
    CHECK(g.t(40) == doctest::Approx(2.0));
    CHECK(g.t(g.middle_row()) == doctest::Approx(0.0));
    CHECK(g.wrap(-1) == 15);
    CHECK(g.wrap(16) == 0);
    double total = 0.0;
    for (int i = 0; i < g.n_t; ++i) total += g.row_weight(i) * g.n_theta * g.h_theta();
    CHECK(total == doctest::Approx(g.area()));
    CHECK_THROWS_AS(CylinderGrid(0.0, 16, 16), std::invalid_argument);
    CHECK_THROWS_AS(CylinderGrid(1.0, 7, 16), std::invalid_argument);
    CHECK_THROWS_AS(CylinderGrid(1.0, 16, 4), std::invalid_argument);
}

TEST_CASE("t derivative is exact on quadratics, including the one-sided ends") {
    const CylinderGrid g(1.5, 17, 8);
    const NodeField f = scalar_field(g, [](double t, double) { return 3.0 * t * t - 2.0 * t + 1.0; });
    const NodeField d = d_t(f);
    for (int i = 0; i < g.n_t; ++i) CHECK(d.at(g.node(i, 3))[0] == doctest::Approx(6.0 * g.t(i) - 2.0).epsilon(1e-12));
}

TEST_CASE("theta derivative converges at second order") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const CylinderGrid g(1.0, 9, n);
        const NodeField f = scalar_field(g, [](double, double th) { return std::sin(2.0 * th); });
        const NodeField d = d_theta(f);
        double err = 0.0;
        for (int j = 0; j < n; ++j) err = std::max(err, std::abs(d.at(g.node(4, j))[0] - 2.0 * std::cos(2.0 * g.theta(j))));
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("covariant derivative of a parallel section vanishes") {
    // u(theta) = exp(-theta X) y0 with y0 on the rotation axis is constant; off-axis
    // it is only periodic for integer X, so use X = J_z.
    const CylinderGrid g(1.0, 9, 256);
    const AlgebraElement X = J_z();
    const SectionField u = SectionField::from_function(g, 3, [&](double, double th) -> Eigen::VectorXd {
        return expm(-th * X.matrix()) * Eigen::Vector3d(1, 0, 0);
    });
    const CovariantDerivative D = covariant_derivative(ConnectionField::constant(g, X), u);
    CHECK(sup_norm(D.d_t) < 1e-12);
    CHECK(sup_norm(D.d_theta) < 1e-3);  // O(h^2) with h = 2 pi / 256
    ConnectionField wrong(CylinderGrid(1.0, 9, 16), 3);
    CHECK_THROWS_AS(covariant_derivative(wrong, u), std::invalid_argument);
}

TEST_CASE("curvature of flat and non-flat connections") {
    const CylinderGrid g(1.0, 21, 16);
    CHECK(sup_norm(curvature(ConnectionField::constant(g, 0.3 * J_z()))) < 1e-15);
    // a_theta = t J_z gives F = d_t a_theta = J_z exactly (linear in t).
    ConnectionField A(g, 3);
    for (int i = 0; i < g.n_t; ++i)
        for (int j = 0; j < g.n_theta; ++j) A.set_theta(g.node(i, j), g.t(i) * J_z());
    const NodeField F = curvature(A);
    for (int n = 0; n < g.nodes(); ++n) CHECK((F.vec(n) - J_z().coeffs()).norm() < 1e-12);
    // Non-abelian term: a_t = J_x, a_theta = J_y constant gives F = [J_x, J_y] = J_z.
    ConnectionField B(g, 3);
    for (int n = 0; n < g.nodes(); ++n) {
        B.set_t(n, so3_generator(0));
        B.set_theta(n, so3_generator(1));
    }
    CHECK((curvature(B).vec(5) - J_z().coeffs()).norm() < 1e-14);
    CHECK(B.max_abs_a_t() == doctest::Approx(1.0));
}

TEST_CASE("L2 norm uses trapezoid in t and is exact for linear profiles") {
    const CylinderGrid g(1.0, 11, 8);
    const NodeField f = scalar_field(g, [](double t, double) { return 1.0 + t; });
    // int_{-1}^{1} (1+t)^2 dt * 2 pi = (8/3) 2 pi; trapezoid error h^2/12 * [f'']... = 2 h^2 / 6 * 2 pi
    const double exact = 8.0 / 3.0 * 2.0 * pi;
    CHECK(l2_norm_squared(f) == doctest::Approx(exact + 2.0 * pi * g.h_t() * g.h_t() / 3.0).epsilon(1e-12));
    CHECK(inner_product(f, f) == doctest::Approx(l2_norm_squared(f)));
    std::vector<double> w(static_cast<std::size_t>(g.nodes()), 2.0);
    CHECK(l2_norm_squared(f, &w) == doctest::Approx(2.0 * l2_norm_squared(f)));
    w[3] = 0.0;
    CHECK_THROWS_AS(l2_norm_squared(f, &w), std::invalid_argument);
}

TEST_CASE("section renormalization and errors") {
    const CylinderGrid g(1.0, 9, 8);
    SectionField u(g, 3);
    CHECK_THROWS_AS(u.renormalize(), std::domain_error);
    ymh::CounterRng rng(7);
    SectionField v = ymh::testing::random_section(rng, g);
    CHECK(v.max_norm_defect() < 1e-15);
}

TEST_CASE("resolution flag and snapshot CSV") {
    const CylinderGrid g(1.0, 9, 8);
    ymh::CounterRng rng(8);
    const SectionField u = ymh::testing::random_section(rng, g);
    const CovariantDerivative D = covariant_derivative(ConnectionField(g, 3), u);
    CovariantDerivative big = D;
    for (double& x : big.d_t.data) x *= 1e3;
    CHECK(under_resolved(big));
    const NodeField n = pointwise_norm(D);
    const std::string csv = snapshot_csv({{"u", &u.u}, {"du", &n}});
    CHECK(csv.rfind("it,itheta,t,theta,u_1,u_2,u_3,du\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == g.nodes() + 1);
}
