#include "ymh/metrics_family.hpp"

#include <doctest.h>

#include <cmath>

using namespace ymh;

TEST_CASE("flat collar has T = -ln delta and lambda = delta^2 e^{-t}") {
    for (double delta : {0.5, 0.1, 1e-3}) {
        const CollarMetric m = collar_profile(delta, 41);
        CHECK(m.T_half == -std::log(delta));
        CHECK(m.t.front() == -m.T_half);
        CHECK(m.t.back() == doctest::Approx(m.T_half));
        for (std::size_t i = 0; i < m.t.size(); ++i)
            CHECK(m.lambda[i] == doctest::Approx(delta * delta * std::exp(-m.t[i])).epsilon(1e-13));
        // lambda e^{T - |t|} / delta = e^{-t - |t|}, so the certificate is exactly one.
        CHECK(m.C == doctest::Approx(1.0).epsilon(1e-12));
        const WeightProfile w = m.weight();
        CHECK(w.lambda == m.lambda);
        CHECK(w.C == m.C);
    }
}

TEST_CASE("smooth bump collar is symmetric and agrees with the flat one near the left end") {
    const double delta = std::exp(-4.0);
    const CollarMetric b = collar_profile(delta, 81, ChiKind::smooth_bump);
    const CollarMetric f = collar_profile(delta, 81);
    for (std::size_t i = 0; i < b.t.size(); ++i) {
        CHECK(b.lambda[i] == doctest::Approx(b.lambda[b.t.size() - 1 - i]).epsilon(1e-10));
        if (b.t[i] <= -1.0) CHECK(b.lambda[i] == doctest::Approx(f.lambda[i]).epsilon(1e-12));
        CHECK(b.lambda[i] <= b.C * delta * std::exp(std::abs(b.t[i]) - b.T_half) * (1 + 1e-12));
    }
    CHECK(chi_value(ChiKind::flat_one, delta, 0.3) == 1.0);
    CHECK(chi_value(ChiKind::smooth_bump, delta, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("bound check reports the smallest constant") {
    const std::vector<double> p{0.1, 0.2, 0.4, 0.2, 0.1};
    const BoundCheck b = exponential_bound_check(p, 0.5, 2.0);
    // Row t = 0 dominates: 0.4 e^2 / 0.5.
    CHECK(b.C_min == doctest::Approx(0.8 * std::exp(2.0)));
    CHECK(b.pass);
    CHECK_THROWS_AS(exponential_bound_check({1.0}, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("collar construction rejects degenerate input") {
    CHECK_THROWS_AS(collar_profile(0.0, 41), std::invalid_argument);
    CHECK_THROWS_AS(collar_profile(1.5, 41), std::invalid_argument);
    CHECK_THROWS_AS(collar_profile(0.9, 41), std::invalid_argument);  // T below the minimum
    CHECK_THROWS_AS(collar_profile(0.1, 4), std::invalid_argument);
    CHECK_THROWS_AS(collar_profile(0.5, 41, ChiKind::smooth_bump), std::invalid_argument);
    CHECK_THROWS(chi_kind_from_string("wiggle"));
    CHECK(chi_kind_from_string(to_string(ChiKind::smooth_bump)) == ChiKind::smooth_bump);
}

TEST_CASE("families share a stable certificate") {
    const std::vector<double> deltas{std::exp(-2.0), std::exp(-3.0), std::exp(-4.0)};
    const CollarFamily fam = family(deltas, ChiKind::flat_one, 41);
    CHECK(fam.members.size() == 3);
    for (const auto& m : fam.members) CHECK(m.C == doctest::Approx(fam.C));
    const nlohmann::json j = manifest(fam);
    CHECK(j["chi_kind"] == "flat_one");
    CHECK(j["T"][2].get<double>() == doctest::Approx(4.0));
    CHECK(j["C"].get<double>() == doctest::Approx(1.0));
    CHECK_THROWS_AS(family({0.1, 0.2}, ChiKind::flat_one, 41), std::invalid_argument);
    CHECK_THROWS_AS(family({}, ChiKind::flat_one, 41), std::invalid_argument);
    CHECK_THROWS_AS(family({0.1, 0.05}, {ChiKind::flat_one, ChiKind::smooth_bump}, 41), std::invalid_argument);
    const std::string csv = profile_csv(fam.members[0]);
    CHECK(csv.rfind("t,lambda\n", 0) == 0);
}
