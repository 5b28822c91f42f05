#pragma once

#include "ymh/ymh_core.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ymh {

enum class ChiKind { flat_one, smooth_bump };
std::string to_string(ChiKind k);
ChiKind chi_kind_from_string(const std::string& s);

/// Collars shorter than this are rejected as degenerate.
inline constexpr double kMinCollarHalfLength = 0.5;

/**
 * @brief Canonical collar metric lambda^2 (dt^2 + dtheta^2) on [-T, T] x S^1.
 *
 * lambda^2(t) = e^{-2t} delta^4 chi(e^{-t} delta^2), T = -ln(delta).
 * flat_one takes chi = 1. smooth_bump keeps chi = 1 for t <= -1 and bends
 * e^{-t} smoothly into e^{t} on [-1, 1], giving lambda(t) = lambda(-t).
 */
struct CollarMetric {
    double delta = 0.0;
    double T_half = 0.0;
    ChiKind chi = ChiKind::flat_one;
    std::vector<double> t;
    std::vector<double> lambda;
    double C = 0.0;  ///< smallest constant with lambda <= C delta e^{|t| - T}

    WeightProfile weight() const;
};

/// chi_delta(r) for the given kind.
double chi_value(ChiKind kind, double delta, double r);

CollarMetric collar_profile(double delta, int n_t, ChiKind chi = ChiKind::flat_one);

struct BoundCheck {
    double C_min = 0.0;
    bool pass = false;
};

/// C_min = max_t |f(t)| e^{T - |t|} / delta on the uniform grid of [-T, T].
BoundCheck exponential_bound_check(const std::vector<double>& profile, double delta, double T);

struct CollarFamily {
    std::vector<CollarMetric> members;
    double C = 0.0;  ///< shared certificate
    ChiKind chi = ChiKind::flat_one;
};

CollarFamily family(const std::vector<double>& deltas, const std::vector<ChiKind>& chis, int n_t);
CollarFamily family(const std::vector<double>& deltas, ChiKind chi, int n_t);

/// Columns (t, lambda).
std::string profile_csv(const CollarMetric& m);
/// {deltas, T, C, chi_kind}
nlohmann::json manifest(const CollarFamily& f);

}  // namespace ymh
