#pragma once

#include "ymh/lattice_fields.hpp"
#include "ymh/spectral.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ymh {

/**
 * @brief Per-row neck quantities of a pair in balanced temporal gauge.
 *
 * The twisted derivative uses the constant comparison alpha and the same
 * periodic central difference as the energy functional, so for A = alpha dtheta
 * total_energy coincides with covariant_energy.
 */
struct NeckDiagnostics {
    std::vector<double> t;
    std::vector<double> theta_profile;  ///< Theta(t) = int |d_alpha u|^2 dtheta
    std::vector<double> e_profile;      ///< e(t) = int |u_t|^2 - |d_alpha u|^2 dtheta
    double e0 = 0.0;
    double total_energy = 0.0;      ///< int |u_t|^2 + |d_alpha u|^2
    double covariant_energy = 0.0;  ///< int |D_A u|^2 with the actual connection
    double sup_du = 0.0;            ///< sup |D_A u|
    double T_half = 0.0;
};

NeckDiagnostics diagnostics(const ConnectionField& A, const SectionField& u, const AlgebraElement& alpha);

/// int e dt + 2 int Theta dt with the trapezoid rule of the grid.
double decomposed_energy(const NeckDiagnostics& d, double h_t);

struct RadialBalance {
    double deviation = 0.0;  ///< max over interior rows of |e(t) - e(0)|
    double bound = 0.0;      ///< 2 sup|Du| ||f||_{L^1}
    double f_l1 = 0.0;
    bool pass = false;
};

/// Compares against 1.1 * bound; an absolute 1e-12 absorbs roundoff when f vanishes.
RadialBalance radial_balance_check(const NeckDiagnostics& d, const std::vector<double>& f_l1_profile, double h_t);

struct DecayFit {
    double fitted_rate = 0.0;
    double amplitude = 0.0;
    double r_squared = 0.0;
    int rows_used = 0;
    bool meets_rate = false;  ///< fitted_rate >= 0.9 sigma
};

/// Rows with abs_t_lo <= |t| <= abs_t_hi and Theta >= 1e-14; log Theta fitted against |t| - T.
DecayFit decay_fit(const NeckDiagnostics& d, double sigma, double abs_t_lo, double abs_t_hi);

struct ConcentrationHit {
    double t_center = 0.0;
    double window_energy = 0.0;
};

/// Sliding-window energies of |D_A u|^2; runs above the threshold collapse to their peak.
std::vector<ConcentrationHit> concentration_scan(const ConnectionField& A, const SectionField& u, double window_len,
                                                 double threshold);

enum class Trend { converging, diverging, oscillating };
std::string to_string(Trend t);
Trend classify_trend(const std::vector<double>& values);

enum class NeckClass { twisted_geodesic, single_orbit, infinite_geodesic, neumann_orbit, unresolved };
std::string to_string(NeckClass c);

struct SequenceEntry {
    double T = 0.0;
    double delta = 0.0;
    double e = 0.0;
    AlgebraElement alpha;
    double rho = 0.0;
};

struct SequenceReport {
    std::vector<SequenceEntry> entries;
    AlgebraElement alpha_inf;
    std::vector<double> mu_trace;     ///< T e
    std::vector<double> nu_trace;     ///< T sqrt(max(e, 0))
    std::vector<double> kappa_trace;  ///< T rho
    std::vector<double> omega_trace;  ///< T rho^2
    Trend mu_trend = Trend::converging;
    Trend nu_trend = Trend::converging;
    Trend kappa_trend = Trend::converging;
    Trend omega_trend = Trend::converging;
    NeckClass classification = NeckClass::unresolved;
    double length = 0.0;  ///< 2 nu / sqrt(2 pi) for twisted_geodesic
    bool degenerating = false;
    double fixed_point_residual = 0.0;
};

SequenceReport build_sequence(const std::vector<SequenceEntry>& entries, const AlgebraElement& alpha_inf);

struct EnergyIdentity {
    double lhs = 0.0;         ///< last E_n
    double rhs_nondeg = 0.0;  ///< 2 mu_n
    double rhs_deg = 0.0;     ///< 2 orbit_n + 2 mu_n
    std::vector<double> residual_nondeg;
    std::vector<double> residual_deg;
    bool nondeg_decreasing = false;
    bool deg_decreasing = false;
};

EnergyIdentity energy_identity_check(const SequenceReport& seq, const std::vector<double>& energies,
                                     const std::vector<double>& orbit_terms);

/// int |(alpha - alpha_inf) u|^2 over the cylinder.
double orbit_term(const SectionField& u, const AlgebraElement& alpha, const AlgebraElement& alpha_inf);

struct ClassifyOptions {
    double nu_zero = 0.05;
    double nu_infinite = 20.0;
    double fixed_point_tol = 1e-6;
    int n_theta = 64;
    double kernel_tol = 1e-9;
    double angle_tol = 1e-6;
};

/// Fills classification, length, degenerating and fixed_point_residual of seq.
NeckClass classify_neck(SequenceReport& seq, const SectionField& last_u, const ClassifyOptions& opts = {});

/// max_j |exp(2 pi X_inf) u(0, theta_j) - u(0, theta_j)| on the middle row.
double fixed_point_residual(const SectionField& u, const AlgebraElement& alpha_inf);

struct ReparamLimit {
    int n_s = 0;
    int n_theta = 0;
    std::vector<double> s;
    std::vector<Eigen::VectorXd> v;  ///< row-major (k, j)
    std::vector<double> T_dt;        ///< T |u_t| interpolated
    std::vector<double> T_dhat;      ///< T |d_alpha u| interpolated
};

/// v(s, theta) = u(T s, theta) on [-1, 1] x S^1 by linear interpolation in t.
ReparamLimit reparameterized_limit(const SectionField& u, int n_s, const AlgebraElement& alpha);

/// Polygonal length of s -> v(s, theta_j).
double curve_length(const ReparamLimit& lim, int j);

/// Columns (t, theta_energy, e_t).
std::string profile_csv(const NeckDiagnostics& d);
nlohmann::json to_json(const SequenceReport& seq);

}  // namespace ymh
