#pragma once

#include "ymh/lattice_fields.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ymh {

/**
 * @brief Conformal factor per t-row.
 *
 * The metric is lambda^2 (dt^2 + dtheta^2): the Yang-Mills density carries
 * lambda^{-2} and the Higgs density carries lambda^2.
 */
struct WeightProfile {
    std::vector<double> lambda;
    double delta = 0.0;
    double T_half = 0.0;
    double C = 0.0;  ///< certificate lambda(t) <= C delta e^{|t|-T}, if known

    static WeightProfile constant(const CylinderGrid& g, double value);
    void validate(const CylinderGrid& g) const;
};

struct EnergyTerms {
    double total = 0.0;
    double energy_term = 0.0;      ///< ||Du||^2
    double yang_mills_term = 0.0;  ///< int lambda^{-2} |F|^2
    double higgs_term = 0.0;       ///< int lambda^2 |mu(u) - c|^2
};

EnergyTerms ymh_energy(const ConnectionField& A, const SectionField& u, const WeightProfile& w,
                       const ActionSpec& spec);

/**
 * @brief L^2 gradient of the discrete energy.
 *
 * section is tangent to the sphere at each node; the connection parts lie in
 * the span of the generators. For any admissible perturbation,
 * <section, du>_{L2} + <conn, dA>_{L2} is the derivative of ymh_energy.
 */
struct ElResidual {
    NodeField section;
    NodeField connection_t;
    NodeField connection_theta;
};

ElResidual el_residual(const ConnectionField& A, const SectionField& u, const WeightProfile& w,
                       const ActionSpec& spec);

enum class BoundaryMode { free, fixed };

struct SolverOptions {
    double step = 1e-2;  ///< first trial step
    int max_iters = 20000;
    double tol = 1e-8;
    BoundaryMode boundary = BoundaryMode::fixed;
    bool update_connection = true;
    bool update_section = true;
    double armijo = 1e-4;
    double min_step = 1e-14;
    bool barzilai_borwein = true;  ///< trial step from the previous iterate pair
};

struct TraceRow {
    int iter = 0;
    EnergyTerms energy;
    double res_u = 0.0;
    double res_A = 0.0;
    double step = 0.0;
};

struct SolveResult {
    ConnectionField A;
    SectionField u;
    std::vector<TraceRow> trace;
    bool converged = false;
    int iterations = 0;
};

class SolverError : public std::runtime_error {
public:
    enum class Kind { step_collapse, divergence };
    SolverError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

/// Projected gradient descent with Armijo backtracking and sphere retraction.
SolveResult gradient_flow_solve(const ConnectionField& A0, const SectionField& u0, const WeightProfile& w,
                                const ActionSpec& spec, const SolverOptions& opts);

/// Columns (iter, energy, e_term, ym_term, higgs_term, res_u, res_A, step).
std::string trace_csv(const std::vector<TraceRow>& trace);

/// d_t u + J_u(D_theta u) per node.
NodeField vortex_residual(const ConnectionField& A, const SectionField& u, const ActionSpec& spec);

/**
 * @brief Per-row int |f| dtheta for f = (u_tt + d_alpha^2 u)^T.
 *
 * Second differences are compact; the twisted operator uses the constant
 * alpha, so the deviation a_theta - alpha ends up inside f. Boundary rows
 * carry zero.
 */
std::vector<double> forcing_l1_profile(const SectionField& u, const AlgebraElement& alpha);

}  // namespace ymh
