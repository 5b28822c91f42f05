#pragma once

#include "ymh/harness.hpp"
#include "ymh/lattice_fields.hpp"

namespace ymh {

// Grid with spacing close to h_t and an odd number of rows, so t = 0 is a node.
CylinderGrid grid_for(double T, double h_t, int n_theta);

// Closed-form families used by scenarios and tests.

/// u = (cos bt, sin bt, 0): a great circle traversed at speed b.
SectionField great_circle_section(const CylinderGrid& g, double b);
/// Speed giving T sqrt(e) = nu for the great circle on [-T, T].
double great_circle_speed(double nu, double T);
/// Meridian ascending gradient line of x_3: tan(phi/2) = eps e^{-a (t + T)}.
SectionField vortex_section(const CylinderGrid& g, double a, double eps);
/// u = (1, 0, 0).
SectionField equator_section(const CylinderGrid& g);
/// normalize(e_3 + eps e_1).
Eigen::Vector3d tilted_pole(double eps);

RunReport run_fixed_cylinder(const ExperimentConfig& cfg);
RunReport run_collar_family(const ExperimentConfig& cfg);
RunReport run_vortex_family(const ExperimentConfig& cfg);
RunReport run_degenerate_family(const ExperimentConfig& cfg);
RunReport run_half_cylinder_limit(const ExperimentConfig& cfg);
RunReport run_ode_only(const ExperimentConfig& cfg);

}  // namespace ymh
