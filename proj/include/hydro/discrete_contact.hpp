#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "hydro/contact_surface.hpp"

namespace hydro {

/// Pair material parameters for the discrete contact model.
struct ContactParameters {
  double dissipation_time_scale = 0.0;  // tau, seconds
  double friction = 0.0;                // mu
  double stiction_velocity = 1e-4;      // v_s, m/s
};

/// One compliant point contact standing in for a contact polygon. The frame
/// rows are (t1, t2, n) so `frame * v_rel` yields tangential and normal
/// components; the normal points from body A into body B and positive normal
/// velocity separates the bodies.
struct ContactConstraint {
  int body_a = -1;
  int body_b = -1;
  Eigen::Vector3d position{0.0, 0.0, 0.0};  // polygon centroid, world
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
  double stiffness = 0.0;   // k = g * area, N/m
  double damping = 0.0;     // d = tau * k, N s/m
  double phi0 = 0.0;        // signed distance surrogate, <= 0 in contact
  double area = 0.0;
  double pressure = 0.0;
  double friction = 0.0;
  double stiction_velocity = 1e-4;
};

/// Series combination g_a g_b / (g_a + g_b) of the two pressure fall-off
/// rates; equals the finite one when the other body is rigid (+infinity).
/// Empty unless both rates are positive, which screens polygons produced
/// behind a body's medial axis where a field increases along the normal.
std::optional<double> effective_gradient(double grad_a, double grad_b);

/// Harmonic-mean combination of two friction coefficients.
double combine_friction(double mu_a, double mu_b);

/// Right-handed frame with rows (t1, t2, unit normal).
Eigen::Matrix3d contact_frame(const Eigen::Vector3d& normal);

/// Spring-damper normal force (-k phi - d v_n) clamped at zero.
double elastic_force(double stiffness, double damping, double phi,
                     double v_n);

/// Regularized Coulomb friction: opposes the tangential velocity with
/// magnitude mu * f_n once |v_t| exceeds the stiction velocity, and tapers
/// linearly through zero below it.
Eigen::Vector2d friction_force(double friction, double normal_force,
                               const Eigen::Vector2d& v_t,
                               double stiction_velocity);

/// Rate of change of the contact pressure implied by a normal velocity
/// (approach is negative v_n and raises the pressure).
double pressure_rate(double effective_gradient, double v_n);

/// Builds the surrogate constraint for one polygon, or nothing when the
/// effective gradient is undefined.
std::optional<ContactConstraint> polygon_to_constraint(
    const ContactPolygon& polygon, int body_a, int body_b,
    const ContactParameters& params);

/// Constraints for every polygon of a surface, in surface order.
std::vector<ContactConstraint> surface_to_constraints(
    const ContactSurface& surface, const ContactParameters& params);

/// CSV dump of constraints and their solved contact-frame forces
/// (f_t1, f_t2, f_n). `forces` must be empty or match `constraints` in size.
void write_constraints_csv(std::ostream& out,
                           const std::vector<ContactConstraint>& constraints,
                           const std::vector<Eigen::Vector3d>& forces);

}  // namespace hydro
