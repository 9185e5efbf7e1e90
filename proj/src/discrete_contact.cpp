#include "hydro/discrete_contact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hydro {

std::optional<double> effective_gradient(double grad_a, double grad_b) {
  if (!(grad_a > 0.0) || !(grad_b > 0.0)) return std::nullopt;
  const bool inf_a = std::isinf(grad_a);
  const bool inf_b = std::isinf(grad_b);
  if (inf_a && inf_b) return std::nullopt;  // rigid-rigid has no compliance
  if (inf_a) return grad_b;
  if (inf_b) return grad_a;
  return grad_a * grad_b / (grad_a + grad_b);
}

double combine_friction(double mu_a, double mu_b) {
  if (mu_a + mu_b <= 0.0) return 0.0;
  return 2.0 * mu_a * mu_b / (mu_a + mu_b);
}

Eigen::Matrix3d contact_frame(const Eigen::Vector3d& normal) {
  int smallest = 0;
  normal.cwiseAbs().minCoeff(&smallest);
  const Eigen::Vector3d t1 =
      normal.cross(Eigen::Vector3d::Unit(smallest)).normalized();
  const Eigen::Vector3d t2 = normal.cross(t1);
  Eigen::Matrix3d frame;
  frame.row(0) = t1;
  frame.row(1) = t2;
  frame.row(2) = normal;
  return frame;
}

double elastic_force(double stiffness, double damping, double phi,
                     double v_n) {
  return std::max(0.0, -stiffness * phi - damping * v_n);
}

Eigen::Vector2d friction_force(double friction, double normal_force,
                               const Eigen::Vector2d& v_t,
                               double stiction_velocity) {
  const double speed = std::max(v_t.norm(), stiction_velocity);
  return -friction * normal_force / speed * v_t;
}

double pressure_rate(double effective_gradient, double v_n) {
  return -effective_gradient * v_n;
}

std::optional<ContactConstraint> polygon_to_constraint(
    const ContactPolygon& polygon, int body_a, int body_b,
    const ContactParameters& params) {
  const auto gradient = effective_gradient(polygon.grad_a, polygon.grad_b);
  if (!gradient) return std::nullopt;
  ContactConstraint constraint;
  constraint.body_a = body_a;
  constraint.body_b = body_b;
  constraint.position = polygon.centroid;
  constraint.frame = contact_frame(polygon.normal);
  constraint.stiffness = *gradient * polygon.area;
  constraint.damping = params.dissipation_time_scale * constraint.stiffness;
  constraint.phi0 = -polygon.pressure / *gradient;
  constraint.area = polygon.area;
  constraint.pressure = polygon.pressure;
  constraint.friction = params.friction;
  constraint.stiction_velocity = params.stiction_velocity;
  return constraint;
}

std::vector<ContactConstraint> surface_to_constraints(
    const ContactSurface& surface, const ContactParameters& params) {
  std::vector<ContactConstraint> constraints;
  constraints.reserve(surface.polygons.size());
  for (const auto& polygon : surface.polygons) {
    if (auto c = polygon_to_constraint(polygon, surface.body_a,
                                       surface.body_b, params)) {
      constraints.push_back(*c);
    }
  }
  return constraints;
}

void write_constraints_csv(std::ostream& out,
                           const std::vector<ContactConstraint>& constraints,
                           const std::vector<Eigen::Vector3d>& forces) {
  if (!forces.empty() && forces.size() != constraints.size()) {
    throw std::invalid_argument("force count does not match constraint count");
  }
  out << "body_a,body_b,pos_x,pos_y,pos_z,normal_x,normal_y,normal_z,area,"
         "pressure,stiffness,damping,phi0,friction,f_t1,f_t2,f_n\n";
  char buffer[512];
  for (size_t i = 0; i < constraints.size(); ++i) {
    const ContactConstraint& c = constraints[i];
    const Eigen::Vector3d n = c.frame.row(2);
    const Eigen::Vector3d f =
        forces.empty() ? Eigen::Vector3d::Zero() : forces[i];
    std::snprintf(buffer, sizeof(buffer),
                  "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  c.body_a, c.body_b, c.position.x(), c.position.y(),
                  c.position.z(), n.x(), n.y(), n.z(), c.area, c.pressure,
                  c.stiffness, c.damping, c.phi0, c.friction, f.x(), f.y(),
                  f.z());
    out << buffer;
  }
}

}  // namespace hydro
