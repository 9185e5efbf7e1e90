#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "hydro/bvh.hpp"
#include "hydro/pressure_field.hpp"

namespace hydro {

/// Scalar affine function p(x) = gradient . x + offset.
struct AffineField {
  Eigen::Vector3d gradient{0.0, 0.0, 0.0};
  double offset = 0.0;

  double operator()(const Eigen::Vector3d& x) const {
    return gradient.dot(x) + offset;
  }
};

/// Plane n . x = d with unit normal.
struct Plane {
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double offset = 0.0;

  double signed_distance(const Eigen::Vector3d& x) const {
    return normal.dot(x) - offset;
  }
};

/// One flat convex piece of a contact surface. The normal points from body A
/// into body B. `pressure` is the equal-pressure value at the centroid and
/// `pressure_gradient` its in-plane world gradient, together defining the
/// pressure everywhere on the polygon. `grad_a`/`grad_b` are the (positive,
/// for genuine contact) rates at which each body's pressure field falls off
/// along the normal; a rigid body reports +infinity.
struct ContactPolygon {
  std::vector<Eigen::Vector3d> vertices;  // world frame, coplanar, convex
  double area = 0.0;
  Eigen::Vector3d centroid{0.0, 0.0, 0.0};
  Eigen::Vector3d normal{0.0, 0.0, 1.0};
  double pressure = 0.0;
  Eigen::Vector3d pressure_gradient{0.0, 0.0, 0.0};
  double grad_a = 0.0;
  double grad_b = 0.0;
  int element_a = -1;  // tet (or triangle) index in body A
  int element_b = -1;  // tet index in body B
};

struct ContactSurface {
  int body_a = -1;
  int body_b = -1;
  std::vector<ContactPolygon> polygons;
};

/// Collision geometry of one body with its acceleration structure and, for a
/// compliant body, the per-tet affine pressure functions in the body frame.
class BodyGeometry {
 public:
  /// Empty geometry; produces no contacts until replaced by a factory result.
  BodyGeometry() = default;

  static BodyGeometry make_compliant(PressureMesh pm);
  static BodyGeometry make_rigid(RigidGeometry rg);

  bool is_rigid() const { return rigid_.has_value(); }
  const PressureMesh& compliant() const { return *compliant_; }
  const RigidGeometry& rigid() const { return *rigid_; }
  const Bvh& bvh() const { return bvh_; }
  /// Body-frame affine pressure of one tet (compliant bodies only).
  const AffineField& tet_field(int tet) const { return tet_fields_[tet]; }

 private:
  std::optional<PressureMesh> compliant_;
  std::optional<RigidGeometry> rigid_;
  Bvh bvh_;
  std::vector<AffineField> tet_fields_;
};

/// Plane of equal pressure between two affine fields, oriented from A into B
/// (along grad_b - grad_a). Empty when the gradients nearly coincide and no
/// stable plane exists.
std::optional<Plane> equilibrium_plane(const AffineField& field_a,
                                       const AffineField& field_b);

/// Sutherland-Hodgman clip of a convex polygon against the half space
/// n . x <= d.
std::vector<Eigen::Vector3d> clip_polygon_half_space(
    std::vector<Eigen::Vector3d> polygon, const Eigen::Vector3d& normal,
    double offset);

/// Clips a convex polygon against the four face planes of a posed tet.
std::vector<Eigen::Vector3d> clip_polygon_by_tet(
    std::vector<Eigen::Vector3d> polygon, const TetMesh& mesh,
    const RigidPose& pose, int tet);

/// Contact polygon between two posed compliant tets, or nothing when the
/// equilibrium plane misses the tet pair or the clipped area is negligible.
std::optional<ContactPolygon> tet_tet_contact_polygon(
    const BodyGeometry& body_a, const RigidPose& pose_a, int tet_a,
    const BodyGeometry& body_b, const RigidPose& pose_b, int tet_b);

/// Contact polygon between one rigid surface triangle (body A) and one
/// compliant tet (body B): the part of the triangle inside the tet.
std::optional<ContactPolygon> rigid_tri_contact_polygon(
    const BodyGeometry& body_a, const RigidPose& pose_a, int triangle,
    const BodyGeometry& body_b, const RigidPose& pose_b, int tet_b);

/// Wall-clock spent in the two collision phases, accumulated across calls.
struct ContactTimings {
  double broadphase_seconds = 0.0;
  double narrowphase_seconds = 0.0;
};

/// Full contact surface between two posed bodies. Candidate element pairs
/// come from the bounding volume hierarchies; output order is deterministic.
/// When exactly one body is rigid it takes the A role (ids are swapped
/// accordingly). Throws for rigid-rigid pairs.
ContactSurface compute_contact_surface(const BodyGeometry& body_a,
                                       const RigidPose& pose_a, int index_a,
                                       const BodyGeometry& body_b,
                                       const RigidPose& pose_b, int index_b,
                                       ContactTimings* timings = nullptr);

/// Replaces every polygon by its centroid fan. Triangle pieces inherit the
/// parent's plane and gradients but get their own area, centroid, and
/// centroid pressure. Summed force and torque match the coarse surface to
/// rounding because the pressure is affine on each polygon.
ContactSurface triangulate(const ContactSurface& surface);

/// ASCII dump of one or more surfaces, one face per line: vertex count, the
/// vertex coordinates, the centroid pressure, and the face normal.
void write_polygon_soup(std::ostream& out,
                        const std::vector<ContactSurface>& surfaces);

}  // namespace hydro
