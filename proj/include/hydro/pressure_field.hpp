#pragma once

#include "hydro/mesh.hpp"

namespace hydro {

/// A compliant body: tet mesh plus its pressure field. The field peaks at the
/// hydroelastic modulus on the medial axis and vanishes on the boundary.
struct PressureMesh {
  TetMesh mesh;
  VertexField field;
  double hydroelastic_modulus = 0.0;
};

/// A rigid body is represented by its boundary triangles only.
struct RigidGeometry {
  SurfaceMesh surface;
};

/// Axis-aligned box of the given half sizes centered at the body origin.
/// `resolution` is the target cell edge length; it must not exceed the
/// smallest half size so the medial axis is resolved by grid vertices.
PressureMesh make_box(const Eigen::Vector3d& half_sizes,
                      double hydroelastic_modulus, double resolution);

/// Cylinder with axis z, centered at the body origin. The mid-plane z = 0 is
/// always a vertex layer so the medial disk of a squat cylinder is resolved.
PressureMesh make_cylinder(double radius, double height,
                           double hydroelastic_modulus, double resolution);

/// Finite slab standing in for a compliant half space: top face at z = 0,
/// bottom at z = -thickness, extent x extent footprint. Pressure grows
/// linearly with depth and reaches the modulus at the bottom, which is
/// treated as an interior cut rather than a boundary; the gradient magnitude
/// is modulus/thickness everywhere.
PressureMesh make_half_space_slab(double thickness, double extent,
                                  double hydroelastic_modulus,
                                  double resolution);

/// Checks mesh validity, field bounds 0 <= p <= modulus, the max value
/// reaching the modulus, and (unless `boundary_zero` is false, as for the
/// slab) exact zeros on boundary vertices.
void validate_pressure_mesh(const PressureMesh& pm, bool boundary_zero = true);

}  // namespace hydro
