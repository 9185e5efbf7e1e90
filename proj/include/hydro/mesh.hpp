#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace hydro {

/// A rigid transform stored as a unit quaternion plus a translation.
struct RigidPose {
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  RigidPose operator*(const RigidPose& other) const {
    return RigidPose{rotation * other.rotation,
                     rotation * other.translation + translation};
  }

  RigidPose inverse() const {
    const Eigen::Quaterniond r_inv = rotation.conjugate();
    return RigidPose{r_inv, r_inv * (-translation)};
  }

  Eigen::Matrix3d matrix() const { return rotation.toRotationMatrix(); }
};

/// Tetrahedral volume mesh in a body frame. Tets are oriented so that their
/// signed volume is positive.
struct TetMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 4>> tets;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }
};

/// Triangle surface mesh; triangles wind counter-clockwise seen from outside.
struct SurfaceMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
};

/// One scalar (Pa) per mesh vertex.
struct VertexField {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
};

/// Vertex index triples of the four tet faces, wound so face normals point
/// outward when the tet has positive volume.
inline constexpr int kTetFaces[4][3] = {
    {1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

/// Signed volume of tet i (positive for consistent orientation).
double tet_volume(const TetMesh& mesh, int tet);

/// Signed volume of the tet (a, b, c, d).
double tet_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                  const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Mesh diagonal of the axis-aligned bounding box of all vertices.
double bounding_box_diagonal(const TetMesh& mesh);

/// Throws on out-of-range indices, inverted tets, or tets with volume below
/// 1e-14 * diagonal^3.
void validate_tet_mesh(const TetMesh& mesh);

/// Throws on out-of-range indices or empty geometry.
void validate_surface_mesh(const SurfaceMesh& mesh);

/// Indices of vertices lying on the mesh boundary (vertices of faces that
/// belong to exactly one tet).
std::vector<int> boundary_vertex_indices(const TetMesh& mesh);

/// Throws unless the field has one nonnegative value per vertex. When
/// `require_zero_boundary` is set, also requires exact zeros on all boundary
/// vertices.
void validate_vertex_field(const TetMesh& mesh, const VertexField& field,
                           bool require_zero_boundary);

/// Barycentric coordinates of `point` with respect to tet `tet`.
Eigen::Vector4d barycentric_coordinates(const TetMesh& mesh, int tet,
                                        const Eigen::Vector3d& point);

/// Linear interpolation of a per-vertex field inside one tet. The point must
/// lie inside the tet or within 1e-10 m of it; otherwise throws
/// "point not in element".
double interpolate_pressure(const TetMesh& mesh, const VertexField& field,
                            int tet, const Eigen::Vector3d& point);

/// Constant gradient (Pa/m) of the linear interpolant over one tet.
Eigen::Vector3d field_gradient(const TetMesh& mesh, const VertexField& field,
                               int tet);

}  // namespace hydro
