#include "hydro/mesh.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace hydro {

namespace {

constexpr double kDegenerateVolumeFactor = 1e-14;
constexpr double kPointInTetTolerance = 1e-10;  // meters

Eigen::Matrix3d edge_matrix(const TetMesh& mesh, int tet) {
  const auto& t = mesh.tets[tet];
  const Eigen::Vector3d& v0 = mesh.vertices[t[0]];
  Eigen::Matrix3d e;
  e.col(0) = mesh.vertices[t[1]] - v0;
  e.col(1) = mesh.vertices[t[2]] - v0;
  e.col(2) = mesh.vertices[t[3]] - v0;
  return e;
}

}  // namespace

double tet_volume(const TetMesh& mesh, int tet) {
  return edge_matrix(mesh, tet).determinant() / 6.0;
}

double tet_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                  const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

double bounding_box_diagonal(const TetMesh& mesh) {
  if (mesh.vertices.empty()) return 0.0;
  Eigen::Vector3d lo = mesh.vertices.front();
  Eigen::Vector3d hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

void validate_tet_mesh(const TetMesh& mesh) {
  if (mesh.vertices.empty() || mesh.tets.empty()) {
    throw std::runtime_error("empty geometry");
  }
  const double diag = bounding_box_diagonal(mesh);
  const double min_volume = kDegenerateVolumeFactor * diag * diag * diag;
  for (int i = 0; i < mesh.num_tets(); ++i) {
    for (int k : mesh.tets[i]) {
      if (k < 0 || k >= mesh.num_vertices()) {
        throw std::runtime_error("tet vertex index out of range");
      }
    }
    const double volume = tet_volume(mesh, i);
    if (volume <= 0.0) {
      throw std::runtime_error("tet " + std::to_string(i) +
                               " has non-positive volume");
    }
    if (volume < min_volume) {
      throw std::runtime_error("tet " + std::to_string(i) + " is degenerate");
    }
  }
}

void validate_surface_mesh(const SurfaceMesh& mesh) {
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    throw std::runtime_error("empty geometry");
  }
  for (const auto& tri : mesh.triangles) {
    for (int k : tri) {
      if (k < 0 || k >= mesh.num_vertices()) {
        throw std::runtime_error("triangle vertex index out of range");
      }
    }
  }
}

std::vector<int> boundary_vertex_indices(const TetMesh& mesh) {
  // A face is on the boundary iff it belongs to exactly one tet.
  std::map<std::array<int, 3>, int> face_count;
  for (const auto& t : mesh.tets) {
    for (const auto& f : kTetFaces) {
      std::array<int, 3> key = {t[f[0]], t[f[1]], t[f[2]]};
      std::sort(key.begin(), key.end());
      ++face_count[key];
    }
  }
  std::vector<char> on_boundary(mesh.num_vertices(), 0);
  for (const auto& [face, count] : face_count) {
    if (count == 1) {
      for (int k : face) on_boundary[k] = 1;
    }
  }
  std::vector<int> result;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (on_boundary[i]) result.push_back(i);
  }
  return result;
}

void validate_vertex_field(const TetMesh& mesh, const VertexField& field,
                           bool require_zero_boundary) {
  if (field.size() != mesh.num_vertices()) {
    throw std::runtime_error("field size does not match vertex count");
  }
  for (double v : field.values) {
    if (!(v >= 0.0)) throw std::runtime_error("field value is negative");
  }
  if (require_zero_boundary) {
    for (int i : boundary_vertex_indices(mesh)) {
      if (field.values[i] != 0.0) {
        throw std::runtime_error("nonzero field value on boundary vertex " +
                                 std::to_string(i));
      }
    }
  }
}

Eigen::Vector4d barycentric_coordinates(const TetMesh& mesh, int tet,
                                        const Eigen::Vector3d& point) {
  const auto& t = mesh.tets[tet];
  const Eigen::Vector3d rhs = point - mesh.vertices[t[0]];
  const Eigen::Vector3d lambda = edge_matrix(mesh, tet).partialPivLu().solve(rhs);
  return {1.0 - lambda.sum(), lambda[0], lambda[1], lambda[2]};
}

double interpolate_pressure(const TetMesh& mesh, const VertexField& field,
                            int tet, const Eigen::Vector3d& point) {
  const auto& t = mesh.tets[tet];
  // Containment check against the four face planes, in meters so the
  // tolerance has a fixed geometric meaning.
  for (const auto& f : kTetFaces) {
    const Eigen::Vector3d& a = mesh.vertices[t[f[0]]];
    const Eigen::Vector3d& b = mesh.vertices[t[f[1]]];
    const Eigen::Vector3d& c = mesh.vertices[t[f[2]]];
    const Eigen::Vector3d n = (b - a).cross(c - a).normalized();
    if (n.dot(point - a) > kPointInTetTolerance) {
      throw std::runtime_error("point not in element");
    }
  }
  const Eigen::Vector4d lambda = barycentric_coordinates(mesh, tet, point);
  double value = 0.0;
  for (int k = 0; k < 4; ++k) value += lambda[k] * field.values[t[k]];
  return value;
}

Eigen::Vector3d field_gradient(const TetMesh& mesh, const VertexField& field,
                               int tet) {
  const auto& t = mesh.tets[tet];
  const double volume = tet_volume(mesh, tet);
  const double diag = bounding_box_diagonal(mesh);
  if (volume < kDegenerateVolumeFactor * diag * diag * diag) {
    throw std::runtime_error("degenerate tet has no well-defined gradient");
  }
  Eigen::Vector3d rhs;
  const double f0 = field.values[t[0]];
  rhs << field.values[t[1]] - f0, field.values[t[2]] - f0,
      field.values[t[3]] - f0;
  // grad satisfies E^T grad = df over the three edges from vertex 0.
  return edge_matrix(mesh, tet).transpose().partialPivLu().solve(rhs);
}

}  // namespace hydro
