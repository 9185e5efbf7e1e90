#include "hydro/contact_surface.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace hydro {
namespace {

constexpr double kMinPolygonArea = 1e-14;  // m^2
constexpr double kParallelGradientTolerance = 1e-10;

Eigen::Vector3d world_vertex(const TetMesh& mesh, const RigidPose& pose,
                             int v) {
  return pose * mesh.vertices[v];
}

AffineField world_field(const AffineField& body_field, const RigidPose& pose) {
  // p(x) = g . R^T (x - t) + c = (R g) . x + (c - (R g) . t)
  AffineField w;
  w.gradient = pose.rotation * body_field.gradient;
  w.offset = body_field.offset - w.gradient.dot(pose.translation);
  return w;
}

// In-plane orthonormal basis with t1 x t2 = normal.
void plane_basis(const Eigen::Vector3d& normal, Eigen::Vector3d& t1,
                 Eigen::Vector3d& t2) {
  int smallest = 0;
  normal.cwiseAbs().minCoeff(&smallest);
  t1 = normal.cross(Eigen::Vector3d::Unit(smallest)).normalized();
  t2 = normal.cross(t1);
}

void project_onto_plane(std::vector<Eigen::Vector3d>& polygon,
                        const Plane& plane) {
  for (auto& v : polygon) {
    v -= plane.signed_distance(v) * plane.normal;
  }
}

// Removes duplicate consecutive vertices, then enforces the vertex cap that
// exact clipping guarantees but floating point occasionally violates by a
// sliver, merging the closest adjacent pair until the cap holds.
void tidy_polygon(std::vector<Eigen::Vector3d>& polygon, int max_vertices) {
  double diag = 0.0;
  for (size_t i = 0; i < polygon.size(); ++i) {
    for (size_t j = i + 1; j < polygon.size(); ++j) {
      diag = std::max(diag, (polygon[i] - polygon[j]).norm());
    }
  }
  const double tol = 1e-12 * diag;
  std::vector<Eigen::Vector3d> cleaned;
  for (const auto& v : polygon) {
    if (cleaned.empty() || (v - cleaned.back()).norm() > tol) {
      cleaned.push_back(v);
    }
  }
  while (cleaned.size() > 1 &&
         (cleaned.front() - cleaned.back()).norm() <= tol) {
    cleaned.pop_back();
  }
  while (static_cast<int>(cleaned.size()) > max_vertices) {
    size_t best = 0;
    double best_len = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < cleaned.size(); ++i) {
      const size_t j = (i + 1) % cleaned.size();
      const double len = (cleaned[i] - cleaned[j]).norm();
      if (len < best_len) {
        best_len = len;
        best = i;
      }
    }
    const size_t next = (best + 1) % cleaned.size();
    cleaned[best] = 0.5 * (cleaned[best] + cleaned[next]);
    cleaned.erase(cleaned.begin() + next);
  }
  polygon = std::move(cleaned);
}

// Area and centroid of a convex planar polygon wound counter-clockwise
// around `normal`, via the fan from the first vertex.
bool polygon_area_centroid(const std::vector<Eigen::Vector3d>& polygon,
                           const Eigen::Vector3d& normal, double& area,
                           Eigen::Vector3d& centroid) {
  area = 0.0;
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
  for (size_t i = 1; i + 1 < polygon.size(); ++i) {
    const double tri_area =
        0.5 * (polygon[i] - polygon[0])
                  .cross(polygon[i + 1] - polygon[0])
                  .dot(normal);
    area += tri_area;
    weighted += tri_area * (polygon[0] + polygon[i] + polygon[i + 1]) / 3.0;
  }
  if (area < kMinPolygonArea) return false;
  centroid = weighted / area;
  return true;
}

std::optional<ContactPolygon> finish_polygon(
    std::vector<Eigen::Vector3d> vertices, const Plane& plane,
    int max_vertices) {
  if (vertices.size() < 3) return std::nullopt;
  project_onto_plane(vertices, plane);
  tidy_polygon(vertices, max_vertices);
  if (vertices.size() < 3) return std::nullopt;
  ContactPolygon poly;
  poly.normal = plane.normal;
  if (!polygon_area_centroid(vertices, plane.normal, poly.area,
                             poly.centroid)) {
    return std::nullopt;
  }
  poly.vertices = std::move(vertices);
  return poly;
}

void append_soup_scalar(std::ostream& out, double value) {
  char token[40];
  std::snprintf(token, sizeof(token), " %.17g", value);
  out << token;
}

}  // namespace

BodyGeometry BodyGeometry::make_compliant(PressureMesh pm) {
  validate_pressure_mesh(pm, /*boundary_zero=*/false);
  BodyGeometry geom;
  geom.bvh_ = build_bvh(pm.mesh);
  geom.tet_fields_.reserve(pm.mesh.num_tets());
  for (int t = 0; t < pm.mesh.num_tets(); ++t) {
    AffineField f;
    f.gradient = field_gradient(pm.mesh, pm.field, t);
    const int v0 = pm.mesh.tets[t][0];
    f.offset = pm.field.values[v0] - f.gradient.dot(pm.mesh.vertices[v0]);
    geom.tet_fields_.push_back(f);
  }
  geom.compliant_ = std::move(pm);
  return geom;
}

BodyGeometry BodyGeometry::make_rigid(RigidGeometry rg) {
  validate_surface_mesh(rg.surface);
  BodyGeometry geom;
  geom.bvh_ = build_bvh(rg.surface);
  geom.rigid_ = std::move(rg);
  return geom;
}

std::optional<Plane> equilibrium_plane(const AffineField& field_a,
                                       const AffineField& field_b) {
  const Eigen::Vector3d direction = field_b.gradient - field_a.gradient;
  const double scale =
      std::max(field_a.gradient.norm(), field_b.gradient.norm());
  const double length = direction.norm();
  if (length <= kParallelGradientTolerance * scale || length == 0.0) {
    return std::nullopt;
  }
  Plane plane;
  plane.normal = direction / length;
  plane.offset = (field_a.offset - field_b.offset) / length;
  return plane;
}

std::vector<Eigen::Vector3d> clip_polygon_half_space(
    std::vector<Eigen::Vector3d> polygon, const Eigen::Vector3d& normal,
    double offset) {
  std::vector<Eigen::Vector3d> kept;
  kept.reserve(polygon.size() + 1);
  for (size_t i = 0; i < polygon.size(); ++i) {
    const Eigen::Vector3d& current = polygon[i];
    const Eigen::Vector3d& next = polygon[(i + 1) % polygon.size()];
    const double d0 = normal.dot(current) - offset;
    const double d1 = normal.dot(next) - offset;
    if (d0 <= 0.0) kept.push_back(current);
    if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
      kept.push_back(current + (d0 / (d0 - d1)) * (next - current));
    }
  }
  return kept;
}

std::vector<Eigen::Vector3d> clip_polygon_by_tet(
    std::vector<Eigen::Vector3d> polygon, const TetMesh& mesh,
    const RigidPose& pose, int tet) {
  const auto& t = mesh.tets[tet];
  for (const auto& f : kTetFaces) {
    if (polygon.empty()) break;
    const Eigen::Vector3d a = world_vertex(mesh, pose, t[f[0]]);
    const Eigen::Vector3d b = world_vertex(mesh, pose, t[f[1]]);
    const Eigen::Vector3d c = world_vertex(mesh, pose, t[f[2]]);
    const Eigen::Vector3d n = (b - a).cross(c - a).normalized();
    polygon = clip_polygon_half_space(std::move(polygon), n, n.dot(a));
  }
  return polygon;
}

std::optional<ContactPolygon> tet_tet_contact_polygon(
    const BodyGeometry& body_a, const RigidPose& pose_a, int tet_a,
    const BodyGeometry& body_b, const RigidPose& pose_b, int tet_b) {
  const TetMesh& mesh_a = body_a.compliant().mesh;
  const TetMesh& mesh_b = body_b.compliant().mesh;
  const AffineField field_a = world_field(body_a.tet_field(tet_a), pose_a);
  const AffineField field_b = world_field(body_b.tet_field(tet_b), pose_b);
  const auto plane = equilibrium_plane(field_a, field_b);
  if (!plane) return std::nullopt;

  // Seed with a rectangle on the plane large enough to contain any possible
  // intersection, so the final polygon is bounded by tet faces only (at most
  // eight edges).
  Eigen::Vector3d lo = world_vertex(mesh_a, pose_a, mesh_a.tets[tet_a][0]);
  Eigen::Vector3d hi = lo;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector3d va =
        world_vertex(mesh_a, pose_a, mesh_a.tets[tet_a][k]);
    const Eigen::Vector3d vb =
        world_vertex(mesh_b, pose_b, mesh_b.tets[tet_b][k]);
    lo = lo.cwiseMin(va).cwiseMin(vb);
    hi = hi.cwiseMax(va).cwiseMax(vb);
    center += 0.125 * (va + vb);
  }
  const double reach = 2.5 * (hi - lo).norm();
  center -= plane->signed_distance(center) * plane->normal;
  Eigen::Vector3d t1, t2;
  plane_basis(plane->normal, t1, t2);
  std::vector<Eigen::Vector3d> polygon = {
      center + reach * (t1 + t2), center + reach * (t2 - t1),
      center - reach * (t1 + t2), center + reach * (t1 - t2)};

  polygon = clip_polygon_by_tet(std::move(polygon), mesh_a, pose_a, tet_a);
  polygon = clip_polygon_by_tet(std::move(polygon), mesh_b, pose_b, tet_b);
  auto result = finish_polygon(std::move(polygon), *plane, 8);
  if (!result) return std::nullopt;

  result->pressure = 0.5 * (field_a(result->centroid) + field_b(result->centroid));
  result->pressure_gradient =
      field_a.gradient - field_a.gradient.dot(plane->normal) * plane->normal;
  result->grad_a = -field_a.gradient.dot(plane->normal);
  result->grad_b = field_b.gradient.dot(plane->normal);
  result->element_a = tet_a;
  result->element_b = tet_b;
  return result;
}

std::optional<ContactPolygon> rigid_tri_contact_polygon(
    const BodyGeometry& body_a, const RigidPose& pose_a, int triangle,
    const BodyGeometry& body_b, const RigidPose& pose_b, int tet_b) {
  const SurfaceMesh& surface = body_a.rigid().surface;
  const auto& tri = surface.triangles[triangle];
  const Eigen::Vector3d a = pose_a * surface.vertices[tri[0]];
  const Eigen::Vector3d b = pose_a * surface.vertices[tri[1]];
  const Eigen::Vector3d c = pose_a * surface.vertices[tri[2]];
  const Eigen::Vector3d n = (b - a).cross(c - a);
  const double n_norm = n.norm();
  if (n_norm <= 0.0) return std::nullopt;
  // The rigid surface winds outward, so the face normal already points from
  // the rigid body (A) into whatever it penetrates (B).
  Plane plane{n / n_norm, 0.0};
  plane.offset = plane.normal.dot(a);

  std::vector<Eigen::Vector3d> polygon = {a, b, c};
  polygon = clip_polygon_by_tet(std::move(polygon),
                                body_b.compliant().mesh, pose_b, tet_b);
  auto result = finish_polygon(std::move(polygon), plane, 7);
  if (!result) return std::nullopt;

  const AffineField field_b = world_field(body_b.tet_field(tet_b), pose_b);
  result->pressure = field_b(result->centroid);
  result->pressure_gradient =
      field_b.gradient - field_b.gradient.dot(plane.normal) * plane.normal;
  result->grad_a = std::numeric_limits<double>::infinity();
  result->grad_b = field_b.gradient.dot(plane.normal);
  result->element_a = triangle;
  result->element_b = tet_b;
  return result;
}

ContactSurface compute_contact_surface(const BodyGeometry& body_a,
                                       const RigidPose& pose_a, int index_a,
                                       const BodyGeometry& body_b,
                                       const RigidPose& pose_b, int index_b,
                                       ContactTimings* timings) {
  if (body_a.is_rigid() && body_b.is_rigid()) {
    throw std::runtime_error("rigid-rigid contact is not supported");
  }
  if (!body_a.is_rigid() && body_b.is_rigid()) {
    // The rigid body always plays the A role so its face normals orient the
    // contact surface.
    return compute_contact_surface(body_b, pose_b, index_b, body_a, pose_a,
                                   index_a, timings);
  }
  ContactSurface surface;
  surface.body_a = index_a;
  surface.body_b = index_b;
  const auto broad_start = std::chrono::steady_clock::now();
  const auto pairs = candidate_pairs(body_a.bvh(), pose_a, body_b.bvh(), pose_b);
  const auto narrow_start = std::chrono::steady_clock::now();
  for (const auto& [ea, eb] : pairs) {
    std::optional<ContactPolygon> poly =
        body_a.is_rigid()
            ? rigid_tri_contact_polygon(body_a, pose_a, ea, body_b, pose_b, eb)
            : tet_tet_contact_polygon(body_a, pose_a, ea, body_b, pose_b, eb);
    if (poly) surface.polygons.push_back(std::move(*poly));
  }
  if (timings) {
    const auto end = std::chrono::steady_clock::now();
    timings->broadphase_seconds +=
        std::chrono::duration<double>(narrow_start - broad_start).count();
    timings->narrowphase_seconds +=
        std::chrono::duration<double>(end - narrow_start).count();
  }
  return surface;
}

ContactSurface triangulate(const ContactSurface& surface) {
  ContactSurface fine;
  fine.body_a = surface.body_a;
  fine.body_b = surface.body_b;
  for (const auto& poly : surface.polygons) {
    const size_t n = poly.vertices.size();
    for (size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d& v0 = poly.vertices[i];
      const Eigen::Vector3d& v1 = poly.vertices[(i + 1) % n];
      ContactPolygon tri = poly;
      tri.vertices = {poly.centroid, v0, v1};
      // Keep every fan triangle, however small: the fan must cover the
      // polygon exactly or the two tessellations stop carrying identical
      // net force.
      tri.area = std::max(
          0.0,
          0.5 * (v0 - poly.centroid).cross(v1 - poly.centroid).dot(poly.normal));
      tri.centroid = (poly.centroid + v0 + v1) / 3.0;
      tri.pressure = poly.pressure +
                     poly.pressure_gradient.dot(tri.centroid - poly.centroid);
      fine.polygons.push_back(std::move(tri));
    }
  }
  return fine;
}

void write_polygon_soup(std::ostream& out,
                        const std::vector<ContactSurface>& surfaces) {
  out << "# contact surface polygon soup\n";
  out << "# face: nv x1 y1 z1 ... pressure nx ny nz\n";
  for (const auto& surface : surfaces) {
    out << "surface " << surface.body_a << " " << surface.body_b << " "
        << surface.polygons.size() << "\n";
    for (const auto& poly : surface.polygons) {
      out << poly.vertices.size();
      for (const auto& v : poly.vertices) {
        append_soup_scalar(out, v.x());
        append_soup_scalar(out, v.y());
        append_soup_scalar(out, v.z());
      }
      append_soup_scalar(out, poly.pressure);
      append_soup_scalar(out, poly.normal.x());
      append_soup_scalar(out, poly.normal.y());
      append_soup_scalar(out, poly.normal.z());
      out << "\n";
    }
  }
}

}  // namespace hydro
