#include "hydro/pressure_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hydro {
namespace {

void append_tet_oriented(TetMesh& mesh, std::array<int, 4> tet) {
  if (tet_volume(mesh.vertices[tet[0]], mesh.vertices[tet[1]],
                 mesh.vertices[tet[2]], mesh.vertices[tet[3]]) < 0.0) {
    std::swap(tet[2], tet[3]);
  }
  mesh.tets.push_back(tet);
}

// Splits the hexahedral cell spanned by `corner(dx,dy,dz)` into six
// tetrahedra along the main diagonal (Kuhn split). Applying the same split to
// every cell of a structured grid yields a conforming mesh.
template <typename CornerFn>
void kuhn_split(TetMesh& mesh, const CornerFn& corner) {
  static constexpr int kAxisOrders[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                            {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& order : kAxisOrders) {
    std::array<std::array<int, 3>, 4> offsets{};
    offsets[0] = {0, 0, 0};
    for (int step = 0; step < 2; ++step) {
      offsets[step + 1] = offsets[step];
      offsets[step + 1][order[step]] = 1;
    }
    offsets[3] = {1, 1, 1};
    std::array<int, 4> tet{};
    for (int i = 0; i < 4; ++i) {
      tet[i] = corner(offsets[i][0], offsets[i][1], offsets[i][2]);
    }
    append_tet_oriented(mesh, tet);
  }
}

// Splits the prism between two copies of triangle (v0,v1,v2) into three
// tetrahedra. Diagonals on the quad side faces are chosen by global vertex
// index, so prisms sharing a face agree on its triangulation.
void prism_split(TetMesh& mesh, std::array<int, 3> bottom,
                 std::array<int, 3> top) {
  std::array<int, 3> perm = {0, 1, 2};
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return bottom[a] < bottom[b]; });
  const std::array<int, 3> b = {bottom[perm[0]], bottom[perm[1]],
                                bottom[perm[2]]};
  const std::array<int, 3> t = {top[perm[0]], top[perm[1]], top[perm[2]]};
  append_tet_oriented(mesh, {b[0], b[1], b[2], t[2]});
  append_tet_oriented(mesh, {b[0], b[1], t[2], t[1]});
  append_tet_oriented(mesh, {b[0], t[1], t[2], t[0]});
}

// Grid coordinate that is exact at both ends and at the midpoint, so
// boundary and medial vertices land where the pressure formula needs them.
double grid_coord(double lo, double hi, int i, int n) {
  if (i == 0) return lo;
  if (i == n) return hi;
  if (n % 2 == 0 && i == n / 2) return 0.5 * (lo + hi);
  return lo + (hi - lo) * (static_cast<double>(i) / n);
}

int cells_for(double length, double resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("resolution must be positive");
  return std::max(1, static_cast<int>(std::ceil(length / resolution - 1e-9)));
}

}  // namespace

PressureMesh make_box(const Eigen::Vector3d& half_sizes,
                      double hydroelastic_modulus, double resolution) {
  if ((half_sizes.array() <= 0.0).any()) {
    throw std::invalid_argument("box half sizes must be positive");
  }
  if (hydroelastic_modulus < 0.0) {
    throw std::invalid_argument("hydroelastic modulus must be nonnegative");
  }
  if (resolution > half_sizes.minCoeff() * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "resolution must not exceed the smallest half size");
  }
  std::array<int, 3> n{};
  for (int axis = 0; axis < 3; ++axis) {
    // Even counts so x = 0 is a grid plane and the medial axis is resolved.
    n[axis] = 2 * cells_for(half_sizes[axis], resolution);
  }

  PressureMesh pm;
  pm.hydroelastic_modulus = hydroelastic_modulus;
  const double d_max = half_sizes.minCoeff();
  const auto vid = [&](int i, int j, int k) {
    return (i * (n[1] + 1) + j) * (n[2] + 1) + k;
  };
  for (int i = 0; i <= n[0]; ++i) {
    for (int j = 0; j <= n[1]; ++j) {
      for (int k = 0; k <= n[2]; ++k) {
        Eigen::Vector3d v(grid_coord(-half_sizes[0], half_sizes[0], i, n[0]),
                          grid_coord(-half_sizes[1], half_sizes[1], j, n[1]),
                          grid_coord(-half_sizes[2], half_sizes[2], k, n[2]));
        pm.mesh.vertices.push_back(v);
        const double dist =
            (half_sizes - v.cwiseAbs()).minCoeff();  // distance to boundary
        pm.field.values.push_back(hydroelastic_modulus * (dist / d_max));
      }
    }
  }
  for (int i = 0; i < n[0]; ++i) {
    for (int j = 0; j < n[1]; ++j) {
      for (int k = 0; k < n[2]; ++k) {
        kuhn_split(pm.mesh, [&](int di, int dj, int dk) {
          return vid(i + di, j + dj, k + dk);
        });
      }
    }
  }
  validate_pressure_mesh(pm);
  return pm;
}

PressureMesh make_cylinder(double radius, double height,
                           double hydroelastic_modulus, double resolution) {
  if (radius <= 0.0 || height <= 0.0) {
    throw std::invalid_argument("cylinder dimensions must be positive");
  }
  if (hydroelastic_modulus < 0.0) {
    throw std::invalid_argument("hydroelastic modulus must be nonnegative");
  }
  // Thin disks are meshed with cells wider than they are tall, so only the
  // radial direction bounds the resolution.
  const double half_height = 0.5 * height;
  if (resolution > radius * (1.0 + 1e-12)) {
    throw std::invalid_argument("resolution must not exceed the radius");
  }
  // At least eight angular steps keeps slivers away from the axis.
  const int ntheta = std::max(
      8, static_cast<int>(std::ceil(2.0 * M_PI * radius / resolution - 1e-9)));
  const double modulus = hydroelastic_modulus;

  // Cross-section of the solid of revolution in the (r, z) half-plane.
  // Interior vertices sit only on the medial set (full modulus) and every
  // triangle joins the boundary to the medial set without straddling a
  // distance-function regime boundary, so the linear interpolant of the
  // distance-based pressure is exact on every cell at every resolution. The
  // remaining discretization error is the polygonal circumference. A grid
  // mesh instead leaves rim cells whose corners are all on the boundary;
  // their zero field silently unloads an entire annulus of the contact patch.
  struct SectionVertex {
    double r, z, value;
  };
  std::vector<SectionVertex> section;
  std::vector<std::array<int, 3>> tris;
  const auto add_vertex = [&](double r, double z, double value) {
    section.push_back({r, z, value});
    return static_cast<int>(section.size()) - 1;
  };

  if (half_height <= radius) {
    // Squat cylinder: the medial set is the disk z = 0, r <= R - h/2.
    const double rm = radius - half_height;
    const int nm = rm > 0.0 ? cells_for(rm, resolution) : 0;
    std::vector<int> bottom(nm + 2), mid(nm + 1), top(nm + 2);
    for (int i = 0; i <= nm; ++i) {
      const double r = nm == 0 ? 0.0 : grid_coord(0.0, rm, i, nm);
      bottom[i] = add_vertex(r, -half_height, 0.0);
      mid[i] = add_vertex(r, 0.0, modulus);
      top[i] = add_vertex(r, half_height, 0.0);
    }
    bottom[nm + 1] = add_vertex(radius, -half_height, 0.0);
    top[nm + 1] = add_vertex(radius, half_height, 0.0);
    for (int i = 0; i < nm; ++i) {
      tris.push_back({bottom[i], bottom[i + 1], mid[i + 1]});
      tris.push_back({bottom[i], mid[i + 1], mid[i]});
      tris.push_back({top[i], top[i + 1], mid[i + 1]});
      tris.push_back({top[i], mid[i + 1], mid[i]});
    }
    // Rim band between the medial edge and the side wall. Its triangle edges
    // lie exactly on the cap/side regime bisectors because R - rm = h/2.
    tris.push_back({mid[nm], bottom[nm], bottom[nm + 1]});
    tris.push_back({mid[nm], bottom[nm + 1], top[nm + 1]});
    tris.push_back({mid[nm], top[nm + 1], top[nm]});
  } else {
    // Tall cylinder: the medial set is the axis segment |z| <= h/2 - R.
    const double zm = half_height - radius;
    const int na = 2 * cells_for(zm, resolution);
    std::vector<int> axis(na + 1), side(na + 1);
    for (int k = 0; k <= na; ++k) {
      const double z = grid_coord(-zm, zm, k, na);
      axis[k] = add_vertex(0.0, z, modulus);
      side[k] = add_vertex(radius, z, 0.0);
    }
    const int bottom_corner = add_vertex(radius, -half_height, 0.0);
    const int bottom_center = add_vertex(0.0, -half_height, 0.0);
    const int top_corner = add_vertex(radius, half_height, 0.0);
    const int top_center = add_vertex(0.0, half_height, 0.0);
    for (int k = 0; k < na; ++k) {
      tris.push_back({axis[k], side[k], side[k + 1]});
      tris.push_back({axis[k], side[k + 1], axis[k + 1]});
    }
    tris.push_back({axis[0], bottom_corner, side[0]});
    tris.push_back({axis[0], bottom_center, bottom_corner});
    tris.push_back({axis[na], side[na], top_corner});
    tris.push_back({axis[na], top_corner, top_center});
  }

  PressureMesh pm;
  pm.hydroelastic_modulus = hydroelastic_modulus;
  const int num_section = static_cast<int>(section.size());
  std::vector<int> base(num_section);
  std::vector<bool> on_axis(num_section);
  for (int i = 0; i < num_section; ++i) {
    on_axis[i] = section[i].r == 0.0;
    base[i] = pm.mesh.num_vertices();
    const int copies = on_axis[i] ? 1 : ntheta;
    for (int j = 0; j < copies; ++j) {
      const double theta = 2.0 * M_PI * j / ntheta;
      pm.mesh.vertices.emplace_back(section[i].r * std::cos(theta),
                                    section[i].r * std::sin(theta),
                                    section[i].z);
      pm.field.values.push_back(section[i].value);
    }
  }
  const auto vid = [&](int ci, int j) {
    return on_axis[ci] ? base[ci] : base[ci] + (j % ntheta);
  };
  for (int j = 0; j < ntheta; ++j) {
    for (const auto& tri : tris) {
      std::array<int, 2> axis_vs{}, ring_vs{};
      int num_axis = 0, num_ring = 0;
      for (int v : tri) {
        (on_axis[v] ? axis_vs[num_axis++] : ring_vs[num_ring++]) = v;
      }
      if (num_axis == 0) {
        prism_split(pm.mesh,
                    {vid(tri[0], j), vid(tri[1], j), vid(tri[2], j)},
                    {vid(tri[0], j + 1), vid(tri[1], j + 1), vid(tri[2], j + 1)});
      } else if (num_axis == 1) {
        // Revolving gives a pyramid: apex on the axis over the quad swept by
        // the ring edge. Split the quad from the smaller column so stacked
        // prisms, which sort columns the same way, agree on the diagonal.
        int p = ring_vs[0], q = ring_vs[1];
        if (vid(p, j) > vid(q, j)) std::swap(p, q);
        const int apex = vid(axis_vs[0], 0);
        append_tet_oriented(pm.mesh,
                            {apex, vid(p, j), vid(p, j + 1), vid(q, j + 1)});
        append_tet_oriented(pm.mesh,
                            {apex, vid(p, j), vid(q, j + 1), vid(q, j)});
      } else {
        // Two axis vertices: the wedge is already a tetrahedron.
        append_tet_oriented(pm.mesh,
                            {vid(axis_vs[0], 0), vid(axis_vs[1], 0),
                             vid(ring_vs[0], j), vid(ring_vs[0], j + 1)});
      }
    }
  }
  validate_pressure_mesh(pm);
  return pm;
}

PressureMesh make_half_space_slab(double thickness, double extent,
                                  double hydroelastic_modulus,
                                  double resolution) {
  if (thickness <= 0.0 || extent <= 0.0) {
    throw std::invalid_argument("slab dimensions must be positive");
  }
  if (hydroelastic_modulus < 0.0) {
    throw std::invalid_argument("hydroelastic modulus must be nonnegative");
  }
  const int nx = cells_for(extent, resolution);
  const int nz = cells_for(thickness, resolution);

  PressureMesh pm;
  pm.hydroelastic_modulus = hydroelastic_modulus;
  const auto vid = [&](int i, int j, int k) {
    return (i * (nx + 1) + j) * (nz + 1) + k;
  };
  const double half_extent = 0.5 * extent;
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= nx; ++j) {
      for (int k = 0; k <= nz; ++k) {
        const double z = grid_coord(-thickness, 0.0, k, nz);
        pm.mesh.vertices.emplace_back(
            grid_coord(-half_extent, half_extent, i, nx),
            grid_coord(-half_extent, half_extent, j, nx), z);
        // Depth-proportional field: the bottom face models an interior cut
        // through the half space, not a physical boundary, so it carries the
        // full modulus.
        pm.field.values.push_back(hydroelastic_modulus * (-z / thickness));
      }
    }
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nx; ++j) {
      for (int k = 0; k < nz; ++k) {
        kuhn_split(pm.mesh, [&](int di, int dj, int dk) {
          return vid(i + di, j + dj, k + dk);
        });
      }
    }
  }
  validate_pressure_mesh(pm, /*boundary_zero=*/false);
  return pm;
}

void validate_pressure_mesh(const PressureMesh& pm, bool boundary_zero) {
  validate_tet_mesh(pm.mesh);
  validate_vertex_field(pm.mesh, pm.field, boundary_zero);
  if (pm.hydroelastic_modulus < 0.0) {
    throw std::invalid_argument("hydroelastic modulus must be nonnegative");
  }
  double max_value = 0.0;
  for (double v : pm.field.values) {
    if (v < 0.0 || v > pm.hydroelastic_modulus * (1.0 + 1e-9)) {
      throw std::invalid_argument("pressure value out of [0, modulus] range");
    }
    max_value = std::max(max_value, v);
  }
  if (std::abs(max_value - pm.hydroelastic_modulus) >
      1e-9 * pm.hydroelastic_modulus) {
    throw std::invalid_argument(
        "pressure field does not reach the hydroelastic modulus");
  }
}

}  // namespace hydro
