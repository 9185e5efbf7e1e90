#include "hydro/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace hydro {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

TetMeshData read_tet_mesh(std::istream& in) {
  std::string header;
  std::getline(in, header);
  TetMeshData data;
  int nv = 0;
  if (!(in >> nv) || nv <= 0) throw std::runtime_error("bad vertex count");
  data.mesh.vertices.resize(nv);
  for (auto& v : data.mesh.vertices) {
    if (!(in >> v.x() >> v.y() >> v.z())) {
      throw std::runtime_error("bad vertex line");
    }
  }
  int nt = 0;
  if (!(in >> nt) || nt <= 0) throw std::runtime_error("bad tet count");
  data.mesh.tets.resize(nt);
  for (auto& t : data.mesh.tets) {
    if (!(in >> t[0] >> t[1] >> t[2] >> t[3])) {
      throw std::runtime_error("bad tet line");
    }
  }
  // Reorient inverted tets; meshers disagree on vertex order.
  for (auto& t : data.mesh.tets) {
    const Eigen::Vector3d& v0 = data.mesh.vertices[t[0]];
    const double volume =
        (data.mesh.vertices[t[1]] - v0)
            .cross(data.mesh.vertices[t[2]] - v0)
            .dot(data.mesh.vertices[t[3]] - v0);
    if (volume < 0.0) std::swap(t[2], t[3]);
  }
  double value = 0.0;
  if (in >> value) {
    VertexField field;
    field.values.push_back(value);
    while (static_cast<int>(field.values.size()) < nv && in >> value) {
      field.values.push_back(value);
    }
    if (field.size() != nv) {
      throw std::runtime_error("pressure section has wrong value count");
    }
    data.field = std::move(field);
  }
  validate_tet_mesh(data.mesh);
  if (data.field) validate_vertex_field(data.mesh, *data.field, false);
  return data;
}

TetMeshData read_tet_mesh(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tet_mesh(in);
}

void write_tet_mesh(std::ostream& out, const TetMesh& mesh,
                    const VertexField* field) {
  char buf[96];
  out << "# hydrosim tet mesh v1\n";
  out << mesh.num_vertices() << "\n";
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  out << mesh.num_tets() << "\n";
  for (const auto& t : mesh.tets) {
    out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  }
  if (field != nullptr) {
    for (double p : field->values) {
      std::snprintf(buf, sizeof buf, "%.17g\n", p);
      out << buf;
    }
  }
}

void write_tet_mesh(const std::filesystem::path& path, const TetMesh& mesh,
                    const VertexField* field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_tet_mesh(out, mesh, field);
}

SurfaceMesh read_obj(std::istream& in) {
  SurfaceMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw std::runtime_error("bad OBJ vertex line");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> indices;
      std::string item;
      while (ls >> item) {
        // "i", "i/t", "i//n", "i/t/n" all start with the vertex index.
        const int index = std::stoi(item);
        if (index <= 0) throw std::runtime_error("bad OBJ face index");
        indices.push_back(index - 1);
      }
      if (indices.size() < 3) throw std::runtime_error("bad OBJ face line");
      for (size_t k = 1; k + 1 < indices.size(); ++k) {
        mesh.triangles.push_back({indices[0], indices[k], indices[k + 1]});
      }
    }
  }
  validate_surface_mesh(mesh);
  return mesh;
}

SurfaceMesh read_obj(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_obj(in);
}

}  // namespace hydro
