#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hydro/mesh.hpp"

namespace hydro {

struct TetMeshData {
  TetMesh mesh;
  std::optional<VertexField> field;
};

/// ASCII tet mesh: header line, vertex count, one "x y z" line per vertex,
/// tet count, one "i j k l" line per tet (0-based), then optionally one
/// pressure scalar per vertex. Inverted tets are reoriented on load; the
/// result is validated.
TetMeshData read_tet_mesh(std::istream& in);
TetMeshData read_tet_mesh(const std::filesystem::path& path);

void write_tet_mesh(std::ostream& out, const TetMesh& mesh,
                    const VertexField* field = nullptr);
void write_tet_mesh(const std::filesystem::path& path, const TetMesh& mesh,
                    const VertexField* field = nullptr);

/// OBJ subset: `v x y z` and `f i j k ...` records only (1-based indices,
/// `i/t/n` forms accepted, faces with more than 3 vertices fan-triangulated).
SurfaceMesh read_obj(std::istream& in);
SurfaceMesh read_obj(const std::filesystem::path& path);

}  // namespace hydro
