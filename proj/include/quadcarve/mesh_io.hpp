#pragma once

#include "quadcarve/mesh.hpp"

#include <filesystem>
#include <iosfwd>

namespace quadcarve {

enum class MeshFormat { Auto, OBJ, OFF };

// ASCII OBJ (v/f records; polygon faces are fan-triangulated) and ASCII OFF.
// Throws MeshError on parse failures and on every TriMesh::build rejection.
TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format = MeshFormat::Auto);
TriMesh read_obj(std::istream& in);
TriMesh read_off(std::istream& in);

void write_obj(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace quadcarve
