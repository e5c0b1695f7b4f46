#pragma once

#include <filesystem>

#include "anovox/mesh.hpp"

namespace anovox {

/// PLY mesh I/O, ASCII and binary little-endian. Vertex positions are f32 on
/// disk; when the mesh carries labels they are written as the u16 vertex
/// property "label". Degenerate triangles are filtered at load time.
struct PlyWriteOptions {
  bool binary = true;
};

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh,
               const PlyWriteOptions& options = {});

TriangleMesh read_ply(const std::filesystem::path& path);

}  // namespace anovox
