#include "anovox/mesh.hpp"

#include <algorithm>
#include <string>

namespace anovox {

void TriangleMesh::validate() const {
  const std::uint32_t n = static_cast<std::uint32_t>(vertices.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (std::uint32_t idx : triangles[t]) {
      if (idx >= n) {
        throw ValidationError("mesh: triangle " + std::to_string(t) +
                              " references vertex " + std::to_string(idx) +
                              " out of range");
      }
    }
  }
  if (!labels.empty() && labels.size() != vertices.size()) {
    throw ValidationError("mesh: label count does not match vertex count");
  }
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) box.grow(v);
  return box;
}

std::size_t TriangleMesh::remove_degenerate_triangles() {
  auto degenerate = [&](const std::array<std::uint32_t, 3>& t) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return true;
    const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    return e1.cross(e2).squaredNorm() == 0.0;
  };
  const std::size_t before = triangles.size();
  triangles.erase(std::remove_if(triangles.begin(), triangles.end(), degenerate),
                  triangles.end());
  return before - triangles.size();
}

std::uint16_t TriangleMesh::triangle_label(std::size_t triangle_index) const {
  if (labels.empty()) return 0;
  std::uint16_t best = 0;
  for (std::uint32_t idx : triangles[triangle_index]) {
    const std::uint16_t l = labels[idx];
    if (l != 0 && (best == 0 || l < best)) best = l;
  }
  return best;
}

Plane::Plane(const Vec3& n, double d_) : normal(n), d(d_) {
  const double len = n.norm();
  if (!(len > 0.0)) throw ValidationError("plane: zero normal");
  if (std::abs(len - 1.0) > 1e-12) {
    normal = n / len;
    d = d_ / len;
  }
}

std::size_t PointCloud::valid_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : valid) n += v != 0;
  return n;
}

}  // namespace anovox
