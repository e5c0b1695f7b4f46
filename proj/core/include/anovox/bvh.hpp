#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "anovox/mesh.hpp"

namespace anovox {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // need not be unit length; hit t is in units of |direction|
};

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  std::uint32_t triangle = UINT32_MAX;
  double u = 0.0;  // barycentric coordinates of the hit
  double v = 0.0;

  bool valid() const { return triangle != UINT32_MAX; }
};

/// Moller-Trumbore intersection against a single triangle; hits with t > 0
/// only. Exposed so exhaustive brute-force checks share the primitive test.
std::optional<RayHit> ray_triangle_intersect(const Ray& ray, const Vec3& v0, const Vec3& v1,
                                             const Vec3& v2);

/// Median-split BVH over mesh triangles (longest axis, leaves hold up to 4
/// triangles). Nearest-hit queries return exactly the brute-force minimum-t
/// answer; equal-t ties resolve to the lowest triangle index so results do
/// not depend on traversal order.
class Bvh {
 public:
  explicit Bvh(const TriangleMesh& mesh);

  RayHit intersect(const Ray& ray) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangle_vertices_.size(); }
  const Aabb& bounds() const { return nodes_.front().box; }

  struct PackedTriangle {
    Vec3 v0, v1, v2;
  };
  const PackedTriangle& triangle(std::uint32_t id) const { return triangle_vertices_[id]; }

 private:
  struct Node {
    Aabb box;
    std::int32_t left = -1;    // internal: child node indices
    std::int32_t right = -1;
    std::uint32_t first = 0;   // leaf: range into ordered triangle list
    std::uint32_t count = 0;
    bool leaf() const { return count > 0; }
  };

  std::int32_t build(std::vector<std::uint32_t>& order, std::uint32_t first,
                     std::uint32_t count, const std::vector<Aabb>& boxes,
                     const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> ordered_;            // triangle indices, leaf-contiguous
  std::vector<PackedTriangle> triangle_vertices_; // indexed by original triangle id
};

}  // namespace anovox
