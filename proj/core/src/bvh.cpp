#include "anovox/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace anovox {

std::optional<RayHit> ray_triangle_intersect(const Ray& ray, const Vec3& v0, const Vec3& v1,
                                             const Vec3& v2) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (det == 0.0) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - v0;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = ray.direction.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (!(t > 0.0)) return std::nullopt;
  RayHit hit;
  hit.t = t;
  hit.u = u;
  hit.v = v;
  return hit;
}

namespace {

// Slab test against the current best t; entry/exit handle zero direction
// components via IEEE infinities.
bool box_hit(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double near = (box.min[a] - origin[a]) * inv_dir[a];
    double far = (box.max[a] - origin[a]) * inv_dir[a];
    if (near > far) std::swap(near, far);
    if (std::isnan(near) || std::isnan(far)) continue;  // ray parallel inside slab limits
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

Bvh::Bvh(const TriangleMesh& mesh) {
  if (mesh.triangles.empty()) throw ValidationError("bvh: empty mesh");
  mesh.validate();

  const std::size_t n = mesh.triangles.size();
  triangle_vertices_.resize(n);
  std::vector<Aabb> boxes(n);
  std::vector<Vec3> centroids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tri = mesh.triangles[i];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    triangle_vertices_[i] = {a, b, c};
    boxes[i].grow(a);
    boxes[i].grow(b);
    boxes[i].grow(c);
    centroids[i] = (a + b + c) / 3.0;
  }

  ordered_.resize(n);
  for (std::size_t i = 0; i < n; ++i) ordered_[i] = static_cast<std::uint32_t>(i);
  nodes_.reserve(2 * n);
  build(ordered_, 0, static_cast<std::uint32_t>(n), boxes, centroids);
}

std::int32_t Bvh::build(std::vector<std::uint32_t>& order, std::uint32_t first,
                        std::uint32_t count, const std::vector<Aabb>& boxes,
                        const std::vector<Vec3>& centroids) {
  Node node;
  for (std::uint32_t i = first; i < first + count; ++i) node.box.grow(boxes[order[i]]);

  const std::int32_t index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  if (count <= 4) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }

  Aabb centroid_box;
  for (std::uint32_t i = first; i < first + count; ++i) centroid_box.grow(centroids[order[i]]);
  int axis;
  centroid_box.extent().maxCoeff(&axis);

  const std::uint32_t mid = first + count / 2;
  std::nth_element(order.begin() + first, order.begin() + mid, order.begin() + first + count,
                   [&](std::uint32_t a, std::uint32_t b) {
                     if (centroids[a][axis] != centroids[b][axis]) {
                       return centroids[a][axis] < centroids[b][axis];
                     }
                     return a < b;  // total order keeps the build deterministic
                   });

  const std::int32_t left = build(order, first, mid - first, boxes, centroids);
  const std::int32_t right = build(order, mid, first + count - mid, boxes, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

RayHit Bvh::intersect(const Ray& ray) const {
  const Vec3 inv_dir = ray.direction.cwiseInverse();
  RayHit best;

  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!box_hit(node.box, ray.origin, inv_dir, best.t)) continue;
    if (node.leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t tri = ordered_[i];
        const PackedTriangle& p = triangle_vertices_[tri];
        if (auto hit = ray_triangle_intersect(ray, p.v0, p.v1, p.v2)) {
          if (hit->t < best.t || (hit->t == best.t && tri < best.triangle)) {
            best = *hit;
            best.triangle = tri;
          }
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

}  // namespace anovox
