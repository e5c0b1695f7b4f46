#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "anovox/geometry.hpp"

namespace anovox {

struct Aabb {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void grow(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool empty() const { return min.x() > max.x(); }
  Vec3 extent() const { return max - min; }
  bool contains(const Aabb& b) const {
    return (b.min.array() >= min.array()).all() && (b.max.array() <= max.array()).all();
  }
};

/// Indexed triangle mesh in millimetres, with an optional per-vertex defect
/// label (0 = nominal). labels is either empty or one entry per vertex.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<std::uint16_t> labels;

  bool has_labels() const { return !labels.empty(); }
  bool empty() const { return triangles.empty(); }

  /// Throws ValidationError on out-of-range indices or mismatched label
  /// count.
  void validate() const;

  Aabb bounds() const;

  /// Drops zero-area and repeated-index triangles. Called by the loaders.
  std::size_t remove_degenerate_triangles();

  /// Smallest nonzero label among the triangle's vertices, 0 if all nominal.
  std::uint16_t triangle_label(std::size_t triangle_index) const;
};

/// Oriented plane {p : n.p + d = 0} with unit normal.
struct Plane {
  Vec3 normal{0, 0, 1};
  double d = 0.0;

  Plane() = default;
  Plane(const Vec3& n, double d);

  double signed_distance(const Vec3& p) const { return normal.dot(p) + d; }
  Plane flipped() const { return Plane(-normal, -d); }
};

/// Per-pixel depth in mm along the camera z axis; 0 marks invalid pixels.
/// Values are kept in double precision in memory; the PFM codec stores f32.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthMap() = default;
  DepthMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  bool valid(int x, int y) const { return at(x, y) > 0.0; }
};

/// Grayscale image with values in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0.0) {}

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Organized point cloud, pixel-aligned with the depth map it came from.
struct PointCloud {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const;
};

}  // namespace anovox
