#pragma once

#include <cstdint>
#include <span>

#include "anovox/mesh.hpp"

namespace anovox {

struct RansacPlaneOptions {
  double tau = 30.0;      // inlier threshold on |n.p + d|, mm
  int iterations = 1000;
  int sample_size = 10;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// RANSAC plane fit: each iteration samples `sample_size` points, fits a
/// least-squares plane and counts inliers within tau. The winner (largest
/// consensus, ties broken by lowest iteration index) is refit over its
/// inliers. The returned normal points toward the side holding the majority
/// of the non-inlier points, i.e. toward the object sitting on the plane.
/// Bit-for-bit reproducible for a fixed seed, independent of thread count.
Plane ransac_plane(std::span<const Vec3> points, const RansacPlaneOptions& options);

struct BackgroundRemovalResult {
  TriangleMesh mesh;
  std::size_t removed_vertices = 0;
  bool empty_result = false;  // warning: the cut removed everything
};

/// Shifts the plane by alpha along its normal (positive alpha moves the cut
/// toward the object and removes more) and keeps the vertices strictly above
/// it: n.p + d > alpha. Triangles with any removed vertex are dropped and
/// vertex indices are compacted.
BackgroundRemovalResult remove_background(const TriangleMesh& mesh, const Plane& plane,
                                          double alpha);

}  // namespace anovox
