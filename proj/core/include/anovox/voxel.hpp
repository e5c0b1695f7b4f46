#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "anovox/mesh.hpp"

namespace anovox {

/// Axis-aligned voxel grid: origin is the minimum corner, voxels are cubes
/// of voxel_size mm, linear indexing is x-fastest.
struct GridSpec {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 2.0;
  std::array<std::uint32_t, 3> dims{1, 1, 1};

  void validate() const;
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t linear_index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k);
  }
  std::array<std::uint32_t, 3> unravel(std::size_t linear) const;
  Vec3 voxel_min(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    return origin + voxel_size * Vec3(i, j, k);
  }

  bool operator==(const GridSpec& other) const;
};

/// Per-axis floor((p - origin) / voxel_size) without any bounds handling.
std::array<std::int64_t, 3> point_to_cell(const GridSpec& spec, const Vec3& p);

/// Voxel index of a point, or nullopt when it falls outside the grid.
/// Out-of-bounds is reported distinctly, never clamped.
std::optional<std::array<std::uint32_t, 3>> point_to_voxel(const GridSpec& spec, const Vec3& p);

/// Grid covering the mesh AABB expanded by `padding` voxels on every side.
GridSpec grid_from_mesh(const TriangleMesh& mesh, double voxel_size, int padding = 1);

/// Bit-packed boolean mask in x-fastest voxel order.
class VoxelMask {
 public:
  VoxelMask() = default;
  explicit VoxelMask(std::size_t count) : count_(count), bits_((count + 63) / 64, 0) {}

  bool get(std::size_t i) const { return (bits_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { bits_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  std::size_t size() const { return count_; }
  std::size_t popcount() const;

  std::vector<std::uint64_t>& words() { return bits_; }
  const std::vector<std::uint64_t>& words() const { return bits_; }

 private:
  std::size_t count_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Occupancy + per-voxel defect blob ID (0 = nominal). Blob IDs present form
/// the contiguous set {1..blob_count}.
struct GroundTruthVolume {
  GridSpec spec;
  VoxelMask occupancy;
  std::vector<std::uint16_t> labels;
  std::uint16_t blob_count = 0;

  void validate() const;
};

/// Per-voxel anomaly scores; untouched voxels carry the neutral score 0.
struct AnomalyVolume {
  GridSpec spec;
  std::vector<double> scores;
  VoxelMask touched;

  static AnomalyVolume zeros(const GridSpec& spec);
};

/// Exact triangle vs axis-aligned box separating-axis test; touching at a
/// boundary counts as intersecting.
bool triangle_box_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                            const Vec3& box_min, const Vec3& box_max);

/// Converts a labeled mesh into an occupancy + blob-ID volume: a voxel is
/// occupied iff it intersects at least one triangle, and labelled iff one of
/// those triangles is anomalous (triangle label = smallest nonzero vertex
/// label; voxel ties resolve to the smallest ID). Distinct IDs are remapped
/// to the contiguous range {1..N} preserving order. Every triangle must lie
/// within the grid bounds, otherwise ValidationError listing offenders.
GroundTruthVolume voxelize_labeled_mesh(const TriangleMesh& mesh, const GridSpec& spec,
                                        int threads = 1);

}  // namespace anovox
