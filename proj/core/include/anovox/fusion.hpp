#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anovox/geometry.hpp"
#include "anovox/mesh.hpp"
#include "anovox/voxel.hpp"

namespace anovox {

/// Per-pixel anomaly scores produced by a singleview detector; validity is
/// implied by the paired depth map. Scores are assumed nonnegative (the
/// untouched-voxel neutral score is 0); maps with negative scores must be
/// shifted by the caller.
struct AnomalyMap2D {
  int width = 0;
  int height = 0;
  std::vector<double> scores;

  AnomalyMap2D() = default;
  AnomalyMap2D(int w, int h) : width(w), height(h), scores(static_cast<std::size_t>(w) * h, 0.0) {}
  double at(int x, int y) const { return scores[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return scores[static_cast<std::size_t>(y) * width + x]; }
};

struct VoxelScore {
  std::uint64_t voxel;  // linear index, x-fastest
  double score;
};

/// Scatter of one view into the grid, plus drop diagnostics.
struct ViewProjection {
  GridSpec spec;
  std::vector<VoxelScore> entries;
  std::uint64_t valid_pixels = 0;         // pixels with valid depth
  std::uint64_t out_of_bounds_pixels = 0; // valid pixels landing outside the grid
};

/// Lifts every valid-depth pixel to 3D in the CRF, chains it back into the
/// grid/mesh frame (invert(sensor_to_camera), then view_to_ref) and
/// discretises to the nearest voxel. One entry per in-bounds pixel;
/// out-of-bounds pixels are counted, never clamped.
ViewProjection project_view(const AnomalyMap2D& map, const DepthMap& depth,
                            const CameraIntrinsics& intr, std::size_t view_index,
                            const FrameChain& chain, const GridSpec& spec);

/// Voxel-wise max pooling over all projected scores. Deterministic and
/// bit-exact for any view order and any parallel partitioning.
AnomalyVolume fuse_views(std::span<const ViewProjection> projections, const GridSpec& spec,
                         int threads = 1);

struct GlobalScore {
  double value = 0.0;
  bool empty = false;  // warning: no voxel was touched
};

/// Maximum score across the touched voxels of the volume.
GlobalScore global_score(const AnomalyVolume& volume);

}  // namespace anovox
