#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anovox/geometry.hpp"
#include "anovox/mesh.hpp"
#include "anovox/voxel.hpp"

namespace anovox {

/// Dense 2D defect-ID mask aligned with a view image (0 = nominal).
struct AnnotationImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> ids;

  AnnotationImage() = default;
  AnnotationImage(int w, int h) : width(w), height(h), ids(static_cast<std::size_t>(w) * h, 0) {}
  std::uint16_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }
};

struct AnnotatedView {
  AnnotationImage image;
  std::size_t view_index = 0;
};

struct LiftOptions {
  /// Z-buffer visibility tolerance in mm; one voxel size by default.
  double visibility_tolerance_mm = 2.0;
  int threads = 1;
};

struct LiftResult {
  TriangleMesh labeled_mesh;
  /// Vertices that collected disagreeing nonzero IDs across views; exported
  /// so the ambiguity can be refined in an external editor.
  std::vector<std::uint32_t> conflicted_vertices;
};

/// Lifts 2D annotation images onto mesh vertices: every vertex is projected
/// into each annotated view, kept only when it passes a z-buffer visibility
/// test against the mesh's own rendered depth, and tagged with the ID found
/// at its pixel. Multi-view conflicts resolve by majority, ties by smallest
/// ID; invisible vertices stay 0.
LiftResult lift_annotations(const TriangleMesh& mesh, std::span<const AnnotatedView> views,
                            const FrameChain& chain, const CameraIntrinsics& intr,
                            const LiftOptions& options = {});

/// Voxelizes a labeled mesh into the ground-truth volume (delegates to
/// voxelize_labeled_mesh; a triangle inherits the smallest nonzero label of
/// its vertices).
GroundTruthVolume build_ground_truth(const TriangleMesh& labeled_mesh, const GridSpec& spec,
                                     int threads = 1);

}  // namespace anovox
