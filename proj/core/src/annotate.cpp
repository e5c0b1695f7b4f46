#include "anovox/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "anovox/bvh.hpp"
#include "anovox/parallel.hpp"
#include "anovox/render.hpp"

namespace anovox {

LiftResult lift_annotations(const TriangleMesh& mesh, std::span<const AnnotatedView> views,
                            const FrameChain& chain, const CameraIntrinsics& intr,
                            const LiftOptions& options) {
  mesh.validate();
  if (mesh.vertices.empty()) throw ValidationError("lift: empty mesh");
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].view_index >= chain.view_count()) {
      throw ValidationError("lift: view " + std::to_string(views[v].view_index) +
                            " has no pose in the frame chain");
    }
    if (views[v].image.width != intr.width || views[v].image.height != intr.height) {
      throw ValidationError("lift: annotation resolution does not match the camera");
    }
  }

  const Bvh bvh(mesh);
  const int threads = resolve_threads(options.threads);

  // votes[vertex] -> (id -> count); filled view by view, in view order, but
  // the tally is order-independent.
  std::vector<std::map<std::uint16_t, int>> votes(mesh.vertices.size());

  for (const AnnotatedView& view : views) {
    const RigidTransform to_camera = chain.mesh_to_camera(view.view_index);
    const DepthMap depth = render_depth(bvh, intr, to_camera, threads);

    std::vector<std::uint16_t> view_ids(mesh.vertices.size(), 0);
    parallel_for_chunks(
        0, mesh.vertices.size(), threads, [&](std::size_t lo, std::size_t hi) {
          for (std::size_t v = lo; v < hi; ++v) {
            const Vec3 p = to_camera.apply(mesh.vertices[v]);
            if (p.z() <= 0.0) continue;
            Vec2 pixel;
            try {
              pixel = project_point(intr, p);
            } catch (const ValidationError&) {
              continue;
            }
            const int px = static_cast<int>(std::lround(pixel.x()));
            const int py = static_cast<int>(std::lround(pixel.y()));
            if (px < 0 || px >= intr.width || py < 0 || py >= intr.height) continue;
            const double rendered = depth.at(px, py);
            if (rendered <= 0.0) continue;
            if (std::abs(p.z() - rendered) > options.visibility_tolerance_mm) continue;
            view_ids[v] = view.image.at(px, py);
          }
        });
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      if (view_ids[v] != 0) ++votes[v][view_ids[v]];
    }
  }

  LiftResult result;
  result.labeled_mesh = mesh;
  result.labeled_mesh.labels.assign(mesh.vertices.size(), 0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (votes[v].empty()) continue;
    // Majority vote; the map is ordered by ID so ties pick the smallest.
    std::uint16_t winner = 0;
    int best = 0;
    for (const auto& [id, count] : votes[v]) {
      if (count > best) {
        winner = id;
        best = count;
      }
    }
    result.labeled_mesh.labels[v] = winner;
    if (votes[v].size() > 1) result.conflicted_vertices.push_back(static_cast<std::uint32_t>(v));
  }
  return result;
}

GroundTruthVolume build_ground_truth(const TriangleMesh& labeled_mesh, const GridSpec& spec,
                                     int threads) {
  if (!labeled_mesh.has_labels()) {
    throw ValidationError("build_ground_truth: mesh carries no labels");
  }
  return voxelize_labeled_mesh(labeled_mesh, spec, threads);
}

}  // namespace anovox
