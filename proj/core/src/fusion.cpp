#include "anovox/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "anovox/parallel.hpp"

namespace anovox {

ViewProjection project_view(const AnomalyMap2D& map, const DepthMap& depth,
                            const CameraIntrinsics& intr, std::size_t view_index,
                            const FrameChain& chain, const GridSpec& spec) {
  if (map.width != depth.width || map.height != depth.height) {
    throw ValidationError("project_view: anomaly map " + std::to_string(map.width) + "x" +
                          std::to_string(map.height) + " does not match depth map " +
                          std::to_string(depth.width) + "x" + std::to_string(depth.height));
  }
  if (intr.width != depth.width || intr.height != depth.height) {
    throw ValidationError("project_view: intrinsics resolution does not match depth map");
  }
  spec.validate();
  for (double s : map.scores) {
    if (!std::isfinite(s)) throw ValidationError("project_view: non-finite anomaly score");
  }

  const RigidTransform camera_to_mesh = chain.camera_to_mesh(view_index);

  ViewProjection out;
  out.spec = spec;
  out.entries.reserve(map.scores.size() / 4);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double d = depth.at(x, y);
      if (d <= 0.0) continue;
      ++out.valid_pixels;
      const Vec3 p_camera = unproject_pixel(intr, Vec2(x, y), d);
      const Vec3 p_mesh = camera_to_mesh.apply(p_camera);
      const auto voxel = point_to_voxel(spec, p_mesh);
      if (!voxel) {
        ++out.out_of_bounds_pixels;
        continue;
      }
      out.entries.push_back(
          {spec.linear_index((*voxel)[0], (*voxel)[1], (*voxel)[2]), map.at(x, y)});
    }
  }
  return out;
}

AnomalyVolume fuse_views(std::span<const ViewProjection> projections, const GridSpec& spec,
                         int threads) {
  spec.validate();
  for (std::size_t v = 0; v < projections.size(); ++v) {
    if (!(projections[v].spec == spec)) {
      throw ValidationError("fuse_views: projection " + std::to_string(v) +
                            " references a different grid");
    }
  }

  const int workers =
      std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(projections.size())));

  // Each worker folds a slice of the views into its own partial volume; the
  // partials merge sequentially. Max pooling is exact, so any partitioning
  // produces identical bits.
  std::vector<AnomalyVolume> partials;
  partials.reserve(workers);
  for (int w = 0; w < workers; ++w) partials.push_back(AnomalyVolume::zeros(spec));

  const std::size_t per_worker = (projections.size() + workers - 1) / std::max(1, workers);
  parallel_for_chunks(0, static_cast<std::size_t>(workers), workers,
                      [&](std::size_t w0, std::size_t w1) {
                        for (std::size_t w = w0; w < w1; ++w) {
                          AnomalyVolume& vol = partials[w];
                          const std::size_t lo = w * per_worker;
                          const std::size_t hi =
                              std::min(projections.size(), lo + per_worker);
                          for (std::size_t v = lo; v < hi; ++v) {
                            for (const VoxelScore& e : projections[v].entries) {
                              if (!vol.touched.get(e.voxel)) {
                                vol.touched.set(e.voxel);
                                vol.scores[e.voxel] = e.score;
                              } else {
                                vol.scores[e.voxel] = std::max(vol.scores[e.voxel], e.score);
                              }
                            }
                          }
                        }
                      });

  AnomalyVolume result = std::move(partials.front());
  for (int w = 1; w < workers; ++w) {
    const AnomalyVolume& part = partials[w];
    const auto& words = part.touched.words();
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      std::uint64_t bits = words[wi];
      while (bits != 0) {
        const std::size_t i = (wi << 6) + static_cast<std::size_t>(std::countr_zero(bits));
        bits &= bits - 1;
        if (!result.touched.get(i)) {
          result.touched.set(i);
          result.scores[i] = part.scores[i];
        } else {
          result.scores[i] = std::max(result.scores[i], part.scores[i]);
        }
      }
    }
  }
  return result;
}

GlobalScore global_score(const AnomalyVolume& volume) {
  GlobalScore out;
  bool any = false;
  for (std::size_t i = 0; i < volume.scores.size(); ++i) {
    if (!volume.touched.get(i)) continue;
    if (!any || volume.scores[i] > out.value) out.value = volume.scores[i];
    any = true;
  }
  out.empty = !any;
  if (out.empty) out.value = 0.0;
  return out;
}

}  // namespace anovox
