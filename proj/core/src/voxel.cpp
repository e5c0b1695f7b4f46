#include "anovox/voxel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <string>

#include "anovox/parallel.hpp"

namespace anovox {

void GridSpec::validate() const {
  if (!(voxel_size > 0.0)) throw ValidationError("grid: voxel_size must be positive");
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw ValidationError("grid: dims must all be >= 1");
  }
  if (!origin.allFinite()) throw ValidationError("grid: origin must be finite");
}

std::array<std::uint32_t, 3> GridSpec::unravel(std::size_t linear) const {
  const std::uint32_t i = static_cast<std::uint32_t>(linear % dims[0]);
  linear /= dims[0];
  const std::uint32_t j = static_cast<std::uint32_t>(linear % dims[1]);
  const std::uint32_t k = static_cast<std::uint32_t>(linear / dims[1]);
  return {i, j, k};
}

bool GridSpec::operator==(const GridSpec& other) const {
  return origin == other.origin && voxel_size == other.voxel_size && dims == other.dims;
}

std::array<std::int64_t, 3> point_to_cell(const GridSpec& spec, const Vec3& p) {
  std::array<std::int64_t, 3> cell;
  for (int a = 0; a < 3; ++a) {
    cell[a] = static_cast<std::int64_t>(std::floor((p[a] - spec.origin[a]) / spec.voxel_size));
  }
  return cell;
}

std::optional<std::array<std::uint32_t, 3>> point_to_voxel(const GridSpec& spec, const Vec3& p) {
  const auto cell = point_to_cell(spec, p);
  for (int a = 0; a < 3; ++a) {
    if (cell[a] < 0 || cell[a] >= static_cast<std::int64_t>(spec.dims[a])) return std::nullopt;
  }
  return std::array<std::uint32_t, 3>{static_cast<std::uint32_t>(cell[0]),
                                      static_cast<std::uint32_t>(cell[1]),
                                      static_cast<std::uint32_t>(cell[2])};
}

GridSpec grid_from_mesh(const TriangleMesh& mesh, double voxel_size, int padding) {
  if (mesh.vertices.empty()) throw ValidationError("grid_from_mesh: empty mesh");
  if (!(voxel_size > 0.0)) throw ValidationError("grid_from_mesh: voxel_size must be positive");
  if (padding < 0) throw ValidationError("grid_from_mesh: padding must be >= 0");

  const Aabb box = mesh.bounds();
  GridSpec spec;
  spec.voxel_size = voxel_size;
  spec.origin = box.min - voxel_size * Vec3::Constant(padding);
  for (int a = 0; a < 3; ++a) {
    const double span = box.max[a] - spec.origin[a];
    const std::int64_t n = static_cast<std::int64_t>(std::ceil(span / voxel_size)) + padding;
    spec.dims[a] = static_cast<std::uint32_t>(std::max<std::int64_t>(1, n));
  }
  spec.validate();
  return spec;
}

std::size_t VoxelMask::popcount() const {
  std::size_t n = 0;
  for (std::uint64_t w : bits_) n += static_cast<std::size_t>(__builtin_popcountll(w));
  return n;
}

void GroundTruthVolume::validate() const {
  spec.validate();
  if (labels.size() != spec.voxel_count() || occupancy.size() != spec.voxel_count()) {
    throw ValidationError("ground truth: storage does not match grid dims");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && !occupancy.get(i)) {
      throw ValidationError("ground truth: labelled voxel not occupied");
    }
    if (labels[i] > blob_count) {
      throw ValidationError("ground truth: label exceeds blob count");
    }
  }
}

AnomalyVolume AnomalyVolume::zeros(const GridSpec& spec) {
  AnomalyVolume vol;
  vol.spec = spec;
  vol.scores.assign(spec.voxel_count(), 0.0);
  vol.touched = VoxelMask(spec.voxel_count());
  return vol;
}

namespace {

// One axis of the Akenine-Moller test: project the triangle verts and the
// box half-extents; separation must be strict so boundary contact counts as
// intersection.
inline bool axis_separates(const Vec3& axis, const Vec3& a, const Vec3& b, const Vec3& c,
                           const Vec3& half) {
  const double pa = axis.dot(a);
  const double pb = axis.dot(b);
  const double pc = axis.dot(c);
  const double r = half.x() * std::abs(axis.x()) + half.y() * std::abs(axis.y()) +
                   half.z() * std::abs(axis.z());
  const double lo = std::min({pa, pb, pc});
  const double hi = std::max({pa, pb, pc});
  return lo > r || hi < -r;
}

}  // namespace

bool triangle_box_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                            const Vec3& box_min, const Vec3& box_max) {
  const Vec3 centre = 0.5 * (box_min + box_max);
  const Vec3 half = 0.5 * (box_max - box_min);
  const Vec3 a = v0 - centre;
  const Vec3 b = v1 - centre;
  const Vec3 c = v2 - centre;

  // Box face normals (triangle AABB vs box).
  for (int ax = 0; ax < 3; ++ax) {
    const double lo = std::min({a[ax], b[ax], c[ax]});
    const double hi = std::max({a[ax], b[ax], c[ax]});
    if (lo > half[ax] || hi < -half[ax]) return false;
  }

  // Triangle plane vs box.
  const Vec3 e0 = b - a;
  const Vec3 e1 = c - b;
  const Vec3 e2 = a - c;
  const Vec3 normal = e0.cross(e1);
  if (axis_separates(normal, a, b, c, half)) return false;

  // Nine edge cross-products.
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& edge : {e0, e1, e2}) {
    for (const Vec3& unit : axes) {
      const Vec3 axis = edge.cross(unit);
      if (axis.squaredNorm() == 0.0) continue;
      if (axis_separates(axis, a, b, c, half)) return false;
    }
  }
  return true;
}

GroundTruthVolume voxelize_labeled_mesh(const TriangleMesh& mesh, const GridSpec& spec,
                                        int threads) {
  mesh.validate();
  spec.validate();

  const std::size_t voxels = spec.voxel_count();
  GroundTruthVolume gt;
  gt.spec = spec;
  gt.occupancy = VoxelMask(voxels);
  gt.labels.assign(voxels, 0);

  // Bounds check up front so the error can list every offending triangle.
  const Vec3 grid_max =
      spec.origin + spec.voxel_size * Vec3(spec.dims[0], spec.dims[1], spec.dims[2]);
  std::string offenders;
  std::size_t offender_count = 0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (std::uint32_t idx : mesh.triangles[t]) {
      const Vec3& v = mesh.vertices[idx];
      if ((v.array() < spec.origin.array()).any() || (v.array() > grid_max.array()).any()) {
        if (offender_count < 16) offenders += (offenders.empty() ? "" : ", ") + std::to_string(t);
        ++offender_count;
        break;
      }
    }
  }
  if (offender_count > 0) {
    throw ValidationError("voxelize: " + std::to_string(offender_count) +
                          " triangle(s) outside grid bounds: [" + offenders +
                          (offender_count > 16 ? ", ...]" : "]"));
  }

  // Per-triangle scatter; merges are commutative (occupancy OR, label
  // min-nonzero), so the parallel result is deterministic.
  std::vector<std::atomic<std::uint64_t>> occ_words(gt.occupancy.words().size());
  for (auto& w : occ_words) w.store(0, std::memory_order_relaxed);
  std::vector<std::atomic<std::uint16_t>> label_cells(voxels);
  for (auto& l : label_cells) l.store(0, std::memory_order_relaxed);

  parallel_for_chunks(
      0, mesh.triangles.size(), resolve_threads(threads),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) {
          const auto& tri = mesh.triangles[t];
          const Vec3& v0 = mesh.vertices[tri[0]];
          const Vec3& v1 = mesh.vertices[tri[1]];
          const Vec3& v2 = mesh.vertices[tri[2]];
          const std::uint16_t label = mesh.triangle_label(t);

          Aabb tb;
          tb.grow(v0);
          tb.grow(v1);
          tb.grow(v2);
          auto lo_cell = point_to_cell(spec, tb.min);
          auto hi_cell = point_to_cell(spec, tb.max);
          for (int a = 0; a < 3; ++a) {
            lo_cell[a] = std::clamp<std::int64_t>(lo_cell[a], 0, spec.dims[a] - 1);
            hi_cell[a] = std::clamp<std::int64_t>(hi_cell[a], 0, spec.dims[a] - 1);
          }

          for (std::int64_t k = lo_cell[2]; k <= hi_cell[2]; ++k) {
            for (std::int64_t j = lo_cell[1]; j <= hi_cell[1]; ++j) {
              for (std::int64_t i = lo_cell[0]; i <= hi_cell[0]; ++i) {
                const Vec3 bmin = spec.voxel_min(static_cast<std::uint32_t>(i),
                                                 static_cast<std::uint32_t>(j),
                                                 static_cast<std::uint32_t>(k));
                const Vec3 bmax = bmin + Vec3::Constant(spec.voxel_size);
                if (!triangle_box_intersect(v0, v1, v2, bmin, bmax)) continue;
                const std::size_t lin = spec.linear_index(static_cast<std::uint32_t>(i),
                                                          static_cast<std::uint32_t>(j),
                                                          static_cast<std::uint32_t>(k));
                occ_words[lin >> 6].fetch_or(std::uint64_t{1} << (lin & 63),
                                             std::memory_order_relaxed);
                if (label != 0) {
                  std::uint16_t cur = label_cells[lin].load(std::memory_order_relaxed);
                  while ((cur == 0 || label < cur) &&
                         !label_cells[lin].compare_exchange_weak(cur, label,
                                                                 std::memory_order_relaxed)) {
                  }
                }
              }
            }
          }
        }
      });

  for (std::size_t w = 0; w < occ_words.size(); ++w) {
    gt.occupancy.words()[w] = occ_words[w].load(std::memory_order_relaxed);
  }

  // Remap the distinct IDs present onto the contiguous range {1..N}.
  std::map<std::uint16_t, std::uint16_t> remap;
  for (std::size_t i = 0; i < voxels; ++i) {
    const std::uint16_t l = label_cells[i].load(std::memory_order_relaxed);
    if (l != 0) remap.emplace(l, 0);
  }
  std::uint16_t next = 1;
  for (auto& [original, mapped] : remap) mapped = next++;
  for (std::size_t i = 0; i < voxels; ++i) {
    const std::uint16_t l = label_cells[i].load(std::memory_order_relaxed);
    if (l != 0) gt.labels[i] = remap[l];
  }
  gt.blob_count = static_cast<std::uint16_t>(remap.size());
  return gt;
}

}  // namespace anovox
