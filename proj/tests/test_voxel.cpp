#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "anovox/rng.hpp"
#include "anovox/voxel.hpp"
#include "oracles.hpp"

using namespace anovox;

namespace {

GridSpec small_grid(double size, std::uint32_t n) {
  GridSpec spec;
  spec.origin = Vec3::Zero();
  spec.voxel_size = size;
  spec.dims = {n, n, n};
  return spec;
}

TriangleMesh random_small_mesh(Rng& rng, int triangles, double extent, bool labeled) {
  TriangleMesh mesh;
  for (int t = 0; t < triangles; ++t) {
    const Vec3 base(rng.uniform(2, extent - 2), rng.uniform(2, extent - 2),
                    rng.uniform(2, extent - 2));
    const std::uint32_t i = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int k = 0; k < 3; ++k) {
      mesh.vertices.push_back(base + Vec3(rng.uniform(-4, 4), rng.uniform(-4, 4),
                                          rng.uniform(-4, 4)));
      if (labeled) mesh.labels.push_back(static_cast<std::uint16_t>(rng.index(4)));  // 0..3
    }
    mesh.triangles.push_back({i, i + 1, i + 2});
  }
  // Clamp into the grid interior.
  for (Vec3& v : mesh.vertices) {
    for (int a = 0; a < 3; ++a) v[a] = std::clamp(v[a], 0.0, extent);
  }
  mesh.remove_degenerate_triangles();
  return mesh;
}

bool volumes_equal(const GroundTruthVolume& a, const GroundTruthVolume& b) {
  return a.blob_count == b.blob_count && a.labels == b.labels &&
         a.occupancy.words() == b.occupancy.words();
}

}  // namespace

TEST_CASE("point_to_voxel floors per axis") {
  const GridSpec spec = small_grid(2.0, 10);
  CHECK(*point_to_voxel(spec, spec.origin) == std::array<std::uint32_t, 3>{0, 0, 0});
  CHECK(*point_to_voxel(spec, spec.origin + Vec3(1.99, 0, 0)) ==
        std::array<std::uint32_t, 3>{0, 0, 0});
  CHECK(*point_to_voxel(spec, spec.origin + Vec3(2.0, 0, 0)) ==
        std::array<std::uint32_t, 3>{1, 0, 0});
  CHECK(!point_to_voxel(spec, spec.origin - Vec3(0.01, 0, 0)).has_value());
  CHECK(!point_to_voxel(spec, spec.origin + Vec3(20.0, 0, 0)).has_value());
}

TEST_CASE("point_to_voxel matches the scalar floor oracle") {
  GridSpec spec;
  spec.origin = Vec3(-3.7, 11.2, 0.05);
  spec.voxel_size = 1.7;
  spec.dims = {23, 31, 17};
  Rng rng(211);
  for (int i = 0; i < 100000; ++i) {
    const Vec3 p(rng.uniform(-80, 80), rng.uniform(-40, 120), rng.uniform(-50, 70));
    std::array<std::int64_t, 3> expected;
    for (int a = 0; a < 3; ++a) {
      expected[a] = static_cast<std::int64_t>(std::floor((p[a] - spec.origin[a]) / 1.7));
    }
    const auto cell = point_to_cell(spec, p);
    CHECK(cell == expected);
    const auto voxel = point_to_voxel(spec, p);
    const bool inside = expected[0] >= 0 && expected[0] < 23 && expected[1] >= 0 &&
                        expected[1] < 31 && expected[2] >= 0 && expected[2] < 17;
    CHECK(voxel.has_value() == inside);
  }
}

TEST_CASE("grid_from_mesh covers the mesh with padding") {
  // Scene-scale bounding box, 2 mm voxels.
  TriangleMesh scene;
  scene.vertices = {Vec3(0, 0, 0), Vec3(660, 652, 634), Vec3(660, 0, 0)};
  scene.triangles = {{0, 1, 2}};
  const GridSpec tight = grid_from_mesh(scene, 2.0, 0);
  CHECK(tight.dims == std::array<std::uint32_t, 3>{330, 326, 317});
  for (int pad = 1; pad <= 5; ++pad) {
    const GridSpec padded = grid_from_mesh(scene, 2.0, pad);
    for (int a = 0; a < 3; ++a) {
      CHECK(padded.dims[a] == tight.dims[a] + 2 * pad);
      CHECK(padded.origin[a] == tight.origin[a] - 2.0 * pad);
    }
  }

  TriangleMesh cube;
  cube.vertices = {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(1, 1, 1)};
  cube.triangles = {{0, 1, 2}};
  const GridSpec unit = grid_from_mesh(cube, 1.0, 0);
  CHECK(unit.dims == std::array<std::uint32_t, 3>{1, 1, 1});

  CHECK_THROWS_AS(grid_from_mesh(TriangleMesh{}, 2.0, 1), ValidationError);
}

TEST_CASE("one small triangle occupies exactly its voxel") {
  const GridSpec spec = small_grid(2.0, 8);
  TriangleMesh mesh;
  mesh.vertices = {Vec3(4.4, 4.4, 4.4), Vec3(5.2, 4.5, 4.6), Vec3(4.6, 5.3, 4.8)};
  mesh.triangles = {{0, 1, 2}};
  mesh.labels = {3, 3, 3};
  const GroundTruthVolume gt = voxelize_labeled_mesh(mesh, spec);
  CHECK(gt.occupancy.popcount() == 1);
  CHECK(gt.occupancy.get(spec.linear_index(2, 2, 2)));
  CHECK(gt.labels[spec.linear_index(2, 2, 2)] == 1);  // remapped to blob 1
  CHECK(gt.blob_count == 1);
}

TEST_CASE("voxelization equals the exhaustive SAT oracle") {
  Rng rng(223);
  for (int trial = 0; trial < 8; ++trial) {
    const GridSpec spec = small_grid(2.0, 16);
    const TriangleMesh mesh = random_small_mesh(rng, 12, 30.0, trial % 2 == 1);
    const GroundTruthVolume fast = voxelize_labeled_mesh(mesh, spec);
    const GroundTruthVolume slow = oracles::voxelize_reference(mesh, spec);
    CHECK(volumes_equal(fast, slow));
  }
}

TEST_CASE("unlabeled meshes produce occupancy with zero blobs") {
  Rng rng(227);
  const GridSpec spec = small_grid(2.0, 16);
  const TriangleMesh mesh = random_small_mesh(rng, 10, 30.0, false);
  const GroundTruthVolume gt = voxelize_labeled_mesh(mesh, spec);
  CHECK(gt.occupancy.popcount() > 0);
  CHECK(gt.blob_count == 0);
  for (auto l : gt.labels) CHECK(l == 0);
}

TEST_CASE("voxelization is invariant to triangle order and index permutation") {
  Rng rng(229);
  const GridSpec spec = small_grid(2.0, 16);
  TriangleMesh mesh = random_small_mesh(rng, 14, 30.0, true);
  const GroundTruthVolume base = voxelize_labeled_mesh(mesh, spec);

  std::rotate(mesh.triangles.begin(), mesh.triangles.begin() + 5, mesh.triangles.end());
  CHECK(volumes_equal(base, voxelize_labeled_mesh(mesh, spec)));

  // Permute vertex storage (and rewire indices).
  TriangleMesh permuted;
  const std::size_t n = mesh.vertices.size();
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>((i * 7 + 3) % n);
  permuted.vertices.resize(n);
  permuted.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    permuted.vertices[perm[i]] = mesh.vertices[i];
    permuted.labels[perm[i]] = mesh.labels[i];
  }
  for (const auto& tri : mesh.triangles) {
    permuted.triangles.push_back({perm[tri[0]], perm[tri[1]], perm[tri[2]]});
  }
  CHECK(volumes_equal(base, voxelize_labeled_mesh(permuted, spec)));

  // Threaded construction merges commutatively.
  CHECK(volumes_equal(base, voxelize_labeled_mesh(mesh, spec, 4)));
}

TEST_CASE("blob voxel counts add up") {
  Rng rng(233);
  const GridSpec spec = small_grid(2.0, 16);
  const TriangleMesh mesh = random_small_mesh(rng, 16, 30.0, true);
  const GroundTruthVolume gt = voxelize_labeled_mesh(mesh, spec);
  std::vector<std::size_t> per_blob(gt.blob_count, 0);
  std::size_t nonzero = 0;
  for (auto l : gt.labels) {
    if (l != 0) {
      ++nonzero;
      ++per_blob[l - 1];
    }
  }
  std::size_t sum = 0;
  for (auto c : per_blob) {
    CHECK(c > 0);  // IDs are contiguous, so every blob is populated
    sum += c;
  }
  CHECK(sum == nonzero);
}

TEST_CASE("finer grids refine coarse occupancy") {
  Rng rng(239);
  for (int trial = 0; trial < 3; ++trial) {
    const GridSpec coarse = small_grid(2.0, 12);
    GridSpec fine = coarse;
    fine.voxel_size = 1.0;
    fine.dims = {24, 24, 24};
    const TriangleMesh mesh = random_small_mesh(rng, 10, 22.0, false);
    const GroundTruthVolume gc = voxelize_labeled_mesh(mesh, coarse);
    const GroundTruthVolume gf = voxelize_labeled_mesh(mesh, fine);
    // Max-pool the fine occupancy 2^3 -> 1 and check it covers the coarse.
    for (std::uint32_t k = 0; k < 12; ++k) {
      for (std::uint32_t j = 0; j < 12; ++j) {
        for (std::uint32_t i = 0; i < 12; ++i) {
          if (!gc.occupancy.get(coarse.linear_index(i, j, k))) continue;
          bool any = false;
          for (int dk = 0; dk < 2 && !any; ++dk) {
            for (int dj = 0; dj < 2 && !any; ++dj) {
              for (int di = 0; di < 2 && !any; ++di) {
                any = gf.occupancy.get(
                    fine.linear_index(2 * i + di, 2 * j + dj, 2 * k + dk));
              }
            }
          }
          CHECK(any);
        }
      }
    }
  }
}

TEST_CASE("label ties resolve to the smallest ID") {
  const GridSpec spec = small_grid(4.0, 4);
  TriangleMesh mesh;
  // Two small triangles inside the same voxel with labels 5 and 2.
  mesh.vertices = {Vec3(1, 1, 1),     Vec3(2, 1, 1),   Vec3(1, 2, 1),
                   Vec3(1.2, 1.2, 2), Vec3(2.2, 1.2, 2), Vec3(1.2, 2.2, 2)};
  mesh.triangles = {{0, 1, 2}, {3, 4, 5}};
  mesh.labels = {5, 5, 5, 2, 2, 2};
  const GroundTruthVolume gt = voxelize_labeled_mesh(mesh, spec);
  CHECK(gt.blob_count == 1);  // only label 2 survives in the shared voxel
  CHECK(gt.labels[spec.linear_index(0, 0, 0)] == 1);
}

TEST_CASE("triangles outside the grid raise an error listing offenders") {
  const GridSpec spec = small_grid(2.0, 4);
  TriangleMesh mesh;
  mesh.vertices = {Vec3(1, 1, 1), Vec3(2, 1, 1), Vec3(1, 2, 1),
                   Vec3(100, 0, 0), Vec3(101, 0, 0), Vec3(100, 1, 0)};
  mesh.triangles = {{0, 1, 2}, {3, 4, 5}};
  try {
    voxelize_labeled_mesh(mesh, spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& err) {
    CHECK(std::string(err.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("ground truth enforces label-implies-occupancy") {
  GroundTruthVolume gt;
  gt.spec = small_grid(2.0, 2);
  gt.occupancy = VoxelMask(8);
  gt.labels.assign(8, 0);
  gt.labels[3] = 1;
  gt.blob_count = 1;
  CHECK_THROWS_AS(gt.validate(), ValidationError);
  gt.occupancy.set(3);
  CHECK_NOTHROW(gt.validate());
}
