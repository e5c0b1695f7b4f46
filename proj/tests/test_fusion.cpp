#include <doctest.h>

#include <algorithm>
#include <map>

#include "anovox/fusion.hpp"
#include "anovox/rng.hpp"
#include "oracles.hpp"

using namespace anovox;

namespace {

GridSpec cube_grid(double size, std::uint32_t n, const Vec3& origin = Vec3::Zero()) {
  GridSpec spec;
  spec.origin = origin;
  spec.voxel_size = size;
  spec.dims = {n, n, n};
  return spec;
}

ViewProjection random_projection(Rng& rng, const GridSpec& spec, int entries) {
  ViewProjection p;
  p.spec = spec;
  for (int i = 0; i < entries; ++i) {
    p.entries.push_back({rng.index(spec.voxel_count()), rng.uniform()});
  }
  p.valid_pixels = entries;
  return p;
}

AnomalyVolume fuse_oracle(std::span<const ViewProjection> projections, const GridSpec& spec) {
  // Append every entry, then reduce by max, one voxel at a time.
  std::map<std::uint64_t, std::vector<double>> buckets;
  for (const auto& p : projections) {
    for (const auto& e : p.entries) buckets[e.voxel].push_back(e.score);
  }
  AnomalyVolume vol = AnomalyVolume::zeros(spec);
  for (auto& [voxel, scores] : buckets) {
    vol.touched.set(voxel);
    vol.scores[voxel] = *std::max_element(scores.begin(), scores.end());
  }
  return vol;
}

bool volumes_identical(const AnomalyVolume& a, const AnomalyVolume& b) {
  return a.scores == b.scores && a.touched.words() == b.touched.words();
}

}  // namespace

TEST_CASE("project_view scatters a single valid pixel") {
  const CameraIntrinsics intr(100, 100, 15.5, 15.5, 32, 32);
  const GridSpec spec = cube_grid(2.0, 32, Vec3(-32, -32, 480));
  const FrameChain chain(RigidTransform(), {RigidTransform()});

  DepthMap depth(32, 32);
  AnomalyMap2D map(32, 32);
  depth.at(10, 12) = 500.0;
  map.at(10, 12) = 0.8;

  const ViewProjection projection = project_view(map, depth, intr, 0, chain, spec);
  REQUIRE(projection.entries.size() == 1);
  CHECK(projection.valid_pixels == 1);
  CHECK(projection.out_of_bounds_pixels == 0);

  const Vec3 expected_point = unproject_pixel(intr, Vec2(10, 12), 500.0);
  const auto voxel = point_to_voxel(spec, expected_point);
  REQUIRE(voxel.has_value());
  CHECK(projection.entries[0].voxel == spec.linear_index((*voxel)[0], (*voxel)[1], (*voxel)[2]));
  CHECK(projection.entries[0].score == 0.8);
}

TEST_CASE("project_view with no valid depth yields nothing") {
  const CameraIntrinsics intr(100, 100, 15.5, 15.5, 32, 32);
  const GridSpec spec = cube_grid(2.0, 8);
  const FrameChain chain(RigidTransform(), {RigidTransform()});
  const ViewProjection projection =
      project_view(AnomalyMap2D(32, 32), DepthMap(32, 32), intr, 0, chain, spec);
  CHECK(projection.entries.empty());
  CHECK(projection.valid_pixels == 0);
}

TEST_CASE("project_view matches a per-pixel transform-and-floor oracle") {
  const CameraIntrinsics intr(150, 150, 31.5, 31.5, 64, 64, {0.03, 0.0, 0.0, 0.0, 0.0});
  Rng rng(301);

  // Nontrivial chain: generic sensor_to_camera and view pose.
  const Mat3 rot = Eigen::AngleAxisd(0.4, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const RigidTransform s2c(rot, Vec3(20, -10, 35));
  const Mat3 rot2 = Eigen::AngleAxisd(-0.7, Vec3(2, -1, 1).normalized()).toRotationMatrix();
  const RigidTransform view(rot2, Vec3(5, 8, -12));
  const FrameChain chain(s2c, {RigidTransform(), view});

  const GridSpec spec = cube_grid(3.0, 40, Vec3(-60, -60, -60));

  DepthMap depth(64, 64);
  AnomalyMap2D map(64, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      depth.at(x, y) = rng.uniform(0, 1) < 0.2 ? 0.0 : rng.uniform(40.0, 120.0);
      map.at(x, y) = rng.uniform();
    }
  }

  const ViewProjection projection = project_view(map, depth, intr, 1, chain, spec);

  // Oracle: raw per-pixel arithmetic.
  std::vector<VoxelScore> expected;
  std::uint64_t oob = 0;
  const RigidTransform crf_to_mesh = view.compose(s2c.inverse());
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const double d = depth.at(x, y);
      if (d <= 0.0) continue;
      const Vec3 p = crf_to_mesh.apply(unproject_pixel(intr, Vec2(x, y), d));
      bool inside = true;
      std::uint64_t lin = 0;
      std::uint64_t stride = 1;
      for (int a = 0; a < 3; ++a) {
        const double f = std::floor((p[a] - spec.origin[a]) / spec.voxel_size);
        if (f < 0 || f >= spec.dims[a]) {
          inside = false;
          break;
        }
        lin += static_cast<std::uint64_t>(f) * stride;
        stride *= spec.dims[a];
      }
      if (inside) {
        expected.push_back({lin, map.at(x, y)});
      } else {
        ++oob;
      }
    }
  }
  REQUIRE(projection.entries.size() == expected.size());
  CHECK(projection.out_of_bounds_pixels == oob);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(projection.entries[i].voxel == expected[i].voxel);
    CHECK(projection.entries[i].score == expected[i].score);
  }
}

TEST_CASE("project_view validates resolutions and poses") {
  const CameraIntrinsics intr(100, 100, 15.5, 15.5, 32, 32);
  const GridSpec spec = cube_grid(2.0, 8);
  const FrameChain chain(RigidTransform(), {RigidTransform()});
  CHECK_THROWS_AS(project_view(AnomalyMap2D(16, 16), DepthMap(32, 32), intr, 0, chain, spec),
                  ValidationError);
  CHECK_THROWS_AS(project_view(AnomalyMap2D(32, 32), DepthMap(32, 32), intr, 3, chain, spec),
                  ValidationError);
}

TEST_CASE("fusion keeps the maximum per voxel") {
  const GridSpec spec = cube_grid(1.0, 4);
  ViewProjection a, b;
  a.spec = spec;
  b.spec = spec;
  a.entries.push_back({5, 0.3});
  b.entries.push_back({5, 0.7});
  const std::vector<ViewProjection> projections{a, b};
  const AnomalyVolume vol = fuse_views(projections, spec);
  CHECK(vol.scores[5] == 0.7);
  CHECK(vol.touched.get(5));
  CHECK(vol.touched.popcount() == 1);
}

TEST_CASE("fusing one view is a plain scatter") {
  Rng rng(307);
  const GridSpec spec = cube_grid(1.0, 10);
  const ViewProjection p = random_projection(rng, spec, 50);
  const std::vector<ViewProjection> single{p};
  const AnomalyVolume fused = fuse_views(single, spec);
  CHECK(volumes_identical(fused, fuse_oracle(single, spec)));
}

TEST_CASE("twelve random views equal the append-then-max oracle bit-exactly") {
  Rng rng(311);
  const GridSpec spec = cube_grid(1.0, 20);
  std::vector<ViewProjection> projections;
  for (int v = 0; v < 12; ++v) projections.push_back(random_projection(rng, spec, 900));

  const AnomalyVolume fused = fuse_views(projections, spec);
  CHECK(volumes_identical(fused, fuse_oracle(projections, spec)));

  // View permutation invariance.
  std::vector<ViewProjection> shuffled = projections;
  std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
  std::swap(shuffled[0], shuffled[3]);
  CHECK(volumes_identical(fused, fuse_views(shuffled, spec)));

  // Partition invariance: 1-, 2- and 8-way parallel folds agree bit for bit.
  for (int threads : {1, 2, 8}) {
    CHECK(volumes_identical(fused, fuse_views(projections, spec, threads)));
  }
}

TEST_CASE("fusion rejects mismatched grids") {
  const GridSpec a = cube_grid(1.0, 4);
  const GridSpec b = cube_grid(2.0, 4);
  ViewProjection p;
  p.spec = b;
  const std::vector<ViewProjection> projections{p};
  CHECK_THROWS_AS(fuse_views(projections, a), ValidationError);
}

TEST_CASE("raising a pixel score never lowers fused scores") {
  Rng rng(313);
  const GridSpec spec = cube_grid(1.0, 12);
  std::vector<ViewProjection> projections;
  for (int v = 0; v < 4; ++v) projections.push_back(random_projection(rng, spec, 200));
  const AnomalyVolume before = fuse_views(projections, spec);
  const GlobalScore g_before = global_score(before);

  projections[2].entries[17].score += 5.0;
  const AnomalyVolume after = fuse_views(projections, spec);
  for (std::size_t i = 0; i < after.scores.size(); ++i) {
    CHECK(after.scores[i] >= before.scores[i]);
  }
  CHECK(global_score(after).value >= g_before.value);
}

TEST_CASE("global score handles empty and scored volumes") {
  const GridSpec spec = cube_grid(1.0, 6);
  const AnomalyVolume zeros = AnomalyVolume::zeros(spec);
  const GlobalScore empty = global_score(zeros);
  CHECK(empty.value == 0.0);
  CHECK(empty.empty);

  AnomalyVolume one = AnomalyVolume::zeros(spec);
  one.touched.set(42);
  one.scores[42] = 0.9;
  const GlobalScore single = global_score(one);
  CHECK(single.value == 0.9);
  CHECK(!single.empty);

  Rng rng(317);
  AnomalyVolume random = AnomalyVolume::zeros(spec);
  double expected = -1.0;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t v = rng.index(spec.voxel_count());
    const double s = rng.uniform();
    random.touched.set(v);
    random.scores[v] = std::max(random.scores[v], s);
  }
  for (std::size_t i = 0; i < random.scores.size(); ++i) {
    if (random.touched.get(i)) expected = std::max(expected, random.scores[i]);
  }
  CHECK(global_score(random).value == expected);
}

TEST_CASE("fusing subsets composes through the global score") {
  Rng rng(331);
  const GridSpec spec = cube_grid(1.0, 10);
  std::vector<ViewProjection> all;
  for (int v = 0; v < 6; ++v) all.push_back(random_projection(rng, spec, 150));
  const std::span<const ViewProjection> span_all(all);

  const double whole = global_score(fuse_views(span_all, spec)).value;
  const double first = global_score(fuse_views(span_all.subspan(0, 3), spec)).value;
  const double second = global_score(fuse_views(span_all.subspan(3), spec)).value;
  CHECK(whole == std::max(first, second));
}
