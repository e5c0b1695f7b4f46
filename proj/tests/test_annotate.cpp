#include <doctest.h>

#include <cmath>

#include "anovox/annotate.hpp"
#include "anovox/bvh.hpp"
#include "anovox/synth.hpp"
#include "oracles.hpp"

using namespace anovox;

namespace {

/// A subdivided square patch on the plane z = depth, facing the camera.
TriangleMesh square_patch(int n, double half_extent, double depth) {
  TriangleMesh mesh;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.emplace_back(-half_extent + 2.0 * half_extent * i / n,
                                 -half_extent + 2.0 * half_extent * j / n, depth);
    }
  }
  auto idx = [&](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      mesh.triangles.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      mesh.triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  return mesh;
}

CameraIntrinsics patch_camera() { return CameraIntrinsics(200.0, 200.0, 63.5, 63.5, 128, 128); }

}  // namespace

TEST_CASE("all-zero annotations leave every label at zero") {
  const TriangleMesh mesh = square_patch(8, 50.0, 400.0);
  const FrameChain chain(RigidTransform(), {RigidTransform()});
  const CameraIntrinsics intr = patch_camera();
  std::vector<AnnotatedView> views;
  views.push_back({AnnotationImage(128, 128), 0});

  const LiftResult result = lift_annotations(mesh, views, chain, intr);
  for (auto l : result.labeled_mesh.labels) CHECK(l == 0);
  CHECK(result.conflicted_vertices.empty());
}

TEST_CASE("a half-frame annotation labels exactly the projected half") {
  const TriangleMesh mesh = square_patch(10, 50.0, 400.0);
  const FrameChain chain(RigidTransform(), {RigidTransform()});
  const CameraIntrinsics intr = patch_camera();

  AnnotationImage annotation(128, 128);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 60; ++x) annotation.at(x, y) = 7;  // left strip
  }
  std::vector<AnnotatedView> views;
  views.push_back({annotation, 0});
  const LiftResult result = lift_annotations(mesh, views, chain, intr);

  // Analytic projection oracle: a vertex is labeled iff its rounded pixel
  // lands on the strip (the flat patch has no occlusion).
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec2 pixel = oracles::project_reference(intr, mesh.vertices[v]);
    const int px = static_cast<int>(std::lround(pixel.x()));
    const int py = static_cast<int>(std::lround(pixel.y()));
    const bool on_strip =
        px >= 0 && px < 60 && py >= 0 && py < 128;
    CHECK(result.labeled_mesh.labels[v] == (on_strip ? 7 : 0));
  }
}

TEST_CASE("occluded vertices stay unlabeled under a full-frame annotation") {
  // Two stacked patches; the far one is hidden behind the near one.
  TriangleMesh near_patch = square_patch(6, 60.0, 300.0);
  const TriangleMesh far_patch = square_patch(6, 60.0, 500.0);
  const std::size_t near_vertices = near_patch.vertices.size();
  TriangleMesh both = near_patch;
  const std::uint32_t offset = static_cast<std::uint32_t>(both.vertices.size());
  for (const Vec3& v : far_patch.vertices) both.vertices.push_back(v);
  for (const auto& tri : far_patch.triangles) {
    both.triangles.push_back({tri[0] + offset, tri[1] + offset, tri[2] + offset});
  }

  AnnotationImage annotation(128, 128);
  for (auto& id : annotation.ids) id = 4;
  std::vector<AnnotatedView> views;
  views.push_back({annotation, 0});

  LiftOptions options;
  options.visibility_tolerance_mm = 2.0;
  const FrameChain chain(RigidTransform(), {RigidTransform()});
  const LiftResult result =
      lift_annotations(both, views, chain, patch_camera(), options);

  for (std::size_t v = 0; v < near_vertices; ++v) {
    CHECK(result.labeled_mesh.labels[v] == 4);
  }
  for (std::size_t v = near_vertices; v < both.vertices.size(); ++v) {
    CHECK(result.labeled_mesh.labels[v] == 0);
  }
}

TEST_CASE("conflicting views resolve by majority then smallest id") {
  const TriangleMesh mesh = square_patch(4, 40.0, 400.0);
  const CameraIntrinsics intr = patch_camera();
  const FrameChain chain(RigidTransform(),
                         {RigidTransform(), RigidTransform(), RigidTransform()});
  // All three views share the identity pose; they disagree on the ID.
  AnnotationImage a(128, 128), b(128, 128), c(128, 128);
  for (auto& id : a.ids) id = 2;
  for (auto& id : b.ids) id = 9;
  for (auto& id : c.ids) id = 9;
  std::vector<AnnotatedView> views{{a, 0}, {b, 1}, {c, 2}};
  const LiftResult majority = lift_annotations(mesh, views, chain, intr);
  for (auto l : majority.labeled_mesh.labels) CHECK(l == 9);
  CHECK(majority.conflicted_vertices.size() == mesh.vertices.size());

  // 1-1 tie: smallest ID wins.
  std::vector<AnnotatedView> tied{{a, 0}, {b, 1}};
  const LiftResult tie = lift_annotations(mesh, tied, chain, intr);
  for (auto l : tie.labeled_mesh.labels) CHECK(l == 2);
}

TEST_CASE("lift validates poses and resolutions") {
  const TriangleMesh mesh = square_patch(4, 40.0, 400.0);
  const FrameChain chain(RigidTransform(), {RigidTransform()});
  std::vector<AnnotatedView> bad_view{{AnnotationImage(128, 128), 3}};
  CHECK_THROWS_AS(lift_annotations(mesh, bad_view, chain, patch_camera()), ValidationError);
  std::vector<AnnotatedView> bad_res{{AnnotationImage(64, 64), 0}};
  CHECK_THROWS_AS(lift_annotations(mesh, bad_res, chain, patch_camera()), ValidationError);
}

TEST_CASE("lifting a painted view reproduces most annotated pixels") {
  // Synthetic sphere scan; paint a disc in view 0, lift, then check against
  // the ray-cast surface.
  SceneSpec spec;
  spec.tessellation = 72;
  const SceneMesh scene = make_mesh(spec);
  ScanSpec scan = default_scan_spec(128, 4);
  const SyntheticScan rendered = simulate_scan(scene, scan);

  AnnotationImage annotation(128, 128);
  std::size_t annotated = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (std::hypot(x - 64.0, y - 60.0) < 14.0 && rendered.depths[0].valid(x, y)) {
        annotation.at(x, y) = 1;
        ++annotated;
      }
    }
  }
  REQUIRE(annotated > 100);

  std::vector<AnnotatedView> views;
  views.push_back({annotation, 0});
  const LiftResult lifted =
      lift_annotations(rendered.mesh, views, rendered.chain, scan.intrinsics);

  // Render back: each annotated pixel's hit triangle should carry the ID.
  const Bvh bvh(rendered.mesh);
  const RigidTransform to_camera = rendered.chain.mesh_to_camera(0);
  const RigidTransform to_mesh = to_camera.inverse();
  std::size_t reproduced = 0, visible = 0;
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (annotation.at(x, y) == 0) continue;
      const Vec2 n((x - scan.intrinsics.cx) / scan.intrinsics.fx,
                   (y - scan.intrinsics.cy) / scan.intrinsics.fy);
      const Ray ray{to_mesh.translation(), to_mesh.rotation() * Vec3(n.x(), n.y(), 1.0)};
      const RayHit hit = bvh.intersect(ray);
      if (!hit.valid()) continue;
      ++visible;
      const auto& tri = rendered.mesh.triangles[hit.triangle];
      bool carries = false;
      for (auto idx : tri) carries |= lifted.labeled_mesh.labels[idx] == 1;
      if (carries) ++reproduced;
    }
  }
  REQUIRE(visible > 100);
  CHECK(static_cast<double>(reproduced) / visible >= 0.95);
}

TEST_CASE("build_ground_truth delegates to the voxelizer") {
  const TriangleMesh nominal = square_patch(6, 20.0, 30.0);
  TriangleMesh labeled = nominal;
  labeled.labels.assign(labeled.vertices.size(), 0);
  CHECK_THROWS_AS(build_ground_truth(nominal, GridSpec{}), ValidationError);  // no labels

  GridSpec spec;
  spec.origin = Vec3(-25, -25, 25);
  spec.voxel_size = 2.0;  // the labelling default
  spec.dims = {25, 25, 5};

  const GroundTruthVolume all_nominal = build_ground_truth(labeled, spec);
  CHECK(all_nominal.blob_count == 0);
  CHECK(all_nominal.occupancy.popcount() > 0);

  // One labeled patch becomes one blob matching the exhaustive oracle.
  for (std::size_t v = 0; v < labeled.vertices.size(); ++v) {
    if (labeled.vertices[v].head<2>().norm() < 8.0) labeled.labels[v] = 3;
  }
  const GroundTruthVolume gt = build_ground_truth(labeled, spec);
  CHECK(gt.blob_count == 1);
  const GroundTruthVolume oracle = oracles::voxelize_reference(labeled, spec);
  CHECK(gt.labels == oracle.labels);
  CHECK(gt.occupancy.words() == oracle.occupancy.words());
}
