#pragma once

#include <span>

#include "anovox/bvh.hpp"
#include "anovox/geometry.hpp"
#include "anovox/mesh.hpp"

namespace anovox {

/// Ray-traced depth at the intrinsics' resolution. Rays go through each
/// pixel centre honouring lens distortion, so the result stays pixel-aligned
/// with real images. Pixels with no intersection (or outside the distortion
/// model's domain) are 0. mesh_to_camera maps mesh (MRF) points into the
/// camera frame. Deterministic and independent of triangle order.
DepthMap render_depth(const Bvh& bvh, const CameraIntrinsics& intr,
                      const RigidTransform& mesh_to_camera, int threads = 1);

struct ShadedViewRender {
  Image image;
  DepthMap depth;
};

/// Lambertian headlight render used by the synthetic harness: intensity =
/// albedo * max(0, n . view), flat shading with one albedo per triangle.
/// Depth comes from the same rays as the image.
ShadedViewRender render_shaded(const Bvh& bvh, std::span<const double> triangle_albedo,
                               const CameraIntrinsics& intr,
                               const RigidTransform& mesh_to_camera, int threads = 1);

/// Implicit sphere target: lets the renderer intersect exact geometry, so
/// ray generation and the depth convention can be validated against
/// closed-form intersections with no tessellation error.
struct SphereTarget {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;

  RayHit intersect(const Ray& ray) const;
};

DepthMap render_depth(const SphereTarget& sphere, const CameraIntrinsics& intr,
                      const RigidTransform& mesh_to_camera, int threads = 1);

/// Pads to a square (anchored top-left, filled with invalid) and resamples to
/// target x target by min-pooling over the covered source pixels, so
/// foreground and background depths never mix.
DepthMap pad_and_downsample_depth(const DepthMap& depth, int target);

/// Same padding, but area-averaged, for grayscale images.
Image pad_and_downsample_image(const Image& image, int target);

/// Intrinsics matching pad_and_downsample output: the source is padded to
/// side x side (defaults to max(width, height)) and resampled to target.
CameraIntrinsics scale_intrinsics(const CameraIntrinsics& intr, int target, int side = 0);

/// Lifts a depth map into an organized point cloud in the camera frame via
/// the inverse camera model. Throws when the intrinsics resolution does not
/// match the map.
PointCloud depth_to_pointcloud(const DepthMap& depth, const CameraIntrinsics& intr);

}  // namespace anovox
