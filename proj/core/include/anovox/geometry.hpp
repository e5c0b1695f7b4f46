#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <vector>

#include "anovox/errors.hpp"

namespace anovox {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera with Brown-Conrady distortion. Distortion coefficients are
/// stored as [k1, k2, k3, p1, p2]: radial terms k1 r^2 + k2 r^4 + k3 r^6,
/// tangential p1, p2. Pixel coordinates are continuous with integer values at
/// pixel centres; lengths are millimetres throughout.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  std::array<double, 5> distortion{};  // k1, k2, k3, p1, p2

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height,
                   const std::array<double, 5>& distortion = {});

  bool has_distortion() const;
  void validate() const;
};

/// Proper rigid motion p -> R p + t. The rotation is checked at construction:
/// ||R^T R - I||_inf <= 1e-9 and |det R - 1| <= 1e-9, otherwise
/// ValidationError.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return RigidTransform(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

  /// this after other: apply(compose(other), p) == apply(this, apply(other, p)).
  RigidTransform compose(const RigidTransform& other) const;
  RigidTransform inverse() const;

  bool is_identity(double tol = 1e-9) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// The frame chain tying the mesh (MRF), per-view sensor (SRF) and camera
/// (CRF) frames together. view_to_ref maps a view's SRF into the reference
/// frame of view 0 (which coincides with the MRF), so view_to_ref[0] must be
/// the identity. sensor_to_camera maps SRF -> CRF.
class FrameChain {
 public:
  FrameChain(RigidTransform sensor_to_camera, std::vector<RigidTransform> view_to_ref);

  const RigidTransform& sensor_to_camera() const { return sensor_to_camera_; }
  const RigidTransform& view_to_ref(std::size_t view_index) const;
  std::size_t view_count() const { return view_to_ref_.size(); }

  /// MRF -> CRF of the given view: invert(view_to_ref) then sensor_to_camera.
  RigidTransform mesh_to_camera(std::size_t view_index) const;

  /// CRF of the given view -> MRF: invert(sensor_to_camera) then view_to_ref.
  RigidTransform camera_to_mesh(std::size_t view_index) const;

 private:
  RigidTransform sensor_to_camera_;
  std::vector<RigidTransform> view_to_ref_;
};

/// Applies Brown-Conrady distortion to normalized image coordinates.
Vec2 distort_normalized(const CameraIntrinsics& intr, const Vec2& normalized);

/// Inverts the distortion by fixed-point iteration (max 50 iterations,
/// tolerance 1e-10 in normalized coordinates). Throws ValidationError when
/// the distorted radius exceeds 1.5, where the iteration is not trusted.
Vec2 undistort_normalized(const CameraIntrinsics& intr, const Vec2& distorted);

/// Projects a camera-frame point (mm) to continuous pixel coordinates.
/// Throws ValidationError("behind camera ...") when p.z <= 0.
Vec2 project_point(const CameraIntrinsics& intr, const Vec3& p);

/// Lifts a pixel at the given depth (mm along camera z) back to the camera
/// frame. Throws ValidationError for depth <= 0 or non-convergent
/// undistortion.
Vec3 unproject_pixel(const CameraIntrinsics& intr, const Vec2& pixel, double depth);

}  // namespace anovox
