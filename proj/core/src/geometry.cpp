#include "anovox/geometry.hpp"

#include <cmath>
#include <string>

namespace anovox {

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy, int width,
                                   int height, const std::array<double, 5>& distortion)
    : fx(fx), fy(fy), cx(cx), cy(cy), width(width), height(height), distortion(distortion) {
  validate();
}

bool CameraIntrinsics::has_distortion() const {
  for (double d : distortion) {
    if (d != 0.0) return true;
  }
  return false;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ValidationError("intrinsics: focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw ValidationError("intrinsics: resolution must be at least 1x1");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ValidationError("intrinsics: principal point outside sensor");
  }
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  const double det = rotation.determinant();
  if (ortho > 1e-9 || std::abs(det - 1.0) > 1e-9) {
    throw ValidationError("rigid transform: rotation is not orthonormal with det +1");
  }
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return RigidTransform(rotation_ * other.rotation_,
                        rotation_ * other.translation_ + translation_);
}

RigidTransform RigidTransform::inverse() const {
  Mat3 rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_));
}

bool RigidTransform::is_identity(double tol) const {
  return (rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         translation_.cwiseAbs().maxCoeff() <= tol;
}

FrameChain::FrameChain(RigidTransform sensor_to_camera, std::vector<RigidTransform> view_to_ref)
    : sensor_to_camera_(std::move(sensor_to_camera)), view_to_ref_(std::move(view_to_ref)) {
  if (view_to_ref_.empty()) {
    throw ValidationError("frame chain: at least one view required");
  }
  if (!view_to_ref_.front().is_identity()) {
    throw ValidationError("frame chain: view 0 pose must be the identity");
  }
}

const RigidTransform& FrameChain::view_to_ref(std::size_t view_index) const {
  if (view_index >= view_to_ref_.size()) {
    throw ValidationError("frame chain: unknown view index " + std::to_string(view_index));
  }
  return view_to_ref_[view_index];
}

RigidTransform FrameChain::mesh_to_camera(std::size_t view_index) const {
  return sensor_to_camera_.compose(view_to_ref(view_index).inverse());
}

RigidTransform FrameChain::camera_to_mesh(std::size_t view_index) const {
  return view_to_ref(view_index).compose(sensor_to_camera_.inverse());
}

Vec2 distort_normalized(const CameraIntrinsics& intr, const Vec2& normalized) {
  const double k1 = intr.distortion[0];
  const double k2 = intr.distortion[1];
  const double k3 = intr.distortion[2];
  const double p1 = intr.distortion[3];
  const double p2 = intr.distortion[4];
  const double x = normalized.x();
  const double y = normalized.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double xd = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
  return {xd, yd};
}

Vec2 undistort_normalized(const CameraIntrinsics& intr, const Vec2& distorted) {
  if (!intr.has_distortion()) return distorted;
  if (distorted.norm() > 1.5) {
    throw ValidationError("undistort: radius above 1.5, iteration not convergent");
  }
  Vec2 u = distorted;
  for (int iter = 0; iter < 50; ++iter) {
    // Solve d = distort(u) for u: subtract the tangential part and divide by
    // the radial factor evaluated at the current estimate.
    const double x = u.x();
    const double y = u.y();
    const double r2 = x * x + y * y;
    const double k1 = intr.distortion[0];
    const double k2 = intr.distortion[1];
    const double k3 = intr.distortion[2];
    const double p1 = intr.distortion[3];
    const double p2 = intr.distortion[4];
    const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    const double dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
    const double dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
    Vec2 next((distorted.x() - dx) / radial, (distorted.y() - dy) / radial);
    const double step = (next - u).cwiseAbs().maxCoeff();
    u = next;
    if (step <= 1e-10) break;
  }
  return u;
}

Vec2 project_point(const CameraIntrinsics& intr, const Vec3& p) {
  if (!(p.z() > 0.0)) {
    throw ValidationError("project: point behind camera (z <= 0)");
  }
  Vec2 n(p.x() / p.z(), p.y() / p.z());
  Vec2 d = intr.has_distortion() ? distort_normalized(intr, n) : n;
  return {intr.fx * d.x() + intr.cx, intr.fy * d.y() + intr.cy};
}

Vec3 unproject_pixel(const CameraIntrinsics& intr, const Vec2& pixel, double depth) {
  if (!(depth > 0.0)) {
    throw ValidationError("unproject: depth must be positive");
  }
  Vec2 d((pixel.x() - intr.cx) / intr.fx, (pixel.y() - intr.cy) / intr.fy);
  Vec2 n = undistort_normalized(intr, d);
  return {n.x() * depth, n.y() * depth, depth};
}

}  // namespace anovox
