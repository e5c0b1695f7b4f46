#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anovox/geometry.hpp"

namespace anovox {

/// A dot observed in the image (pixel) paired with its known 3D centre in
/// the calibration-pattern frame (mm).
struct Correspondence2D3D {
  Vec2 pixel;
  Vec3 pattern_point;
};

/// A 3D-3D pair: the same physical point expressed in two frames.
struct Correspondence3D3D {
  Vec3 source;  // SRF
  Vec3 target;  // CRF
};

struct PnpOptions {
  int random_restarts = 20;
  int max_iterations = 100;
  double gradient_tolerance = 1e-12;
  std::uint64_t seed = 1;
};

/// Pose of the pattern frame in the camera frame (pattern -> CRF) from 2D-3D
/// correspondences: DLT initialization (homography-based when the pattern is
/// planar), Gauss-Newton refinement on pixel reprojection error with damping
/// chosen so the cost never increases, and `random_restarts` extra starting
/// poses to guard against local minima. Requires >= 6 pairs, distinct and
/// non-collinear pattern points.
RigidTransform solve_pnp(std::span<const Correspondence2D3D> correspondences,
                         const CameraIntrinsics& intr, const PnpOptions& options = {});

/// Mean reprojection error (px) of a pose against the correspondences.
double mean_reprojection_error(std::span<const Correspondence2D3D> correspondences,
                               const CameraIntrinsics& intr, const RigidTransform& pose);

/// Rigid absolute orientation (scale fixed to 1) minimizing
/// sum ||R a + T - b||^2. The reflection ambiguity is corrected via the sign
/// of the smallest singular value, so det(R) = +1 always. Requires >= 3
/// non-collinear pairs.
RigidTransform kabsch_umeyama(std::span<const Correspondence3D3D> pairs);

/// One view of the dot pattern: image/pattern correspondences plus the same
/// dot centres expressed in the SRF (aligned by index).
struct CalibrationView {
  std::vector<Correspondence2D3D> correspondences;
  std::vector<Vec3> sensor_points;
};

struct SensorCameraOptions {
  PnpOptions pnp;
  int threads = 1;
};

/// SRF -> CRF transform from dot-pattern views: per-view PnP lifts the dot
/// centres into the CRF, and absolute orientation over the pooled
/// (SRF, CRF) pairs yields the estimate.
RigidTransform estimate_sensor_to_camera(std::span<const CalibrationView> views,
                                         const CameraIntrinsics& intr,
                                         const SensorCameraOptions& options = {});

struct CalibrationReport {
  RigidTransform estimate;
  std::vector<double> residuals_mm;  // one per holdout dot
  double rms_mm = 0.0;
  double max_mm = 0.0;
};

/// Precision assessment on a holdout set of views: per dot, the l2 distance
/// between the SRF centre mapped by the estimate and the pattern centre
/// mapped by that view's PnP pose.
CalibrationReport assess_calibration(const RigidTransform& estimate,
                                     std::span<const CalibrationView> holdout,
                                     const CameraIntrinsics& intr,
                                     const SensorCameraOptions& options = {});

}  // namespace anovox
