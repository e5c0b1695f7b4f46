#include "anovox/calibration.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <set>
#include <string>

#include "anovox/parallel.hpp"
#include "anovox/rng.hpp"

namespace anovox {

namespace {

constexpr double kBehindCameraResidual = 1e6;

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Mat3 rotation_exp(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    Mat3 m = Mat3::Identity() + skew(w);
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
  }
  const Vec3 axis = w / theta;
  const Mat3 k = skew(axis);
  return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
}

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

struct Pose {
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();
};

struct PnpProblem {
  std::vector<Vec3> points;      // pattern frame
  std::vector<Vec2> pixels;      // observed (distorted) pixel coordinates
  std::vector<Vec2> normalized;  // undistorted normalized coordinates
};

struct PatternShape {
  Vec3 centroid;
  Vec3 singular_values;
  Mat3 axes;  // columns by decreasing singular value
};

PatternShape analyze_points(const std::vector<Vec3>& points) {
  PatternShape shape;
  shape.centroid = Vec3::Zero();
  for (const auto& p : points) shape.centroid += p;
  shape.centroid /= static_cast<double>(points.size());

  Eigen::MatrixXd centered(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    centered.row(i) = (points[i] - shape.centroid).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  shape.singular_values = svd.singularValues();
  shape.axes = svd.matrixV();
  return shape;
}

Pose dlt_pose(const PnpProblem& data) {
  const std::size_t n = data.points.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = data.points[i];
    const Vec2& x = data.normalized[i];
    a.block<1, 3>(2 * i, 0) = p.transpose();
    a(2 * i, 3) = 1.0;
    a.block<1, 3>(2 * i, 8) = -x.x() * p.transpose();
    a(2 * i, 11) = -x.x();
    a.block<1, 3>(2 * i + 1, 4) = p.transpose();
    a(2 * i + 1, 7) = 1.0;
    a.block<1, 3>(2 * i + 1, 8) = -x.y() * p.transpose();
    a(2 * i + 1, 11) = -x.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::VectorXd h = svd.matrixV().col(11);

  Eigen::Matrix<double, 3, 4> proj;
  proj << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8), h(9), h(10), h(11);
  Mat3 m = proj.template leftCols<3>();
  if (m.determinant() < 0.0) {
    proj = -proj;
    m = -m;
  }
  Eigen::JacobiSVD<Mat3> msvd(m);
  Pose pose;
  pose.r = orthonormalize(m);
  pose.t = (3.0 / msvd.singularValues().sum()) * proj.col(3);
  return pose;
}

Pose homography_pose(const PnpProblem& data, const PatternShape& shape) {
  // Planar pattern: estimate the plane-to-image homography in a 2D basis of
  // the pattern's principal axes, then decompose it into [r1 r2 | t].
  const Vec3 e1 = shape.axes.col(0);
  const Vec3 e2 = shape.axes.col(1);
  const std::size_t n = data.points.size();

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 q3 = data.points[i] - shape.centroid;
    const Vec2 q(e1.dot(q3), e2.dot(q3));
    const Vec2& x = data.normalized[i];
    a(2 * i, 0) = q.x();
    a(2 * i, 1) = q.y();
    a(2 * i, 2) = 1.0;
    a(2 * i, 6) = -x.x() * q.x();
    a(2 * i, 7) = -x.x() * q.y();
    a(2 * i, 8) = -x.x();
    a(2 * i + 1, 3) = q.x();
    a(2 * i + 1, 4) = q.y();
    a(2 * i + 1, 5) = 1.0;
    a(2 * i + 1, 6) = -x.y() * q.x();
    a(2 * i + 1, 7) = -x.y() * q.y();
    a(2 * i + 1, 8) = -x.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::VectorXd h = svd.matrixV().col(8);
  Vec3 h1(h(0), h(3), h(6));
  Vec3 h2(h(1), h(4), h(7));
  Vec3 h3(h(2), h(5), h(8));

  double lambda = 2.0 / (h1.norm() + h2.norm());
  if (h3.z() * lambda < 0.0) lambda = -lambda;  // pattern must sit in front
  Mat3 rp;
  rp.col(0) = lambda * h1;
  rp.col(1) = lambda * h2;
  rp.col(2) = (lambda * h1).cross(lambda * h2);
  rp = orthonormalize(rp);
  const Vec3 tp = lambda * h3;

  Mat3 basis;
  basis.col(0) = e1;
  basis.col(1) = e2;
  basis.col(2) = e1.cross(e2);

  Pose pose;
  pose.r = orthonormalize(rp * basis.transpose());
  pose.t = tp - pose.r * shape.centroid;
  return pose;
}

double pose_cost(const PnpProblem& data, const CameraIntrinsics& intr, const Pose& pose) {
  double cost = 0.0;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const Vec3 p = pose.r * data.points[i] + pose.t;
    if (p.z() <= 1e-9) {
      cost += 2.0 * kBehindCameraResidual * kBehindCameraResidual;
      continue;
    }
    const Vec2 d = distort_normalized(intr, Vec2(p.x() / p.z(), p.y() / p.z()));
    const Vec2 r(intr.fx * d.x() + intr.cx - data.pixels[i].x(),
                 intr.fy * d.y() + intr.cy - data.pixels[i].y());
    cost += r.squaredNorm();
  }
  return cost;
}

// Jacobian of the distorted normalized coordinates wrt the pinhole ones.
Eigen::Matrix2d distortion_jacobian(const CameraIntrinsics& intr, double x, double y) {
  const double k1 = intr.distortion[0];
  const double k2 = intr.distortion[1];
  const double k3 = intr.distortion[2];
  const double p1 = intr.distortion[3];
  const double p2 = intr.distortion[4];
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double dradial = 2.0 * k1 + 4.0 * k2 * r2 + 6.0 * k3 * r2 * r2;  // d(radial)/d(r2) * 2
  Eigen::Matrix2d j;
  j(0, 0) = radial + x * x * dradial + 2.0 * p1 * y + 6.0 * p2 * x;
  j(0, 1) = x * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y;
  j(1, 0) = x * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y;
  j(1, 1) = radial + y * y * dradial + 6.0 * p1 * y + 2.0 * p2 * x;
  return j;
}

/// Levenberg-style refinement: steps are only accepted when they lower the
/// cost, so the reprojection error is non-increasing across iterations.
Pose refine_pose(const PnpProblem& data, const CameraIntrinsics& intr, Pose pose,
                 const PnpOptions& options) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;

  double cost = pose_cost(data, intr, pose);
  double damping = 1e-6;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Mat6 jtj = Mat6::Zero();
    Vec6 jtr = Vec6::Zero();
    for (std::size_t i = 0; i < data.points.size(); ++i) {
      const Vec3 rotated = pose.r * data.points[i];
      const Vec3 p = rotated + pose.t;
      if (p.z() <= 1e-9) continue;  // penalty term is locally constant
      const double x = p.x() / p.z();
      const double y = p.y() / p.z();
      const Vec2 d = distort_normalized(intr, Vec2(x, y));
      const Vec2 res(intr.fx * d.x() + intr.cx - data.pixels[i].x(),
                     intr.fy * d.y() + intr.cy - data.pixels[i].y());

      Eigen::Matrix<double, 2, 3> proj;
      proj << 1.0 / p.z(), 0.0, -x / p.z(), 0.0, 1.0 / p.z(), -y / p.z();
      Eigen::Matrix<double, 3, 6> motion;
      motion.leftCols<3>() = -skew(rotated);
      motion.rightCols<3>() = Mat3::Identity();
      Eigen::Matrix2d focal = Eigen::Matrix2d::Zero();
      focal(0, 0) = intr.fx;
      focal(1, 1) = intr.fy;
      const Eigen::Matrix<double, 2, 6> jac =
          focal * distortion_jacobian(intr, x, y) * proj * motion;

      jtj += jac.transpose() * jac;
      jtr += jac.transpose() * res;
    }

    if (jtr.cwiseAbs().maxCoeff() <= options.gradient_tolerance) break;

    bool accepted = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Mat6 damped = jtj;
      damped.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
      const Vec6 delta = damped.ldlt().solve(-jtr);
      Pose candidate;
      candidate.r = rotation_exp(delta.head<3>()) * pose.r;
      candidate.t = pose.t + delta.tail<3>();
      const double candidate_cost = pose_cost(data, intr, candidate);
      if (candidate_cost < cost) {
        pose = candidate;
        cost = candidate_cost;
        damping = std::max(1e-12, damping / 3.0);
        accepted = true;
        break;
      }
      damping *= 10.0;
    }
    if (!accepted) break;
  }
  return pose;
}

PnpProblem build_problem(std::span<const Correspondence2D3D> correspondences,
                         const CameraIntrinsics& intr) {
  PnpProblem data;
  data.points.reserve(correspondences.size());
  data.pixels.reserve(correspondences.size());
  data.normalized.reserve(correspondences.size());
  for (const auto& c : correspondences) {
    data.points.push_back(c.pattern_point);
    data.pixels.push_back(c.pixel);
    const Vec2 d((c.pixel.x() - intr.cx) / intr.fx, (c.pixel.y() - intr.cy) / intr.fy);
    data.normalized.push_back(undistort_normalized(intr, d));
  }
  return data;
}

}  // namespace

double mean_reprojection_error(std::span<const Correspondence2D3D> correspondences,
                               const CameraIntrinsics& intr, const RigidTransform& pose) {
  if (correspondences.empty()) throw ValidationError("reprojection error: no correspondences");
  double total = 0.0;
  for (const auto& c : correspondences) {
    const Vec3 p = pose.apply(c.pattern_point);
    if (p.z() <= 0.0) {
      total += kBehindCameraResidual;
      continue;
    }
    total += (project_point(intr, p) - c.pixel).norm();
  }
  return total / static_cast<double>(correspondences.size());
}

RigidTransform solve_pnp(std::span<const Correspondence2D3D> correspondences,
                         const CameraIntrinsics& intr, const PnpOptions& options) {
  if (correspondences.size() < 6) {
    throw ValidationError("pnp: at least 6 correspondences required, got " +
                          std::to_string(correspondences.size()));
  }
  {
    std::set<std::array<double, 3>> seen;
    for (const auto& c : correspondences) {
      if (!seen.insert({c.pattern_point.x(), c.pattern_point.y(), c.pattern_point.z()})
               .second) {
        throw ValidationError("pnp: duplicate pattern points");
      }
    }
  }

  PnpProblem data = build_problem(correspondences, intr);
  const PatternShape shape = analyze_points(data.points);
  if (shape.singular_values(1) <= 1e-9 * shape.singular_values(0)) {
    throw ValidationError("pnp: degenerate configuration, pattern points are collinear");
  }
  const bool planar = shape.singular_values(2) <= 1e-6 * shape.singular_values(0);

  Pose init = planar ? homography_pose(data, shape) : dlt_pose(data);
  Pose best = refine_pose(data, intr, init, options);
  double best_cost = pose_cost(data, intr, best);

  // Random restarts guard against local minima of the refinement.
  Rng rng(options.seed);
  const double standoff = std::max(1.0, init.t.norm());
  for (int k = 0; k < options.random_restarts; ++k) {
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.squaredNorm() == 0.0) axis = Vec3::UnitZ();
    const Vec3 w = rng.uniform(0.0, M_PI) * axis.normalized();
    Pose start;
    start.r = rotation_exp(w);
    start.t = Vec3(0, 0, standoff * rng.uniform(0.5, 1.5)) - start.r * shape.centroid;
    const Pose candidate = refine_pose(data, intr, start, options);
    const double candidate_cost = pose_cost(data, intr, candidate);
    if (candidate_cost < best_cost) {
      best = candidate;
      best_cost = candidate_cost;
    }
  }
  return RigidTransform(best.r, best.t);
}

RigidTransform kabsch_umeyama(std::span<const Correspondence3D3D> pairs) {
  if (pairs.size() < 3) {
    throw ValidationError("kabsch: at least 3 pairs required, got " +
                          std::to_string(pairs.size()));
  }
  Vec3 src_centroid = Vec3::Zero();
  Vec3 dst_centroid = Vec3::Zero();
  for (const auto& p : pairs) {
    src_centroid += p.source;
    dst_centroid += p.target;
  }
  src_centroid /= static_cast<double>(pairs.size());
  dst_centroid /= static_cast<double>(pairs.size());

  Mat3 cross = Mat3::Zero();
  double src_spread = 0.0;
  for (const auto& p : pairs) {
    const Vec3 a = p.source - src_centroid;
    const Vec3 b = p.target - dst_centroid;
    cross += b * a.transpose();
    src_spread = std::max(src_spread, a.squaredNorm());
  }

  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (sigma(1) <= 1e-9 * std::max(sigma(0), 1e-300)) {
    throw ValidationError("kabsch: degenerate configuration, points are collinear");
  }

  // Reflection corrected through the sign attached to the smallest singular
  // value.
  Mat3 s = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) s(2, 2) = -1.0;
  const Mat3 r = svd.matrixU() * s * svd.matrixV().transpose();
  const Vec3 t = dst_centroid - r * src_centroid;
  return RigidTransform(r, t);
}

RigidTransform estimate_sensor_to_camera(std::span<const CalibrationView> views,
                                         const CameraIntrinsics& intr,
                                         const SensorCameraOptions& options) {
  if (views.empty()) throw ValidationError("sensor calibration: at least one view required");
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].correspondences.size() != views[v].sensor_points.size()) {
      throw ValidationError("sensor calibration: view " + std::to_string(v) +
                            ": sensor point count does not match correspondences");
    }
  }

  std::vector<std::vector<Correspondence3D3D>> per_view(views.size());
  std::string first_error;
  std::mutex error_mutex;
  parallel_for_chunks(0, views.size(), options.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t v = lo; v < hi; ++v) {
      try {
        PnpOptions pnp = options.pnp;
        pnp.seed = splitmix64(options.pnp.seed) ^ splitmix64(v + 1);
        const RigidTransform pose = solve_pnp(views[v].correspondences, intr, pnp);
        auto& pairs = per_view[v];
        pairs.reserve(views[v].correspondences.size());
        for (std::size_t k = 0; k < views[v].correspondences.size(); ++k) {
          pairs.push_back({views[v].sensor_points[k],
                           pose.apply(views[v].correspondences[k].pattern_point)});
        }
      } catch (const ValidationError& err) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) {
          first_error = "sensor calibration: view " + std::to_string(v) + ": " + err.what();
        }
      }
    }
  });
  if (!first_error.empty()) throw ValidationError(first_error);

  std::vector<Correspondence3D3D> pooled;
  for (const auto& pairs : per_view) pooled.insert(pooled.end(), pairs.begin(), pairs.end());
  return kabsch_umeyama(pooled);
}

CalibrationReport assess_calibration(const RigidTransform& estimate,
                                     std::span<const CalibrationView> holdout,
                                     const CameraIntrinsics& intr,
                                     const SensorCameraOptions& options) {
  if (holdout.empty()) throw ValidationError("assessment: empty holdout set");

  CalibrationReport report;
  report.estimate = estimate;
  for (std::size_t v = 0; v < holdout.size(); ++v) {
    if (holdout[v].correspondences.size() != holdout[v].sensor_points.size()) {
      throw ValidationError("assessment: view " + std::to_string(v) +
                            ": sensor point count does not match correspondences");
    }
    PnpOptions pnp = options.pnp;
    pnp.seed = splitmix64(options.pnp.seed) ^ splitmix64(0x5eedULL + v);
    RigidTransform pose;
    try {
      pose = solve_pnp(holdout[v].correspondences, intr, pnp);
    } catch (const ValidationError& err) {
      throw ValidationError("assessment: view " + std::to_string(v) + ": " + err.what());
    }
    for (std::size_t k = 0; k < holdout[v].correspondences.size(); ++k) {
      const Vec3 via_estimate = estimate.apply(holdout[v].sensor_points[k]);
      const Vec3 via_pnp = pose.apply(holdout[v].correspondences[k].pattern_point);
      report.residuals_mm.push_back((via_estimate - via_pnp).norm());
    }
  }

  double sum_sq = 0.0;
  for (double r : report.residuals_mm) {
    sum_sq += r * r;
    report.max_mm = std::max(report.max_mm, r);
  }
  report.rms_mm = std::sqrt(sum_sq / static_cast<double>(report.residuals_mm.size()));
  return report;
}

}  // namespace anovox
