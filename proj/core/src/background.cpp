#include "anovox/background.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

#include "anovox/parallel.hpp"
#include "anovox/rng.hpp"

namespace anovox {

namespace {

struct FitResult {
  Vec3 normal;
  double d;
};

FitResult fit_plane_least_squares(std::span<const Vec3> points,
                                  std::span<const std::uint32_t> subset) {
  Vec3 centroid = Vec3::Zero();
  for (std::uint32_t i : subset) centroid += points[i];
  centroid /= static_cast<double>(subset.size());

  Mat3 cov = Mat3::Zero();
  for (std::uint32_t i : subset) {
    const Vec3 q = points[i] - centroid;
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 n = eig.eigenvectors().col(0);  // smallest eigenvalue
  return {n, -n.dot(centroid)};
}

void sample_distinct(Rng& rng, std::size_t population, int count,
                     std::vector<std::uint32_t>& out) {
  out.clear();
  while (out.size() < static_cast<std::size_t>(count)) {
    const std::uint32_t idx = static_cast<std::uint32_t>(rng.index(population));
    if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
  }
}

std::size_t count_inliers(std::span<const Vec3> points, const Vec3& n, double d, double tau) {
  std::size_t count = 0;
  for (const Vec3& p : points) {
    if (std::abs(n.dot(p) + d) <= tau) ++count;
  }
  return count;
}

}  // namespace

Plane ransac_plane(std::span<const Vec3> points, const RansacPlaneOptions& options) {
  if (options.sample_size < 3) {
    throw ValidationError("ransac_plane: sample_size must be at least 3");
  }
  if (points.size() < static_cast<std::size_t>(options.sample_size)) {
    throw ValidationError("ransac_plane: fewer points (" + std::to_string(points.size()) +
                          ") than sample_size (" + std::to_string(options.sample_size) + ")");
  }
  if (!(options.tau > 0.0)) throw ValidationError("ransac_plane: tau must be positive");
  if (options.iterations < 1) throw ValidationError("ransac_plane: iterations must be >= 1");

  // Best candidate = (max inlier count, min iteration index). Each iteration
  // draws from its own seeded stream, so the scan parallelizes without
  // changing the result.
  struct Best {
    std::size_t count = 0;
    int iteration = -1;
  };
  Best best;
  std::mutex merge_mutex;

  const int iterations = options.iterations;
  parallel_for_chunks(0, static_cast<std::size_t>(iterations), options.threads,
                      [&](std::size_t lo, std::size_t hi) {
                        Best local;
                        std::vector<std::uint32_t> subset;
                        for (std::size_t it = lo; it < hi; ++it) {
                          Rng rng = Rng::stream(options.seed, it);
                          sample_distinct(rng, points.size(), options.sample_size, subset);
                          const FitResult fit = fit_plane_least_squares(points, subset);
                          const std::size_t inliers =
                              count_inliers(points, fit.normal, fit.d, options.tau);
                          if (inliers > local.count ||
                              (inliers == local.count && local.iteration >= 0 &&
                               static_cast<int>(it) < local.iteration)) {
                            local.count = inliers;
                            local.iteration = static_cast<int>(it);
                          } else if (local.iteration < 0) {
                            local.count = inliers;
                            local.iteration = static_cast<int>(it);
                          }
                        }
                        std::lock_guard<std::mutex> lock(merge_mutex);
                        if (local.count > best.count ||
                            (local.count == best.count &&
                             (best.iteration < 0 || local.iteration < best.iteration))) {
                          best = local;
                        }
                      });

  // Re-run the winning iteration to recover its candidate plane, then refit
  // over that candidate's consensus set.
  Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(best.iteration));
  std::vector<std::uint32_t> subset;
  sample_distinct(rng, points.size(), options.sample_size, subset);
  FitResult candidate = fit_plane_least_squares(points, subset);

  std::vector<std::uint32_t> inliers;
  inliers.reserve(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    if (std::abs(candidate.normal.dot(points[i]) + candidate.d) <= options.tau) {
      inliers.push_back(i);
    }
  }
  FitResult refined = inliers.size() >= 3 ? fit_plane_least_squares(points, inliers) : candidate;

  // Orient the normal toward the object: most non-inlier points must end up
  // on the positive side. With no outliers fall back to a canonical sign.
  std::size_t positive = 0, negative = 0;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const double sd = refined.normal.dot(points[i]) + refined.d;
    if (std::abs(sd) <= options.tau) continue;
    (sd > 0.0 ? positive : negative)++;
  }
  bool flip;
  if (positive + negative > 0) {
    flip = negative > positive;
  } else {
    int axis;
    refined.normal.cwiseAbs().maxCoeff(&axis);
    flip = refined.normal[axis] < 0.0;
  }
  if (flip) {
    refined.normal = -refined.normal;
    refined.d = -refined.d;
  }
  return Plane(refined.normal, refined.d);
}

BackgroundRemovalResult remove_background(const TriangleMesh& mesh, const Plane& plane,
                                          double alpha) {
  std::vector<std::uint32_t> remap(mesh.vertices.size(), UINT32_MAX);
  BackgroundRemovalResult result;
  result.mesh.vertices.reserve(mesh.vertices.size());
  const bool labeled = mesh.has_labels();

  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (plane.signed_distance(mesh.vertices[v]) > alpha) {
      remap[v] = static_cast<std::uint32_t>(result.mesh.vertices.size());
      result.mesh.vertices.push_back(mesh.vertices[v]);
      if (labeled) result.mesh.labels.push_back(mesh.labels[v]);
    }
  }
  for (const auto& tri : mesh.triangles) {
    const std::array<std::uint32_t, 3> mapped{remap[tri[0]], remap[tri[1]], remap[tri[2]]};
    if (mapped[0] != UINT32_MAX && mapped[1] != UINT32_MAX && mapped[2] != UINT32_MAX) {
      result.mesh.triangles.push_back(mapped);
    }
  }
  result.removed_vertices = mesh.vertices.size() - result.mesh.vertices.size();
  result.empty_result = result.mesh.vertices.empty();
  return result;
}

}  // namespace anovox
