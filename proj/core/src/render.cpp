#include "anovox/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "anovox/parallel.hpp"

namespace anovox {

namespace {

struct CameraRays {
  RigidTransform camera_to_mesh;
  Vec3 origin_mesh;  // camera centre in mesh frame

  explicit CameraRays(const RigidTransform& mesh_to_camera)
      : camera_to_mesh(mesh_to_camera.inverse()),
        origin_mesh(camera_to_mesh.translation()) {}

  /// Mesh-frame ray through pixel centre (x, y). The direction is scaled so
  /// that the hit parameter t equals depth along the camera z axis.
  bool pixel_ray(const CameraIntrinsics& intr, int x, int y, Ray& ray) const {
    Vec2 d((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy);
    Vec2 n;
    if (intr.has_distortion()) {
      try {
        n = undistort_normalized(intr, d);
      } catch (const ValidationError&) {
        return false;  // outside the distortion model's domain
      }
    } else {
      n = d;
    }
    ray.origin = origin_mesh;
    ray.direction = camera_to_mesh.rotation() * Vec3(n.x(), n.y(), 1.0);
    return true;
  }
};

}  // namespace

namespace {

template <typename Target>
DepthMap render_depth_impl(const Target& target, const CameraIntrinsics& intr,
                           const RigidTransform& mesh_to_camera, int threads) {
  intr.validate();
  DepthMap depth(intr.width, intr.height);
  const CameraRays rays(mesh_to_camera);

  parallel_for_chunks(0, static_cast<std::size_t>(intr.height), resolve_threads(threads),
                      [&](std::size_t y0, std::size_t y1) {
                        Ray ray;
                        for (std::size_t y = y0; y < y1; ++y) {
                          for (int x = 0; x < intr.width; ++x) {
                            if (!rays.pixel_ray(intr, x, static_cast<int>(y), ray)) continue;
                            const RayHit hit = target.intersect(ray);
                            if (hit.valid()) depth.at(x, static_cast<int>(y)) = hit.t;
                          }
                        }
                      });
  return depth;
}

}  // namespace

DepthMap render_depth(const Bvh& bvh, const CameraIntrinsics& intr,
                      const RigidTransform& mesh_to_camera, int threads) {
  return render_depth_impl(bvh, intr, mesh_to_camera, threads);
}

RayHit SphereTarget::intersect(const Ray& ray) const {
  // Quadratic in the (possibly non-unit) ray parameterisation.
  const Vec3 oc = ray.origin - center;
  const double a = ray.direction.squaredNorm();
  const double b = 2.0 * oc.dot(ray.direction);
  const double c = oc.squaredNorm() - radius * radius;
  const double disc = b * b - 4.0 * a * c;
  RayHit hit;
  if (disc < 0.0 || a == 0.0) return hit;
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / (2.0 * a);
  if (!(t > 0.0)) t = (-b + sq) / (2.0 * a);
  if (!(t > 0.0)) return hit;
  hit.t = t;
  hit.triangle = 0;
  return hit;
}

DepthMap render_depth(const SphereTarget& sphere, const CameraIntrinsics& intr,
                      const RigidTransform& mesh_to_camera, int threads) {
  return render_depth_impl(sphere, intr, mesh_to_camera, threads);
}

ShadedViewRender render_shaded(const Bvh& bvh, std::span<const double> triangle_albedo,
                               const CameraIntrinsics& intr,
                               const RigidTransform& mesh_to_camera, int threads) {
  intr.validate();
  if (triangle_albedo.size() != bvh.triangle_count()) {
    throw ValidationError("render_shaded: albedo count does not match triangle count");
  }
  ShadedViewRender out;
  out.image = Image(intr.width, intr.height);
  out.depth = DepthMap(intr.width, intr.height);
  const CameraRays rays(mesh_to_camera);

  parallel_for_chunks(
      0, static_cast<std::size_t>(intr.height), resolve_threads(threads),
      [&](std::size_t y0, std::size_t y1) {
        Ray ray;
        for (std::size_t y = y0; y < y1; ++y) {
          for (int x = 0; x < intr.width; ++x) {
            if (!rays.pixel_ray(intr, x, static_cast<int>(y), ray)) continue;
            const RayHit hit = bvh.intersect(ray);
            if (!hit.valid()) continue;
            out.depth.at(x, static_cast<int>(y)) = hit.t;
            const auto& tri = bvh.triangle(hit.triangle);
            const Vec3 normal = (tri.v1 - tri.v0).cross(tri.v2 - tri.v0).normalized();
            const Vec3 view = -ray.direction.normalized();
            const double shade = std::max(0.0, normal.dot(view));
            out.image.at(x, static_cast<int>(y)) = triangle_albedo[hit.triangle] * shade;
          }
        }
      });
  return out;
}

DepthMap pad_and_downsample_depth(const DepthMap& depth, int target) {
  if (target < 1) throw ValidationError("downsample: target must be >= 1");
  const int side = std::max(depth.width, depth.height);
  DepthMap out(target, target);
  const double scale = static_cast<double>(side) / target;

  for (int ty = 0; ty < target; ++ty) {
    const int y0 = static_cast<int>(std::floor(ty * scale));
    const int y1 = std::min(side, static_cast<int>(std::ceil((ty + 1) * scale)));
    for (int tx = 0; tx < target; ++tx) {
      const int x0 = static_cast<int>(std::floor(tx * scale));
      const int x1 = std::min(side, static_cast<int>(std::ceil((tx + 1) * scale)));
      double best = 0.0;
      for (int y = y0; y < y1; ++y) {
        if (y >= depth.height) break;  // padded rows are invalid
        for (int x = x0; x < x1 && x < depth.width; ++x) {
          const double v = depth.at(x, y);
          if (v > 0.0 && (best == 0.0 || v < best)) best = v;
        }
      }
      out.at(tx, ty) = best;
    }
  }
  return out;
}

Image pad_and_downsample_image(const Image& image, int target) {
  if (target < 1) throw ValidationError("downsample: target must be >= 1");
  const int side = std::max(image.width, image.height);
  Image out(target, target);
  const double scale = static_cast<double>(side) / target;

  for (int ty = 0; ty < target; ++ty) {
    const double fy0 = ty * scale;
    const double fy1 = (ty + 1) * scale;
    for (int tx = 0; tx < target; ++tx) {
      const double fx0 = tx * scale;
      const double fx1 = (tx + 1) * scale;
      double sum = 0.0;  // padding contributes zeros, so only overlap with
                         // the source image accumulates
      for (int y = static_cast<int>(std::floor(fy0));
           y < std::min(image.height, static_cast<int>(std::ceil(fy1))); ++y) {
        const double wy = std::min<double>(y + 1, fy1) - std::max<double>(y, fy0);
        for (int x = static_cast<int>(std::floor(fx0));
             x < std::min(image.width, static_cast<int>(std::ceil(fx1))); ++x) {
          const double wx = std::min<double>(x + 1, fx1) - std::max<double>(x, fx0);
          sum += wx * wy * image.at(x, y);
        }
      }
      out.at(tx, ty) = sum / (scale * scale);
    }
  }
  return out;
}

CameraIntrinsics scale_intrinsics(const CameraIntrinsics& intr, int target, int side) {
  if (side <= 0) side = std::max(intr.width, intr.height);
  const double s = static_cast<double>(target) / side;
  CameraIntrinsics scaled = intr;
  scaled.fx = intr.fx * s;
  scaled.fy = intr.fy * s;
  // Pixel centres sit on integers, so the padded pixel grid occupies
  // [-0.5, side - 0.5) and maps affinely onto [-0.5, target - 0.5).
  scaled.cx = (intr.cx + 0.5) * s - 0.5;
  scaled.cy = (intr.cy + 0.5) * s - 0.5;
  scaled.width = target;
  scaled.height = target;
  scaled.validate();
  return scaled;
}

PointCloud depth_to_pointcloud(const DepthMap& depth, const CameraIntrinsics& intr) {
  if (intr.width != depth.width || intr.height != depth.height) {
    throw ValidationError("depth_to_pointcloud: intrinsics resolution (" +
                          std::to_string(intr.width) + "x" + std::to_string(intr.height) +
                          ") does not match depth map (" + std::to_string(depth.width) + "x" +
                          std::to_string(depth.height) + ")");
  }
  PointCloud cloud;
  cloud.width = depth.width;
  cloud.height = depth.height;
  cloud.points.assign(depth.values.size(), Vec3::Zero());
  cloud.valid.assign(depth.values.size(), 0);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const double d = depth.at(x, y);
      if (d <= 0.0) continue;
      const std::size_t i = static_cast<std::size_t>(y) * depth.width + x;
      cloud.points[i] = unproject_pixel(intr, Vec2(x, y), d);
      cloud.valid[i] = 1;
    }
  }
  return cloud;
}

}  // namespace anovox
