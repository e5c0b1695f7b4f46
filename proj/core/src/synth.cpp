#include "anovox/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "anovox/bvh.hpp"
#include "anovox/render.hpp"
#include "anovox/rng.hpp"

namespace anovox {

namespace {

constexpr double kPi = std::numbers::pi;

TriangleMesh make_sphere(double radius, int tessellation) {
  const int segments = std::max(8, tessellation);
  const int rings = std::max(4, tessellation / 2);

  TriangleMesh mesh;
  mesh.vertices.emplace_back(0.0, 0.0, radius);  // north pole
  for (int r = 1; r < rings; ++r) {
    const double phi = kPi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * kPi * s / segments;
      mesh.vertices.emplace_back(radius * std::sin(phi) * std::cos(theta),
                                 radius * std::sin(phi) * std::sin(theta),
                                 radius * std::cos(phi));
    }
  }
  mesh.vertices.emplace_back(0.0, 0.0, -radius);  // south pole
  const std::uint32_t south = static_cast<std::uint32_t>(mesh.vertices.size() - 1);

  auto ring_vertex = [&](int r, int s) {
    return static_cast<std::uint32_t>(1 + (r - 1) * segments + (s % segments));
  };
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({0, ring_vertex(1, s), ring_vertex(1, s + 1)});
  }
  for (int r = 1; r < rings - 1; ++r) {
    for (int s = 0; s < segments; ++s) {
      const std::uint32_t a = ring_vertex(r, s);
      const std::uint32_t b = ring_vertex(r, s + 1);
      const std::uint32_t c = ring_vertex(r + 1, s);
      const std::uint32_t d = ring_vertex(r + 1, s + 1);
      mesh.triangles.push_back({a, c, b});
      mesh.triangles.push_back({b, c, d});
    }
  }
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({south, ring_vertex(rings - 1, s + 1), ring_vertex(rings - 1, s)});
  }
  return mesh;
}

TriangleMesh make_box(const Vec3& extents, int tessellation) {
  const int n = std::max(1, tessellation / 8);
  const Vec3 half = 0.5 * extents;
  TriangleMesh mesh;

  // Six face grids; +axis and -axis faces for each axis.
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = -1; side <= 1; side += 2) {
      const int u_axis = (axis + 1) % 3;
      const int v_axis = (axis + 2) % 3;
      const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
      for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
          Vec3 p;
          p[axis] = side * half[axis];
          p[u_axis] = -half[u_axis] + 2.0 * half[u_axis] * i / n;
          p[v_axis] = -half[v_axis] + 2.0 * half[v_axis] * j / n;
          mesh.vertices.push_back(p);
        }
      }
      auto idx = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (n + 1) + i); };
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          if (side > 0) {
            mesh.triangles.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
            mesh.triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
          } else {
            mesh.triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)});
            mesh.triangles.push_back({idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)});
          }
        }
      }
    }
  }
  return mesh;
}

TriangleMesh make_cylinder(double radius, double height, int tessellation) {
  const int segments = std::max(8, tessellation);
  const int stacks = std::max(2, tessellation / 4);
  TriangleMesh mesh;

  for (int r = 0; r <= stacks; ++r) {
    const double z = -0.5 * height + height * r / stacks;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * kPi * s / segments;
      mesh.vertices.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
    }
  }
  auto side_vertex = [&](int r, int s) {
    return static_cast<std::uint32_t>(r * segments + (s % segments));
  };
  for (int r = 0; r < stacks; ++r) {
    for (int s = 0; s < segments; ++s) {
      const std::uint32_t a = side_vertex(r, s);
      const std::uint32_t b = side_vertex(r, s + 1);
      const std::uint32_t c = side_vertex(r + 1, s);
      const std::uint32_t d = side_vertex(r + 1, s + 1);
      mesh.triangles.push_back({a, b, d});
      mesh.triangles.push_back({a, d, c});
    }
  }
  const std::uint32_t bottom = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, -0.5 * height);
  const std::uint32_t top = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.emplace_back(0.0, 0.0, 0.5 * height);
  for (int s = 0; s < segments; ++s) {
    mesh.triangles.push_back({bottom, side_vertex(0, s + 1), side_vertex(0, s)});
    mesh.triangles.push_back({top, side_vertex(stacks, s), side_vertex(stacks, s + 1)});
  }
  return mesh;
}

double distance_to_surface(const SceneSpec& spec, const Vec3& p) {
  switch (spec.shape) {
    case BaseShape::Sphere:
      return std::abs(p.norm() - 0.5 * spec.dimensions_mm.x());
    case BaseShape::Box: {
      const Vec3 half = 0.5 * spec.dimensions_mm;
      const Vec3 q = p.cwiseAbs() - half;
      const double outside = q.cwiseMax(0.0).norm();
      const double inside = std::min(q.maxCoeff(), 0.0);
      return std::abs(outside + inside);
    }
    case BaseShape::Cylinder: {
      const double rho = std::hypot(p.x(), p.y()) - 0.5 * spec.dimensions_mm.x();
      const double h = std::abs(p.z()) - 0.5 * spec.dimensions_mm.z();
      const Vec2 q(std::max(rho, 0.0), std::max(h, 0.0));
      const double outside = q.norm();
      const double inside = std::min(std::max(rho, h), 0.0);
      return std::abs(outside + inside);
    }
  }
  return 0.0;
}

/// Defect footprint metric: geodesic on spheres (analytic), Euclidean
/// otherwise.
double surface_distance(const SceneSpec& spec, const Vec3& a, const Vec3& b) {
  if (spec.shape == BaseShape::Sphere) {
    const double r = 0.5 * spec.dimensions_mm.x();
    const double cosang =
        std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
    return r * std::acos(cosang);
  }
  return (a - b).norm();
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const auto& tri : mesh.triangles) {
    const Vec3 n = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                       .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    for (std::uint32_t v : tri) normals[v] += n;  // area weighting
  }
  for (Vec3& n : normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  return normals;
}

RigidTransform look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up_hint = Vec3::UnitZ();
  if (std::abs(forward.dot(up_hint)) > 0.999) up_hint = Vec3::UnitX();
  const Vec3 right = up_hint.cross(forward).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return RigidTransform(r, -(r * eye));
}

}  // namespace

SceneMesh make_mesh(const SceneSpec& spec) {
  if (spec.tessellation < 4) throw ValidationError("make_mesh: tessellation too small");
  if ((spec.dimensions_mm.array() <= 0.0).any()) {
    throw ValidationError("make_mesh: dimensions must be positive");
  }

  SceneMesh scene;
  switch (spec.shape) {
    case BaseShape::Sphere:
      scene.mesh = make_sphere(0.5 * spec.dimensions_mm.x(), spec.tessellation);
      break;
    case BaseShape::Box:
      scene.mesh = make_box(spec.dimensions_mm, spec.tessellation);
      break;
    case BaseShape::Cylinder:
      scene.mesh = make_cylinder(0.5 * spec.dimensions_mm.x(), spec.dimensions_mm.z(),
                                 spec.tessellation);
      break;
  }
  scene.mesh.labels.assign(scene.mesh.vertices.size(), 0);
  scene.vertex_albedo.assign(scene.mesh.vertices.size(), spec.nominal_albedo);

  const std::vector<Vec3> normals = vertex_normals(scene.mesh);
  for (std::size_t d = 0; d < spec.defects.size(); ++d) {
    const DefectSpec& defect = spec.defects[d];
    if (!(defect.radius_mm > 0.0)) throw ValidationError("make_mesh: defect radius must be > 0");
    if (distance_to_surface(spec, defect.center) > defect.radius_mm) {
      throw ValidationError("make_mesh: defect " + std::to_string(d) +
                            " centre is off the surface");
    }
    const std::uint16_t id = static_cast<std::uint16_t>(d + 1);
    const bool dents = defect.type != DefectType::Appearance;
    const bool shades = defect.type != DefectType::Dent;
    const double albedo_delta =
        defect.type == DefectType::Appearance ? defect.magnitude : defect.albedo_delta;

    for (std::size_t v = 0; v < scene.mesh.vertices.size(); ++v) {
      const double dist = surface_distance(spec, scene.mesh.vertices[v], defect.center);
      if (dist > defect.radius_mm) continue;
      // Smallest ID wins if footprints overlap.
      if (scene.mesh.labels[v] == 0 || id < scene.mesh.labels[v]) scene.mesh.labels[v] = id;
      if (dents) {
        const double falloff = 0.5 * (1.0 + std::cos(kPi * dist / defect.radius_mm));
        scene.mesh.vertices[v] -= defect.magnitude * falloff * normals[v];
      }
      if (shades) {
        scene.vertex_albedo[v] =
            std::clamp(scene.vertex_albedo[v] + albedo_delta, 0.0, 1.0);
      }
    }
  }
  scene.mesh.remove_degenerate_triangles();
  return scene;
}

ScanSpec default_scan_spec(int image_size, int view_count) {
  ScanSpec scan;
  scan.view_count = view_count;
  scan.intrinsics = CameraIntrinsics(1.2 * image_size, 1.2 * image_size,
                                     0.5 * (image_size - 1), 0.5 * (image_size - 1),
                                     image_size, image_size);
  // Representative rigid offset between the point-cloud frame and the left
  // camera of the rig.
  const Vec3 axis = Vec3(1.0, 2.0, 3.0).normalized();
  const double angle = 3.0 * kPi / 180.0;
  const Mat3 k = (Mat3() << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(),
                  0)
                     .finished();
  const Mat3 r = Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
  scan.sensor_to_camera = RigidTransform(r, Vec3(25.0, -15.0, 40.0));
  return scan;
}

SyntheticScan simulate_scan(const SceneMesh& scene, const ScanSpec& scan) {
  if (scan.view_count < 1) throw ValidationError("simulate_scan: at least one view required");
  scan.intrinsics.validate();

  // Ring of poses on a hemisphere around the object.
  std::vector<RigidTransform> object_to_camera;  // W2C per view
  const double phi = scan.elevation_deg * kPi / 180.0;
  for (int i = 0; i < scan.view_count; ++i) {
    const double theta = 2.0 * kPi * i / scan.view_count;
    const Vec3 eye = scan.hemisphere_radius_mm *
                     Vec3(std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta),
                          std::sin(phi));
    object_to_camera.push_back(look_at(eye, Vec3::Zero()));
  }

  // The MRF coincides with the SRF of view 0, so [R_0|T_0] = [I|0] exactly.
  const RigidTransform& s2c = scan.sensor_to_camera;
  const RigidTransform object_to_mrf = s2c.inverse().compose(object_to_camera[0]);
  std::vector<RigidTransform> view_to_ref;
  view_to_ref.push_back(RigidTransform::identity());
  for (int i = 1; i < scan.view_count; ++i) {
    view_to_ref.push_back(
        object_to_mrf.compose(object_to_camera[i].inverse()).compose(s2c));
  }

  SyntheticScan result{.images = {},
                       .depths = {},
                       .chain = FrameChain(s2c, std::move(view_to_ref)),
                       .mesh = scene.mesh,
                       .vertex_albedo = scene.vertex_albedo};
  for (Vec3& v : result.mesh.vertices) v = object_to_mrf.apply(v);

  // Flat shading: a triangle's albedo is the mean of its vertices'.
  std::vector<double> triangle_albedo(result.mesh.triangles.size());
  for (std::size_t t = 0; t < result.mesh.triangles.size(); ++t) {
    const auto& tri = result.mesh.triangles[t];
    triangle_albedo[t] = (scene.vertex_albedo[tri[0]] + scene.vertex_albedo[tri[1]] +
                          scene.vertex_albedo[tri[2]]) /
                         3.0;
  }

  const Bvh bvh(result.mesh);
  for (int i = 0; i < scan.view_count; ++i) {
    const RigidTransform mesh_to_camera = result.chain.mesh_to_camera(i);
    ShadedViewRender view =
        render_shaded(bvh, triangle_albedo, scan.intrinsics, mesh_to_camera, scan.threads);
    if (scan.image_noise > 0.0) {
      Rng rng = Rng::stream(scan.seed, static_cast<std::uint64_t>(i));
      for (double& p : view.image.pixels) {
        p = std::clamp(p + rng.uniform(-scan.image_noise, scan.image_noise), 0.0, 1.0);
      }
    }
    result.images.push_back(std::move(view.image));
    result.depths.push_back(std::move(view.depth));
  }
  return result;
}

std::vector<AnomalyMap2D> reference_diff_detector(std::span<const Image> test_views,
                                                  std::span<const Image> nominal_views) {
  if (test_views.size() != nominal_views.size()) {
    throw ValidationError("diff detector: view counts do not match");
  }

  auto box3 = [](const Image& img) {
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        double sum = 0.0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            const int yy = y + dy;
            if (xx < 0 || xx >= img.width || yy < 0 || yy >= img.height) continue;
            sum += img.at(xx, yy);
            ++n;
          }
        }
        out.at(x, y) = sum / n;
      }
    }
    return out;
  };

  std::vector<AnomalyMap2D> maps;
  maps.reserve(test_views.size());
  for (std::size_t v = 0; v < test_views.size(); ++v) {
    const Image& t = test_views[v];
    const Image& n = nominal_views[v];
    if (t.width != n.width || t.height != n.height) {
      throw ValidationError("diff detector: view " + std::to_string(v) +
                            " resolution mismatch");
    }
    const Image ts = box3(t);
    const Image ns = box3(n);
    AnomalyMap2D map(t.width, t.height);
    for (std::size_t i = 0; i < map.scores.size(); ++i) {
      map.scores[i] = std::abs(ts.pixels[i] - ns.pixels[i]);
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

}  // namespace anovox
