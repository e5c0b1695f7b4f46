#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anovox/fusion.hpp"
#include "anovox/geometry.hpp"
#include "anovox/mesh.hpp"

namespace anovox {

enum class BaseShape { Sphere, Box, Cylinder };

enum class DefectType {
  Dent,          // inward displacement along vertex normals, geometry only
  Appearance,    // albedo delta only, geometry untouched
  Contamination  // both
};

struct DefectSpec {
  DefectType type = DefectType::Appearance;
  Vec3 center = Vec3::Zero();   // on the surface (snapped; must be within radius_mm of it)
  double radius_mm = 10.0;      // footprint radius (geodesic on spheres)
  double magnitude = 0.3;       // dent/contamination: depth in mm; appearance: albedo delta
  double albedo_delta = -0.2;   // contamination only: appearance component
};

struct SceneSpec {
  BaseShape shape = BaseShape::Sphere;
  /// Sphere: x = diameter. Box: full extents. Cylinder: x = diameter, z = height.
  Vec3 dimensions_mm = Vec3(120.0, 120.0, 120.0);
  int tessellation = 64;
  double nominal_albedo = 0.75;
  std::vector<DefectSpec> defects;
};

struct SceneMesh {
  TriangleMesh mesh;                  // labels carry defect IDs (1-based)
  std::vector<double> vertex_albedo;  // one per vertex
};

/// Parametric mesh with injected defects: dents displace labeled vertices
/// inward along their normals with a smooth falloff peaking at `magnitude`;
/// appearance defects change albedo only; contaminations do both. A defect
/// whose centre is farther than its radius from the surface is rejected.
SceneMesh make_mesh(const SceneSpec& spec);

struct ScanSpec {
  int view_count = 12;
  double hemisphere_radius_mm = 420.0;
  double elevation_deg = 35.0;
  CameraIntrinsics intrinsics;
  /// Fixed SRF -> CRF offset of the simulated rig.
  RigidTransform sensor_to_camera;
  double image_noise = 0.0;  // uniform +/- amplitude added per pixel
  std::uint64_t seed = 0;
  int threads = 1;
};

/// A camera ring rig with a realistic sensor-to-camera offset.
ScanSpec default_scan_spec(int image_size = 256, int view_count = 12);

struct SyntheticScan {
  std::vector<Image> images;
  std::vector<DepthMap> depths;
  FrameChain chain;        // sensor_to_camera + per-view [R_i|T_i]
  TriangleMesh mesh;       // scene mesh expressed in the MRF
  std::vector<double> vertex_albedo;
};

/// Renders the headlight-shaded views and depths of a camera ring sampled
/// from a hemisphere around the object. Poses follow the dataset convention:
/// view_to_ref aligns view i to view 0 and view 0 is the identity; the mesh
/// is returned in the MRF (the SRF of view 0). Deterministic given spec +
/// seed.
SyntheticScan simulate_scan(const SceneMesh& scene, const ScanSpec& scan);

/// Minimal nominal-reference detector: per-pixel |test - nominal| after 3x3
/// box smoothing of both inputs. Views pair up by index.
std::vector<AnomalyMap2D> reference_diff_detector(std::span<const Image> test_views,
                                                  std::span<const Image> nominal_views);

}  // namespace anovox
