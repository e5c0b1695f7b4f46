#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anovox/geometry.hpp"
#include "anovox/voxel.hpp"

namespace anovox {

enum class InstanceRole { Train, Test };
enum class InstanceCondition { Nominal, Anomalous };
enum class InstanceSetup { Real, Synth };

std::string to_string(InstanceRole role);
std::string to_string(InstanceCondition condition);
std::string to_string(InstanceSetup setup);

struct ViewRecord {
  std::string image_path;  // relative to the manifest directory
  std::string depth_path;
  RigidTransform pose;  // [R_i|T_i], view SRF -> reference (view 0) frame
};

struct InstanceRecord {
  std::string id;
  InstanceRole role = InstanceRole::Test;
  InstanceCondition condition = InstanceCondition::Nominal;
  InstanceSetup setup = InstanceSetup::Real;
  std::string mesh_path;
  std::string gt_volume_path;  // empty unless anomalous with ground truth
  GridSpec grid;
  std::vector<ViewRecord> views;
};

/// One object type's dataset: a single-instance training set per setup and a
/// shared test set, mirroring the benchmark layout.
struct DatasetManifest {
  std::filesystem::path root;  // directory holding the manifest
  std::string object_name;
  CameraIntrinsics intrinsics;
  RigidTransform sensor_to_camera;
  bool rectified = false;  // images already distortion-corrected
  std::vector<InstanceRecord> instances;

  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
  const InstanceRecord& train_instance(InstanceSetup setup) const;
  std::vector<const InstanceRecord*> test_instances() const;  // sorted by id
};

/// Loads and validates a manifest: schema, the single-instance invariant
/// (at most one train instance per setup, at least one overall) and the
/// existence of every referenced file. Schema and invariant problems raise
/// ValidationError; missing files raise IoError listing all of them.
DatasetManifest load_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Options for the synthetic desk-scale benchmark emitter.
struct SyntheticDatasetOptions {
  std::string object_name = "synthetic_sphere";
  int image_size = 256;
  int views = 12;
  int nominal_test_instances = 6;
  int defective_test_instances = 6;
  double voxel_size = 2.0;
  int grid_padding = 2;
  double image_noise = 0.002;
  std::uint64_t seed = 2025;
  int threads = 0;
};

/// Emits a complete synthetic dataset (meshes, PNG views, PFM depths, poses,
/// GT volumes and the manifest) into `dir`, using the synthetic harness.
/// Returns the manifest path. The layout is the same one load_manifest
/// consumes, so synthetic and real data are interchangeable.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const SyntheticDatasetOptions& options = {});

}  // namespace anovox
