#include "anovox/manifest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

#include "anovox/io/pfm.hpp"
#include "anovox/io/ply.hpp"
#include "anovox/io/png.hpp"
#include "anovox/io/pose_json.hpp"
#include "anovox/io/simv.hpp"
#include "anovox/rng.hpp"
#include "anovox/synth.hpp"

namespace anovox {

using nlohmann::json;

std::string to_string(InstanceRole role) {
  return role == InstanceRole::Train ? "train" : "test";
}
std::string to_string(InstanceCondition condition) {
  return condition == InstanceCondition::Nominal ? "nominal" : "anomalous";
}
std::string to_string(InstanceSetup setup) {
  return setup == InstanceSetup::Real ? "real" : "synth";
}

namespace {

InstanceRole role_from_string(const std::string& s) {
  if (s == "train") return InstanceRole::Train;
  if (s == "test") return InstanceRole::Test;
  throw ValidationError("manifest schema: unknown role '" + s + "'");
}

InstanceCondition condition_from_string(const std::string& s) {
  if (s == "nominal") return InstanceCondition::Nominal;
  if (s == "anomalous") return InstanceCondition::Anomalous;
  throw ValidationError("manifest schema: unknown condition '" + s + "'");
}

InstanceSetup setup_from_string(const std::string& s) {
  if (s == "real") return InstanceSetup::Real;
  if (s == "synth") return InstanceSetup::Synth;
  throw ValidationError("manifest schema: unknown setup '" + s + "'");
}

GridSpec grid_from_json(const json& j) {
  if (!j.contains("origin") || !j.contains("voxel_size") || !j.contains("dims")) {
    throw ValidationError("manifest schema: grid needs origin, voxel_size and dims");
  }
  GridSpec spec;
  for (int a = 0; a < 3; ++a) {
    spec.origin[a] = j["origin"][a].get<double>();
    spec.dims[a] = j["dims"][a].get<std::uint32_t>();
  }
  spec.voxel_size = j["voxel_size"].get<double>();
  spec.validate();
  return spec;
}

json grid_to_json(const GridSpec& spec) {
  return json{{"origin", {spec.origin[0], spec.origin[1], spec.origin[2]}},
              {"voxel_size", spec.voxel_size},
              {"dims", {spec.dims[0], spec.dims[1], spec.dims[2]}}};
}

}  // namespace

const InstanceRecord& DatasetManifest::train_instance(InstanceSetup setup) const {
  for (const auto& instance : instances) {
    if (instance.role == InstanceRole::Train && instance.setup == setup) return instance;
  }
  throw ValidationError("manifest: no " + to_string(setup) + " train instance");
}

std::vector<const InstanceRecord*> DatasetManifest::test_instances() const {
  std::vector<const InstanceRecord*> out;
  for (const auto& instance : instances) {
    if (instance.role == InstanceRole::Test) out.push_back(&instance);
  }
  std::sort(out.begin(), out.end(),
            [](const InstanceRecord* a, const InstanceRecord* b) { return a->id < b->id; });
  return out;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  DatasetManifest manifest;
  manifest.root = path.parent_path();

  for (const char* key : {"object", "intrinsics", "sensor_to_camera", "instances"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("manifest schema: missing field '") + key + "'");
    }
  }
  manifest.object_name = j["object"].get<std::string>();
  manifest.intrinsics = intrinsics_from_json(j["intrinsics"]);
  manifest.sensor_to_camera = pose_from_json(j["sensor_to_camera"]);
  manifest.rectified = j.value("rectified", false);

  std::set<std::string> ids;
  int train_per_setup[2] = {0, 0};
  for (const json& ij : j["instances"]) {
    InstanceRecord instance;
    for (const char* key : {"id", "role", "condition", "setup", "mesh", "grid", "views"}) {
      if (!ij.contains(key)) {
        throw ValidationError(std::string("manifest schema: instance missing field '") + key +
                              "'");
      }
    }
    instance.id = ij["id"].get<std::string>();
    if (!ids.insert(instance.id).second) {
      throw ValidationError("manifest schema: duplicate instance id '" + instance.id + "'");
    }
    instance.role = role_from_string(ij["role"].get<std::string>());
    instance.condition = condition_from_string(ij["condition"].get<std::string>());
    instance.setup = setup_from_string(ij["setup"].get<std::string>());
    instance.mesh_path = ij["mesh"].get<std::string>();
    instance.gt_volume_path = ij.value("gt_volume", "");
    instance.grid = grid_from_json(ij["grid"]);

    if (ij["views"].empty()) {
      throw ValidationError("manifest schema: instance '" + instance.id + "' has no views");
    }
    for (const json& vj : ij["views"]) {
      ViewRecord view;
      view.image_path = vj.at("image").get<std::string>();
      view.depth_path = vj.at("depth").get<std::string>();
      view.pose = pose_from_json(vj.at("pose"));
      instance.views.push_back(std::move(view));
    }
    if (!instance.views.front().pose.is_identity()) {
      throw ValidationError("manifest schema: instance '" + instance.id +
                            "': view 0 pose must be the identity");
    }

    if (instance.role == InstanceRole::Train) {
      if (instance.condition != InstanceCondition::Nominal) {
        throw ValidationError("manifest schema: train instance '" + instance.id +
                              "' must be nominal");
      }
      if (++train_per_setup[static_cast<int>(instance.setup)] > 1) {
        throw ValidationError("manifest: single-instance violated, more than one " +
                              to_string(instance.setup) + " train instance");
      }
    }
    manifest.instances.push_back(std::move(instance));
  }
  if (train_per_setup[0] + train_per_setup[1] == 0) {
    throw ValidationError("manifest: no train instance");
  }

  // Every referenced file must exist; report all misses at once.
  std::string missing;
  auto check = [&](const std::string& rel) {
    if (rel.empty()) return;
    const auto full = manifest.resolve(rel);
    if (!std::filesystem::exists(full)) missing += "\n  " + full.string();
  };
  for (const auto& instance : manifest.instances) {
    check(instance.mesh_path);
    check(instance.gt_volume_path);
    for (const auto& view : instance.views) {
      check(view.image_path);
      check(view.depth_path);
    }
  }
  if (!missing.empty()) throw IoError("manifest: missing files:" + missing);
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  json instances = json::array();
  for (const auto& instance : manifest.instances) {
    json views = json::array();
    for (const auto& view : instance.views) {
      views.push_back({{"image", view.image_path},
                       {"depth", view.depth_path},
                       {"pose", pose_to_json(view.pose)}});
    }
    json ij{{"id", instance.id},
            {"role", to_string(instance.role)},
            {"condition", to_string(instance.condition)},
            {"setup", to_string(instance.setup)},
            {"mesh", instance.mesh_path},
            {"grid", grid_to_json(instance.grid)},
            {"views", views}};
    if (!instance.gt_volume_path.empty()) ij["gt_volume"] = instance.gt_volume_path;
    instances.push_back(std::move(ij));
  }
  const json j{{"object", manifest.object_name},
               {"intrinsics", intrinsics_to_json(manifest.intrinsics)},
               {"sensor_to_camera", pose_to_json(manifest.sensor_to_camera)},
               {"rectified", manifest.rectified},
               {"instances", instances}};
  write_json_file(path, j);
}

namespace {

std::vector<DefectSpec> draw_defects(const SceneSpec& base, Rng& rng) {
  const double radius = 0.5 * base.dimensions_mm.x();
  const int count = 1 + static_cast<int>(rng.index(3));
  std::vector<DefectSpec> defects;
  for (int d = 0; d < count; ++d) {
    DefectSpec defect;
    const int kind = static_cast<int>(rng.index(3));
    defect.type = kind == 0   ? DefectType::Dent
                  : kind == 1 ? DefectType::Appearance
                              : DefectType::Contamination;
    // Keep defects in the band the camera ring actually sees.
    const double azimuth = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double elevation = rng.uniform(-0.35, 0.8);
    defect.center = radius * Vec3(std::cos(elevation) * std::cos(azimuth),
                                  std::cos(elevation) * std::sin(azimuth),
                                  std::sin(elevation));
    defect.radius_mm = rng.uniform(9.0, 14.0);
    if (defect.type == DefectType::Appearance) {
      defect.magnitude = -rng.uniform(0.25, 0.4);  // darker patch
    } else {
      defect.magnitude = rng.uniform(2.5, 4.0);  // dent depth, mm
      defect.albedo_delta = -0.3;
    }
    defects.push_back(defect);
  }
  return defects;
}

struct InstancePlan {
  std::string id;
  InstanceRole role;
  InstanceCondition condition;
  InstanceSetup setup;
  std::uint64_t seed;
  std::vector<DefectSpec> defects;
};

}  // namespace

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir,
                                              const SyntheticDatasetOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  SceneSpec base_scene;
  base_scene.shape = BaseShape::Sphere;
  base_scene.dimensions_mm = Vec3(110.0, 110.0, 110.0);
  base_scene.tessellation = 96;
  base_scene.nominal_albedo = 0.72;

  ScanSpec scan = default_scan_spec(options.image_size, options.views);
  scan.image_noise = options.image_noise;
  scan.threads = options.threads;

  std::vector<InstancePlan> plans;
  plans.push_back({"train", InstanceRole::Train, InstanceCondition::Nominal,
                   InstanceSetup::Synth, splitmix64(options.seed) ^ 0x7261696eULL, {}});
  for (int i = 0; i < options.nominal_test_instances; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "test_nominal_%02d", i);
    plans.push_back({id, InstanceRole::Test, InstanceCondition::Nominal, InstanceSetup::Real,
                     Rng::stream(options.seed, 200 + i).bits(), {}});
  }
  for (int i = 0; i < options.defective_test_instances; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "test_defect_%02d", i);
    Rng rng = Rng::stream(options.seed, 300 + i);
    plans.push_back({id, InstanceRole::Test, InstanceCondition::Anomalous, InstanceSetup::Real,
                     rng.bits(), draw_defects(base_scene, rng)});
  }

  DatasetManifest manifest;
  manifest.root = dir;
  manifest.object_name = options.object_name;
  manifest.intrinsics = scan.intrinsics;
  manifest.sensor_to_camera = scan.sensor_to_camera;
  manifest.rectified = false;

  GridSpec shared_grid;
  bool grid_ready = false;

  for (const InstancePlan& plan : plans) {
    SceneSpec scene_spec = base_scene;
    scene_spec.defects = plan.defects;
    const SceneMesh scene = make_mesh(scene_spec);

    ScanSpec instance_scan = scan;
    instance_scan.seed = plan.seed;
    const SyntheticScan rendered = simulate_scan(scene, instance_scan);

    if (!grid_ready) {
      shared_grid = grid_from_mesh(rendered.mesh, options.voxel_size, options.grid_padding);
      grid_ready = true;
    }

    const fs::path instance_dir = dir / plan.id;
    fs::create_directories(instance_dir / "views");

    InstanceRecord record;
    record.id = plan.id;
    record.role = plan.role;
    record.condition = plan.condition;
    record.setup = plan.setup;
    record.grid = shared_grid;
    record.mesh_path = plan.id + "/mesh.ply";
    write_ply(dir / record.mesh_path, rendered.mesh);

    for (int v = 0; v < options.views; ++v) {
      char image_name[48], depth_name[48];
      std::snprintf(image_name, sizeof(image_name), "views/view_%03d.png", v);
      std::snprintf(depth_name, sizeof(depth_name), "views/depth_%03d.pfm", v);
      write_png_gray8(instance_dir / image_name, rendered.images[v]);
      write_pfm(instance_dir / depth_name, rendered.depths[v]);
      ViewRecord view;
      view.image_path = plan.id + "/" + image_name;
      view.depth_path = plan.id + "/" + depth_name;
      view.pose = rendered.chain.view_to_ref(v);
      record.views.push_back(std::move(view));
    }

    if (plan.condition == InstanceCondition::Anomalous) {
      const GroundTruthVolume gt =
          voxelize_labeled_mesh(rendered.mesh, shared_grid, options.threads);
      record.gt_volume_path = plan.id + "/gt.simv";
      write_simv(dir / record.gt_volume_path, gt);
    }
    manifest.instances.push_back(std::move(record));
  }

  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

}  // namespace anovox
