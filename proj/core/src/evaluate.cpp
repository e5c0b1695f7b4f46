#include "anovox/evaluate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "anovox/fusion.hpp"
#include "anovox/io/pfm.hpp"
#include "anovox/io/png.hpp"
#include "anovox/io/pose_json.hpp"
#include "anovox/io/simv.hpp"
#include "anovox/parallel.hpp"
#include "anovox/synth.hpp"

namespace anovox {

using nlohmann::json;

std::string anomaly_map_name(int view_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "map_%03d.pfm", view_index);
  return buf;
}

namespace {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

FrameChain chain_for_instance(const DatasetManifest& manifest, const InstanceRecord& instance) {
  std::vector<RigidTransform> poses;
  poses.reserve(instance.views.size());
  for (const auto& view : instance.views) poses.push_back(view.pose);
  return FrameChain(manifest.sensor_to_camera, std::move(poses));
}

InstanceEvaluation evaluate_instance(const DatasetManifest& manifest,
                                     const InstanceRecord& instance,
                                     const EvaluateOptions& options, AnomalyVolume& volume_out) {
  const FrameChain chain = chain_for_instance(manifest, instance);

  std::vector<ViewProjection> projections(instance.views.size());
  parallel_for_chunks(
      0, instance.views.size(), resolve_threads(options.threads),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t v = lo; v < hi; ++v) {
          const DepthMap depth = read_pfm_depth(manifest.resolve(instance.views[v].depth_path));
          const AnomalyMap2D map = read_pfm_map(
              options.maps_dir / instance.id / anomaly_map_name(static_cast<int>(v)));
          projections[v] = project_view(map, depth, manifest.intrinsics, v, chain, instance.grid);
        }
      });

  AnomalyVolume volume = fuse_views(projections, instance.grid, options.threads);

  InstanceEvaluation eval;
  eval.id = instance.id;
  eval.condition = instance.condition;
  const GlobalScore score = global_score(volume);
  eval.global_score = score.value;
  eval.empty_volume = score.empty;
  for (const auto& projection : projections) {
    eval.valid_pixels += projection.valid_pixels;
    eval.dropped_out_of_bounds += projection.out_of_bounds_pixels;
  }

  if (instance.condition == InstanceCondition::Anomalous) {
    const GroundTruthVolume gt = read_simv_labels(manifest.resolve(instance.gt_volume_path));
    eval.curve = pro_curve(volume, gt, options.n_samples, options.fpr_domain);
    eval.v_aupro = v_aupro(eval.curve, options.bound);
  }
  volume_out = std::move(volume);
  return eval;
}

void write_curve_csv(const std::filesystem::path& path, const ProCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("csv: cannot open " + path.string() + " for writing");
  out << "fpr,pro\n";
  for (const auto& [fpr, pro] : curve.points) {
    out << format_double(fpr) << "," << format_double(pro) << "\n";
  }
  if (!out) throw IoError("csv: write failed for " + path.string());
}

}  // namespace

EvaluationRun evaluate(const DatasetManifest& manifest, const EvaluateOptions& options) {
  const std::vector<const InstanceRecord*> tests = manifest.test_instances();
  if (tests.empty()) throw ValidationError("evaluate: manifest has no test instances");

  // Exhaustive pre-scan of required inputs before any work starts.
  std::string missing;
  for (const InstanceRecord* instance : tests) {
    for (std::size_t v = 0; v < instance->views.size(); ++v) {
      const auto map_path =
          options.maps_dir / instance->id / anomaly_map_name(static_cast<int>(v));
      if (!std::filesystem::exists(map_path)) missing += "\n  " + map_path.string();
    }
    if (instance->condition == InstanceCondition::Anomalous) {
      if (instance->gt_volume_path.empty()) {
        missing += "\n  <no gt_volume declared for " + instance->id + ">";
      } else if (!std::filesystem::exists(manifest.resolve(instance->gt_volume_path))) {
        missing += "\n  " + manifest.resolve(instance->gt_volume_path).string();
      }
    }
  }
  if (!missing.empty()) {
    throw IoError("evaluate: missing anomaly maps or ground truth:" + missing);
  }

  std::filesystem::create_directories(options.output_dir);

  EvaluationRun run;
  run.setup = options.setup;
  run.bound = options.bound;
  run.n_samples = options.n_samples;

  std::vector<InstanceScore> scores;
  double aupro_sum = 0.0;
  std::size_t aupro_count = 0;
  for (const InstanceRecord* instance : tests) {
    AnomalyVolume volume;
    InstanceEvaluation eval = evaluate_instance(manifest, *instance, options, volume);
    scores.push_back(
        {eval.id, eval.global_score, eval.condition == InstanceCondition::Anomalous});
    if (eval.v_aupro) {
      aupro_sum += *eval.v_aupro;
      ++aupro_count;
      write_curve_csv(options.output_dir / (eval.id + "_curve.csv"), eval.curve);
    }
    if (options.write_volumes) {
      write_simv(options.output_dir / (eval.id + "_volume.simv"), volume);
    }
    run.per_instance.push_back(std::move(eval));
  }

  run.i_auroc = i_auroc(scores);
  run.mean_v_aupro = aupro_count > 0 ? aupro_sum / static_cast<double>(aupro_count) : 0.0;

  // Report JSON; keys are sorted and doubles round-trip, so identical inputs
  // give identical bytes.
  json per_instance = json::array();
  for (const auto& eval : run.per_instance) {
    json ij{{"id", eval.id},
            {"condition", to_string(eval.condition)},
            {"global_score", eval.global_score},
            {"empty_volume", eval.empty_volume},
            {"valid_pixels", eval.valid_pixels},
            {"dropped_out_of_bounds", eval.dropped_out_of_bounds}};
    if (eval.v_aupro) {
      ij["v_aupro"] = *eval.v_aupro;
      json curve = json::array();
      for (const auto& [fpr, pro] : eval.curve.points) curve.push_back({fpr, pro});
      ij["curve"] = std::move(curve);
    }
    per_instance.push_back(std::move(ij));
  }
  const json report{{"setup", run.setup},
                    {"object", manifest.object_name},
                    {"i_auroc", run.i_auroc},
                    {"v_aupro", run.mean_v_aupro},
                    {"bound", run.bound},
                    {"n_samples", run.n_samples},
                    {"fpr_domain", options.fpr_domain == FprDomain::GtOccupied
                                       ? "gt_occupied"
                                       : "prediction_touched"},
                    {"per_instance", per_instance}};
  write_json_file(options.output_dir / "report.json", report);
  return run;
}

void run_diff_detector(const DatasetManifest& manifest, InstanceSetup train_setup,
                       const std::filesystem::path& maps_dir, int threads) {
  const InstanceRecord& train = manifest.train_instance(train_setup);

  std::vector<Image> nominal_views;
  nominal_views.reserve(train.views.size());
  for (const auto& view : train.views) {
    nominal_views.push_back(read_png_gray(manifest.resolve(view.image_path)));
  }

  const auto tests = manifest.test_instances();
  parallel_for_chunks(0, tests.size(), resolve_threads(threads), [&](std::size_t lo,
                                                                     std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const InstanceRecord& instance = *tests[t];
      if (instance.views.size() != train.views.size()) {
        throw ValidationError("diff detector: instance '" + instance.id + "' has " +
                              std::to_string(instance.views.size()) + " views, train has " +
                              std::to_string(train.views.size()));
      }
      std::vector<Image> test_views;
      test_views.reserve(instance.views.size());
      for (const auto& view : instance.views) {
        test_views.push_back(read_png_gray(manifest.resolve(view.image_path)));
      }
      const std::vector<AnomalyMap2D> maps = reference_diff_detector(test_views, nominal_views);
      std::filesystem::create_directories(maps_dir / instance.id);
      for (std::size_t v = 0; v < maps.size(); ++v) {
        write_pfm(maps_dir / instance.id / anomaly_map_name(static_cast<int>(v)), maps[v]);
      }
    }
  });
}

}  // namespace anovox
