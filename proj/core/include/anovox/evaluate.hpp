#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anovox/manifest.hpp"
#include "anovox/metrics.hpp"

namespace anovox {

struct EvaluateOptions {
  std::filesystem::path maps_dir;    // <maps_dir>/<instance_id>/map_###.pfm
  std::filesystem::path output_dir;  // report.json, curve CSVs, fused volumes
  std::string setup = "real2real";   // tag recorded in the report
  double bound = 0.01;
  int n_samples = 200;
  FprDomain fpr_domain = FprDomain::GtOccupied;
  bool write_volumes = true;
  int threads = 0;
};

struct InstanceEvaluation {
  std::string id;
  InstanceCondition condition = InstanceCondition::Nominal;
  double global_score = 0.0;
  bool empty_volume = false;
  std::uint64_t valid_pixels = 0;
  std::uint64_t dropped_out_of_bounds = 0;
  std::optional<double> v_aupro;  // anomalous instances only
  ProCurve curve;                 // empty for nominal instances
};

struct EvaluationRun {
  std::string setup;
  double i_auroc = 0.0;
  double mean_v_aupro = 0.0;
  double bound = 0.01;
  int n_samples = 200;
  std::vector<InstanceEvaluation> per_instance;  // sorted by instance id
};

/// Runs the full evaluation over the manifest's test set: per-instance
/// fusion of the 2D anomaly maps into Anomaly Volumes, global scores and
/// I-AUROC, per-anomalous-instance PRO curves and mean V-AUPRO. Report files
/// (report.json, per-instance curve CSVs, fused SIMV volumes) land in
/// output_dir; given identical inputs the bytes are identical. Missing maps
/// or ground-truth volumes are listed exhaustively before aborting. Dataset
/// files are never mutated.
EvaluationRun evaluate(const DatasetManifest& manifest, const EvaluateOptions& options);

/// Runs the reference diff detector against the train instance of the given
/// setup and writes one PFM anomaly map per test view into maps_dir.
void run_diff_detector(const DatasetManifest& manifest, InstanceSetup train_setup,
                       const std::filesystem::path& maps_dir, int threads = 0);

/// Anomaly-map filename for a view, shared by the detector and evaluate.
std::string anomaly_map_name(int view_index);

}  // namespace anovox
