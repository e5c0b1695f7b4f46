#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anovox/voxel.hpp"

namespace anovox {

struct InstanceScore {
  std::string id;
  double score = 0.0;
  bool anomalous = false;
};

/// Instance-level AUROC over global anomaly scores, i.e. the Mann-Whitney
/// statistic P(score_anom > score_nom) + 0.5 P(tie). Computed via midranks;
/// exact for any tie pattern. Requires at least one instance per class.
double i_auroc(std::span<const InstanceScore> scores);

/// Thresholded anomaly volume: a voxel is positive iff it was touched and
/// its score is >= t. The touched mask is carried along for diagnostics and
/// the alternative FPR domain.
struct BinaryVolume {
  GridSpec spec;
  VoxelMask positive;
  VoxelMask touched;
};

BinaryVolume binarize(const AnomalyVolume& volume, double threshold);

/// Per-region overlap: mean over ground-truth blobs of the fraction of each
/// blob covered by the positives. Requires >= 1 blob and matching grids.
double pro_at(const BinaryVolume& binary, const GroundTruthVolume& gt);

/// Which voxels count as "non-empty" for the FPR denominator. GtOccupied is
/// the primary definition (object-occupied nominal voxels of the ground
/// truth); PredictionTouched is the alternative reading, kept behind this
/// flag.
enum class FprDomain { GtOccupied, PredictionTouched };

/// False-positive rate over non-empty voxels: positives among occupied
/// nominal voxels divided by the occupied nominal count. Positives outside
/// the domain do not enter this ratio (see
/// count_positives_outside_occupancy for diagnostics).
double fpr_at(const BinaryVolume& binary, const GroundTruthVolume& gt,
              FprDomain domain = FprDomain::GtOccupied);

std::uint64_t count_positives_outside_occupancy(const BinaryVolume& binary,
                                                const GroundTruthVolume& gt);

/// PRO-vs-FPR curve samples; fpr is non-decreasing and starts at 0.
struct ProCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, pro)

  void validate() const;
};

/// Sweeps n_samples target FPRs uniformly from 0 to the maximum achievable
/// value. For each target, the threshold is the smallest t whose FPR stays
/// within the target (a quantile of the nominal-occupied voxel scores), and
/// the curve reports the achieved FPR. Thresholds are never interpolated
/// between achievable FPR levels.
ProCurve pro_curve(const AnomalyVolume& volume, const GroundTruthVolume& gt,
                   int n_samples = 200, FprDomain domain = FprDomain::GtOccupied);

/// Area under the PRO curve clipped to fpr in [0, bound], normalised by the
/// bound. When the maximum achieved FPR is below the bound the final PRO
/// value extends flat to the bound, so predictions that never false-positive
/// are not penalised.
double v_aupro(const ProCurve& curve, double bound = 0.01);

}  // namespace anovox
