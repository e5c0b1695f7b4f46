#include "anovox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace anovox {

double i_auroc(std::span<const InstanceScore> scores) {
  std::size_t anomalous = 0;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw ValidationError("i_auroc: non-finite score");
    anomalous += s.anomalous ? 1 : 0;
  }
  const std::size_t nominal = scores.size() - anomalous;
  if (anomalous == 0 || nominal == 0) {
    throw ValidationError("i_auroc: needs at least one nominal and one anomalous instance");
  }

  std::vector<std::pair<double, bool>> sorted;
  sorted.reserve(scores.size());
  for (const auto& s : scores) sorted.emplace_back(s.score, s.anomalous);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Midrank sum over the anomalous class; ties get half credit exactly.
  double anomalous_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (sorted[k].second) anomalous_rank_sum += midrank;
    }
    i = j;
  }
  const double na = static_cast<double>(anomalous);
  const double nn = static_cast<double>(nominal);
  return (anomalous_rank_sum - na * (na + 1.0) / 2.0) / (na * nn);
}

BinaryVolume binarize(const AnomalyVolume& volume, double threshold) {
  BinaryVolume out;
  out.spec = volume.spec;
  out.positive = VoxelMask(volume.scores.size());
  out.touched = volume.touched;
  for (std::size_t i = 0; i < volume.scores.size(); ++i) {
    if (volume.touched.get(i) && volume.scores[i] >= threshold) out.positive.set(i);
  }
  return out;
}

namespace {

void check_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) throw ValidationError(std::string(where) + ": grid specs do not match");
}

}  // namespace

double pro_at(const BinaryVolume& binary, const GroundTruthVolume& gt) {
  check_same_grid(binary.spec, gt.spec, "pro_at");
  if (gt.blob_count == 0) throw ValidationError("pro_at: ground truth has no blobs");

  std::vector<std::uint64_t> blob_size(gt.blob_count, 0);
  std::vector<std::uint64_t> blob_hit(gt.blob_count, 0);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const std::uint16_t l = gt.labels[i];
    if (l == 0) continue;
    ++blob_size[l - 1];
    if (binary.positive.get(i)) ++blob_hit[l - 1];
  }
  double sum = 0.0;
  for (std::uint16_t n = 0; n < gt.blob_count; ++n) {
    if (blob_size[n] == 0) throw ValidationError("pro_at: empty blob in ground truth");
    sum += static_cast<double>(blob_hit[n]) / static_cast<double>(blob_size[n]);
  }
  return sum / static_cast<double>(gt.blob_count);
}

double fpr_at(const BinaryVolume& binary, const GroundTruthVolume& gt, FprDomain domain) {
  check_same_grid(binary.spec, gt.spec, "fpr_at");
  std::uint64_t nominal_occupied = 0;
  std::uint64_t false_positive = 0;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const bool in_domain = domain == FprDomain::GtOccupied ? gt.occupancy.get(i)
                                                           : binary.touched.get(i);
    if (!in_domain || gt.labels[i] != 0) continue;
    ++nominal_occupied;
    if (binary.positive.get(i)) ++false_positive;
  }
  if (nominal_occupied == 0) {
    throw ValidationError("fpr_at: no nominal voxels in the FPR domain");
  }
  return static_cast<double>(false_positive) / static_cast<double>(nominal_occupied);
}

std::uint64_t count_positives_outside_occupancy(const BinaryVolume& binary,
                                                const GroundTruthVolume& gt) {
  check_same_grid(binary.spec, gt.spec, "positives_outside_occupancy");
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (binary.positive.get(i) && !gt.occupancy.get(i)) ++n;
  }
  return n;
}

void ProCurve::validate() const {
  if (points.empty()) throw ValidationError("pro curve: empty");
  if (points.front().first != 0.0) throw ValidationError("pro curve: must start at fpr = 0");
  double prev = 0.0;
  for (const auto& [fpr, pro] : points) {
    if (fpr < prev || fpr > 1.0 || pro < 0.0 || pro > 1.0) {
      throw ValidationError("pro curve: samples out of range or not sorted");
    }
    prev = fpr;
  }
}

ProCurve pro_curve(const AnomalyVolume& volume, const GroundTruthVolume& gt, int n_samples,
                   FprDomain domain) {
  check_same_grid(volume.spec, gt.spec, "pro_curve");
  if (n_samples < 2) throw ValidationError("pro_curve: n_samples must be >= 2");
  if (gt.blob_count == 0) throw ValidationError("pro_curve: ground truth has no blobs");

  // Scores of the touched nominal domain voxels: these are the only voxels
  // that can ever count as false positives.
  std::vector<double> nominal_scores;
  std::uint64_t nominal_occupied = 0;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const bool in_domain = domain == FprDomain::GtOccupied ? gt.occupancy.get(i)
                                                           : volume.touched.get(i);
    if (!in_domain || gt.labels[i] != 0) continue;
    ++nominal_occupied;
    if (volume.touched.get(i)) nominal_scores.push_back(volume.scores[i]);
  }
  if (nominal_occupied == 0) {
    throw ValidationError("pro_curve: no nominal voxels in the FPR domain");
  }

  // Distinct score levels, descending, with cumulative false-positive counts.
  std::sort(nominal_scores.begin(), nominal_scores.end(), std::greater<double>());
  std::vector<double> level_value;   // level l >= 1 admits count level_count[l]
  std::vector<std::uint64_t> level_count;
  for (std::size_t i = 0; i < nominal_scores.size();) {
    std::size_t j = i;
    while (j < nominal_scores.size() && nominal_scores[j] == nominal_scores[i]) ++j;
    level_value.push_back(nominal_scores[i]);
    level_count.push_back(j);
    i = j;
  }
  const std::size_t m = level_value.size();
  const std::uint64_t max_count = m == 0 ? 0 : level_count.back();

  // Threshold realizing level l: just above the next level's score value, so
  // the binarisation admits as much of the prediction as the FPR target
  // allows ("smallest t whose FPR <= target").
  auto level_threshold = [&](std::size_t level) {
    if (level == m) return -std::numeric_limits<double>::infinity();
    return std::nextafter(level_value[level], std::numeric_limits<double>::infinity());
  };

  std::vector<double> level_pro(m + 1, -1.0);  // lazily filled
  auto pro_for_level = [&](std::size_t level) {
    if (level_pro[level] < 0.0) {
      level_pro[level] = pro_at(binarize(volume, level_threshold(level)), gt);
    }
    return level_pro[level];
  };

  ProCurve curve;
  curve.points.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    // Uniform FPR targets in [0, fpr_max]; the admissible false-positive
    // count is computed in integers to keep level selection exact.
    const std::uint64_t allowed =
        max_count == 0
            ? 0
            : (max_count * static_cast<std::uint64_t>(s)) / static_cast<std::uint64_t>(n_samples - 1);
    std::size_t level = 0;
    while (level < m && level_count[level] <= allowed) ++level;
    // `level` now counts how many score levels fit within the target.
    const std::uint64_t achieved = level == 0 ? 0 : level_count[level - 1];
    const double fpr = static_cast<double>(achieved) / static_cast<double>(nominal_occupied);
    curve.points.emplace_back(fpr, pro_for_level(level));
  }
  curve.validate();
  return curve;
}

double v_aupro(const ProCurve& curve, double bound) {
  if (!(bound > 0.0 && bound <= 1.0)) throw ValidationError("v_aupro: bound must be in (0, 1]");
  curve.validate();

  double area = 0.0;
  double last_fpr = curve.points.front().first;
  double last_pro = curve.points.front().second;
  bool reached_bound = false;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto [fpr, pro] = curve.points[i];
    if (fpr >= bound) {
      // Interpolate the final sliver up to the bound.
      const double width = bound - last_fpr;
      if (width > 0.0) {
        const double pro_at_bound =
            fpr == last_fpr ? pro : last_pro + (pro - last_pro) * width / (fpr - last_fpr);
        area += width * 0.5 * (last_pro + pro_at_bound);
      }
      reached_bound = true;
      break;
    }
    area += (fpr - last_fpr) * 0.5 * (last_pro + pro);
    last_fpr = fpr;
    last_pro = pro;
  }
  if (!reached_bound) {
    // Curve ends before the bound: carry the final PRO flat.
    area += (bound - last_fpr) * last_pro;
  }
  return area / bound;
}

}  // namespace anovox
