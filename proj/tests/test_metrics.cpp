#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "anovox/metrics.hpp"
#include "anovox/rng.hpp"
#include "oracles.hpp"

using namespace anovox;

namespace {

GridSpec cube_grid(std::uint32_t n) {
  GridSpec spec;
  spec.voxel_size = 2.0;
  spec.dims = {n, n, n};
  return spec;
}

/// Random GT + prediction pair on a small grid: a surface-ish occupied set
/// with 1..max_blobs compact blobs, scores on a touched subset.
struct RandomCase {
  GroundTruthVolume gt;
  AnomalyVolume vol;
};

RandomCase random_case(Rng& rng, std::uint32_t n, int max_blobs, int score_levels = 0) {
  RandomCase rc;
  rc.gt.spec = cube_grid(n);
  const std::size_t voxels = rc.gt.spec.voxel_count();
  rc.gt.occupancy = VoxelMask(voxels);
  rc.gt.labels.assign(voxels, 0);

  // Occupied shell: a noisy spherical surface.
  const double radius = 0.35 * n;
  const Vec3 centre = Vec3::Constant(n / 2.0);
  for (std::uint32_t k = 0; k < n; ++k) {
    for (std::uint32_t j = 0; j < n; ++j) {
      for (std::uint32_t i = 0; i < n; ++i) {
        const double r = (Vec3(i, j, k) - centre).norm();
        if (std::abs(r - radius) < 1.2) rc.gt.occupancy.set(rc.gt.spec.linear_index(i, j, k));
      }
    }
  }

  // Blobs: compact balls on the shell.
  const int blobs = 1 + static_cast<int>(rng.index(max_blobs));
  int created = 0;
  for (int b = 0; b < blobs; ++b) {
    const double theta = rng.uniform(0, 2 * M_PI);
    const double phi = rng.uniform(0.3, M_PI - 0.3);
    const Vec3 seed = centre + radius * Vec3(std::sin(phi) * std::cos(theta),
                                             std::sin(phi) * std::sin(theta), std::cos(phi));
    const double blob_r = rng.uniform(1.2, 2.4);
    bool placed = false;
    for (std::uint32_t k = 0; k < n; ++k) {
      for (std::uint32_t j = 0; j < n; ++j) {
        for (std::uint32_t i = 0; i < n; ++i) {
          const std::size_t lin = rc.gt.spec.linear_index(i, j, k);
          if (!rc.gt.occupancy.get(lin) || rc.gt.labels[lin] != 0) continue;
          if ((Vec3(i, j, k) - seed).norm() <= blob_r) {
            rc.gt.labels[lin] = static_cast<std::uint16_t>(created + 1);
            placed = true;
          }
        }
      }
    }
    if (placed) ++created;
  }
  if (created == 0) {
    // Guarantee at least one blob.
    for (std::size_t lin = 0; lin < voxels; ++lin) {
      if (rc.gt.occupancy.get(lin)) {
        rc.gt.labels[lin] = 1;
        created = 1;
        break;
      }
    }
  }
  rc.gt.blob_count = static_cast<std::uint16_t>(created);

  // Prediction: touch most anomalous voxels with high-ish scores and a
  // bounded number of nominal voxels with low-ish scores (so the uniform
  // 200-target sweep hits every achievable level on these grids).
  rc.vol = AnomalyVolume::zeros(rc.gt.spec);
  std::size_t nominal_touched = 0;
  for (std::size_t lin = 0; lin < voxels; ++lin) {
    if (rc.gt.labels[lin] != 0) {
      if (rng.uniform() < 0.9) {
        rc.vol.touched.set(lin);
        rc.vol.scores[lin] = rng.uniform(0.3, 1.0);
      }
    } else if (rc.gt.occupancy.get(lin)) {
      if (nominal_touched < 190 && rng.uniform() < 0.35) {
        rc.vol.touched.set(lin);
        rc.vol.scores[lin] = rng.uniform(0.0, 0.8);
        ++nominal_touched;
      }
    }
  }
  if (score_levels > 0) {
    // Quantise to force ties.
    for (std::size_t lin = 0; lin < voxels; ++lin) {
      if (rc.vol.touched.get(lin)) {
        rc.vol.scores[lin] =
            std::round(rc.vol.scores[lin] * score_levels) / static_cast<double>(score_levels);
      }
    }
  }
  return rc;
}

std::vector<InstanceScore> random_scores(Rng& rng, int count, bool with_ties) {
  std::vector<InstanceScore> scores;
  for (int i = 0; i < count; ++i) {
    double s = rng.uniform();
    if (with_ties && rng.uniform() < 0.4) s = std::round(s * 8.0) / 8.0;
    scores.push_back({"i" + std::to_string(i), s, rng.uniform() < 0.5});
  }
  // Ensure both classes are present.
  scores[0].anomalous = false;
  scores[count - 1].anomalous = true;
  return scores;
}

}  // namespace

TEST_CASE("i_auroc basics") {
  std::vector<InstanceScore> separable{
      {"n0", 0.1, false}, {"n1", 0.2, false}, {"a0", 0.8, true}, {"a1", 0.9, true}};
  CHECK(i_auroc(separable) == 1.0);

  std::vector<InstanceScore> ties{
      {"n0", 0.5, false}, {"n1", 0.5, false}, {"a0", 0.5, true}, {"a1", 0.5, true}};
  CHECK(i_auroc(ties) == 0.5);

  std::vector<InstanceScore> single{{"n0", 0.5, false}};
  CHECK_THROWS_AS(i_auroc(single), ValidationError);
  std::vector<InstanceScore> one_class{{"n0", 0.5, false}, {"n1", 0.7, false}};
  CHECK_THROWS_AS(i_auroc(one_class), ValidationError);
}

TEST_CASE("i_auroc equals brute-force pair counting") {
  Rng rng(401);
  for (int trial = 0; trial < 10; ++trial) {
    const auto scores = random_scores(rng, 200, trial % 2 == 0);
    const double fast = i_auroc(scores);
    const double slow = oracles::auroc_pair_counting(scores);
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
}

TEST_CASE("binarize thresholds touched voxels") {
  Rng rng(409);
  const RandomCase rc = random_case(rng, 10, 2);

  const GlobalScore top = global_score(rc.vol);
  const BinaryVolume none = binarize(rc.vol, std::nextafter(top.value, 1e300));
  CHECK(none.positive.popcount() == 0);

  const BinaryVolume all = binarize(rc.vol, -1e300);
  CHECK(all.positive.popcount() == rc.vol.touched.popcount());

  const double t = 0.4;
  const BinaryVolume mid = binarize(rc.vol, t);
  for (std::size_t i = 0; i < rc.vol.scores.size(); ++i) {
    const bool expect = rc.vol.touched.get(i) && rc.vol.scores[i] >= t;
    CHECK(mid.positive.get(i) == expect);
  }
}

TEST_CASE("pro_at counts per-blob coverage") {
  Rng rng(419);
  const RandomCase rc = random_case(rng, 15, 3);

  const BinaryVolume full = binarize(rc.vol, -1e300);
  BinaryVolume everything = full;
  // Force every anomalous voxel positive for the trivial upper bound.
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (rc.gt.labels[i] != 0) everything.positive.set(i);
  }
  CHECK(pro_at(everything, rc.gt) == 1.0);

  BinaryVolume nothing;
  nothing.spec = rc.gt.spec;
  nothing.positive = VoxelMask(rc.gt.spec.voxel_count());
  nothing.touched = nothing.positive;
  CHECK(pro_at(nothing, rc.gt) == 0.0);

  // Counting oracle.
  const BinaryVolume mid = binarize(rc.vol, 0.5);
  std::vector<double> size(rc.gt.blob_count, 0), hit(rc.gt.blob_count, 0);
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (rc.gt.labels[i] == 0) continue;
    size[rc.gt.labels[i] - 1] += 1;
    if (mid.positive.get(i)) hit[rc.gt.labels[i] - 1] += 1;
  }
  double expected = 0.0;
  for (std::size_t b = 0; b < size.size(); ++b) expected += hit[b] / size[b];
  expected /= size.size();
  CHECK(pro_at(mid, rc.gt) == expected);
}

TEST_CASE("fpr_at counts only occupied nominal voxels") {
  Rng rng(421);
  const RandomCase rc = random_case(rng, 12, 2);

  BinaryVolume nothing;
  nothing.spec = rc.gt.spec;
  nothing.positive = VoxelMask(rc.gt.spec.voxel_count());
  nothing.touched = rc.vol.touched;
  CHECK(fpr_at(nothing, rc.gt) == 0.0);

  // All occupied nominal voxels positive -> FPR 1.
  BinaryVolume saturated = nothing;
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (rc.gt.occupancy.get(i) && rc.gt.labels[i] == 0) saturated.positive.set(i);
  }
  CHECK(fpr_at(saturated, rc.gt) == 1.0);

  // Counting oracle on a real threshold.
  const BinaryVolume mid = binarize(rc.vol, 0.3);
  std::size_t fp = 0, nominal = 0;
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (!rc.gt.occupancy.get(i) || rc.gt.labels[i] != 0) continue;
    ++nominal;
    if (mid.positive.get(i)) ++fp;
  }
  CHECK(fpr_at(mid, rc.gt) == static_cast<double>(fp) / nominal);

  // Positives off the object are diagnostics, not FPR.
  BinaryVolume off = nothing;
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (!rc.gt.occupancy.get(i)) {
      off.positive.set(i);
      break;
    }
  }
  CHECK(fpr_at(off, rc.gt) == 0.0);
  CHECK(count_positives_outside_occupancy(off, rc.gt) == 1);
}

TEST_CASE("pro and fpr are non-increasing in the threshold") {
  Rng rng(431);
  const RandomCase rc = random_case(rng, 12, 3);
  double prev_pro = 2.0, prev_fpr = 2.0;
  for (double t : {-1.0, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0}) {
    const BinaryVolume b = binarize(rc.vol, t);
    const double pro = pro_at(b, rc.gt);
    const double fpr = fpr_at(b, rc.gt);
    CHECK(pro <= prev_pro);
    CHECK(fpr <= prev_fpr);
    prev_pro = pro;
    prev_fpr = fpr;
  }
}

TEST_CASE("perfect prediction produces the ideal curve") {
  Rng rng(433);
  RandomCase rc = random_case(rng, 12, 2);
  // Score 1 exactly on anomalous voxels, untouched elsewhere.
  rc.vol = AnomalyVolume::zeros(rc.gt.spec);
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (rc.gt.labels[i] != 0) {
      rc.vol.touched.set(i);
      rc.vol.scores[i] = 1.0;
    }
  }
  const ProCurve curve = pro_curve(rc.vol, rc.gt, 200);
  bool has_ideal = false;
  for (const auto& [fpr, pro] : curve.points) {
    if (fpr == 0.0 && pro == 1.0) has_ideal = true;
  }
  CHECK(has_ideal);
  CHECK(v_aupro(curve, 0.01) == 1.0);
  CHECK(v_aupro(curve, 0.3) == 1.0);
}

TEST_CASE("constant-score volumes degenerate to two effective points") {
  Rng rng(439);
  RandomCase rc = random_case(rng, 10, 2);
  AnomalyVolume flat = AnomalyVolume::zeros(rc.gt.spec);
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (rc.vol.touched.get(i)) {
      flat.touched.set(i);
      flat.scores[i] = 0.42;
    }
  }
  const ProCurve curve = pro_curve(flat, rc.gt, 200);
  CHECK(curve.points.front().first == 0.0);
  CHECK(curve.points.front().second == 0.0);
  const double fpr_max = curve.points.back().first;
  const double pro_max = curve.points.back().second;
  for (const auto& [fpr, pro] : curve.points) {
    const bool at_zero = fpr == 0.0 && pro == 0.0;
    const bool at_max = fpr == fpr_max && pro == pro_max;
    CHECK((at_zero || at_max));
  }
}

TEST_CASE("pro_curve matches the exhaustive sweep on small volumes") {
  Rng rng(443);
  for (int trial = 0; trial < 6; ++trial) {
    const RandomCase rc = random_case(rng, 14, 3, trial % 2 == 0 ? 25 : 0);
    const ProCurve curve = pro_curve(rc.vol, rc.gt, 200);
    const auto oracle = oracles::exhaustive_pro_curve(rc.vol, rc.gt);

    // Every sampled point must be an oracle point, and every oracle level
    // must be reached.
    std::size_t matched = 0;
    std::size_t cursor = 0;
    for (const auto& [fpr, pro] : curve.points) {
      while (cursor < oracle.size() &&
             (oracle[cursor].fpr != fpr || oracle[cursor].pro != pro)) {
        ++cursor;
      }
      REQUIRE(cursor < oracle.size());
      ++matched;
    }
    CHECK(matched == curve.points.size());
    CHECK(curve.points.back().first == oracle.back().fpr);

    for (double bound : {0.01, 0.05, 0.3}) {
      const double fast = v_aupro(curve, bound);
      const double slow = oracles::v_aupro_reference(oracle, bound);
      CHECK(std::abs(fast - slow) < 1e-9);
    }
  }
}

TEST_CASE("v_aupro validates input and stays in range") {
  ProCurve curve;
  CHECK_THROWS_AS(v_aupro(curve, 0.01), ValidationError);
  curve.points = {{0.0, 0.5}, {0.02, 0.8}};
  CHECK_THROWS_AS(v_aupro(curve, 0.0), ValidationError);
  CHECK_THROWS_AS(v_aupro(curve, 1.5), ValidationError);
  const double value = v_aupro(curve, 0.01);
  CHECK(value >= 0.0);
  CHECK(value <= 1.0);
  // Flat extension beyond the last sample.
  ProCurve ends_early;
  ends_early.points = {{0.0, 0.6}};
  CHECK(v_aupro(ends_early, 0.01) == 0.6);
}

TEST_CASE("metrics are invariant under strictly increasing transforms") {
  Rng rng(449);
  const auto transforms = std::vector<double (*)(double)>{
      [](double x) { return 2.0 * x + 0.1; },
      [](double x) { return std::tanh(x) + x; },
      [](double x) { return x * x * x + x; },
  };
  for (int trial = 0; trial < 4; ++trial) {
    const RandomCase rc = random_case(rng, 12, 3);
    auto scores = random_scores(rng, 120, true);
    const double base_auroc = i_auroc(scores);
    const double base_aupro = v_aupro(pro_curve(rc.vol, rc.gt, 200), 0.05);

    for (auto f : transforms) {
      auto transformed_scores = scores;
      for (auto& s : transformed_scores) s.score = f(s.score);
      CHECK(std::abs(i_auroc(transformed_scores) - base_auroc) < 1e-9);

      AnomalyVolume transformed = rc.vol;
      for (std::size_t i = 0; i < transformed.scores.size(); ++i) {
        if (transformed.touched.get(i)) transformed.scores[i] = f(transformed.scores[i]);
      }
      CHECK(std::abs(v_aupro(pro_curve(transformed, rc.gt, 200), 0.05) - base_aupro) < 1e-9);
    }
  }
}

TEST_CASE("prediction-touched FPR domain is available behind the flag") {
  Rng rng(457);
  const RandomCase rc = random_case(rng, 12, 2);
  const BinaryVolume b = binarize(rc.vol, 0.3);
  const double primary = fpr_at(b, rc.gt, FprDomain::GtOccupied);
  const double alt = fpr_at(b, rc.gt, FprDomain::PredictionTouched);
  CHECK(primary >= 0.0);
  CHECK(alt >= 0.0);
  // The alternative counts only touched nominal voxels in the denominator.
  std::size_t fp = 0, dom = 0;
  for (std::size_t i = 0; i < rc.gt.labels.size(); ++i) {
    if (!b.touched.get(i) || rc.gt.labels[i] != 0) continue;
    ++dom;
    if (b.positive.get(i)) ++fp;
  }
  CHECK(alt == static_cast<double>(fp) / dom);
  CHECK_NOTHROW(pro_curve(rc.vol, rc.gt, 50, FprDomain::PredictionTouched));
}
