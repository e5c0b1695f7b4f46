#pragma once

#include <filesystem>
#include <vector>

#include "anovox/calibration.hpp"

namespace anovox {

/// Dot-pattern correspondence CSV: one row per dot observation,
///   view_id,u,v,Xp,Yp,Zp,Xs,Ys,Zs
/// with (u, v) the pixel, (Xp, Yp, Zp) the pattern-frame centre and
/// (Xs, Ys, Zs) the same centre in the SRF, all mm. Rows group into views by
/// view_id in order of first appearance. A header row is accepted and
/// written.
std::vector<CalibrationView> read_correspondences_csv(const std::filesystem::path& path);

void write_correspondences_csv(const std::filesystem::path& path,
                               std::span<const CalibrationView> views);

}  // namespace anovox
