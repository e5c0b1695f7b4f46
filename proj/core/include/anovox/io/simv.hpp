#pragma once

#include <filesystem>

#include "anovox/voxel.hpp"

namespace anovox {

/// SIMV binary volume container (bit-exact layout):
///   magic "SIMV", u32 version = 1, u8 payload kind (0 = f32 score,
///   1 = u16 label), 3 x f64 origin, f64 voxel_size, 3 x u32 dims,
///   occupancy bitmask of ceil(X*Y*Z / 8) bytes in x-fastest order, then the
///   payload array, little-endian, x-fastest.
/// For score volumes the bitmask is the touched mask; for label volumes it
/// is the occupancy.
enum class SimvKind : std::uint8_t { Score = 0, Label = 1 };

SimvKind peek_simv_kind(const std::filesystem::path& path);

void write_simv(const std::filesystem::path& path, const AnomalyVolume& volume);
void write_simv(const std::filesystem::path& path, const GroundTruthVolume& volume);

AnomalyVolume read_simv_scores(const std::filesystem::path& path);
GroundTruthVolume read_simv_labels(const std::filesystem::path& path);

}  // namespace anovox
