#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

#include "anovox/geometry.hpp"

namespace anovox {

/// Pose schema: {"rotation": [9 numbers, row-major], "translation": [3, mm]}.
/// The convention is p_ref = R p + T.
nlohmann::json pose_to_json(const RigidTransform& pose);
RigidTransform pose_from_json(const nlohmann::json& j);

/// Intrinsics schema: {fx, fy, cx, cy, width, height, dist: [k1,k2,k3,p1,p2]}.
nlohmann::json intrinsics_to_json(const CameraIntrinsics& intr);
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace anovox
