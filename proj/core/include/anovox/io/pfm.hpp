#pragma once

#include <filesystem>

#include "anovox/fusion.hpp"
#include "anovox/mesh.hpp"

namespace anovox {

/// Grayscale PFM ("Pf"), little-endian, rows stored bottom-to-top. Depth
/// values are millimetres with 0 marking invalid pixels; payloads are f32 on
/// disk regardless of the in-memory precision.
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
void write_pfm(const std::filesystem::path& path, const AnomalyMap2D& map);
void write_pfm_image(const std::filesystem::path& path, const Image& image);

DepthMap read_pfm_depth(const std::filesystem::path& path);
AnomalyMap2D read_pfm_map(const std::filesystem::path& path);

}  // namespace anovox
