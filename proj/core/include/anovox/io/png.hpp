#pragma once

#include <filesystem>

#include "anovox/annotate.hpp"
#include "anovox/mesh.hpp"

namespace anovox {

/// 8-bit grayscale PNG for view images (values quantised from [0, 1]).
void write_png_gray8(const std::filesystem::path& path, const Image& image);

/// Reads 8- or 16-bit grayscale PNG into [0, 1].
Image read_png_gray(const std::filesystem::path& path);

/// 16-bit grayscale PNG carrying raw defect IDs.
void write_png_label16(const std::filesystem::path& path, const AnnotationImage& annotation);
AnnotationImage read_png_label16(const std::filesystem::path& path);

}  // namespace anovox
