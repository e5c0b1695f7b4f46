#include "anovox/io/pfm.hpp"

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace anovox {

namespace {

void write_pfm_raw(const std::filesystem::path& path, int width, int height,
                   const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("pfm: cannot open " + path.string() + " for writing");
  out << "Pf\n" << width << " " << height << "\n-1\n";
  // Rows are stored bottom-to-top.
  std::vector<float> row(width);
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x) {
      row[x] = static_cast<float>(values[static_cast<std::size_t>(y) * width + x]);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(float) * row.size()));
  }
  if (!out) throw IoError("pfm: write failed for " + path.string());
}

void read_pfm_raw(const std::filesystem::path& path, int& width, int& height,
                  std::vector<double>& values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pfm: cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw IoError("pfm: " + path.string() + " is not grayscale PFM");
  double scale = 0.0;
  in >> width >> height >> scale;
  if (!in || width < 1 || height < 1) throw IoError("pfm: bad header in " + path.string());
  in.get();  // single whitespace after the scale
  if (scale >= 0.0) throw IoError("pfm: big-endian files are not supported");

  values.assign(static_cast<std::size_t>(width) * height, 0.0);
  std::vector<float> row(width);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(float) * row.size()));
    if (!in) throw IoError("pfm: truncated payload in " + path.string());
    for (int x = 0; x < width; ++x) {
      values[static_cast<std::size_t>(y) * width + x] = static_cast<double>(row[x]);
    }
  }
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  write_pfm_raw(path, depth.width, depth.height, depth.values);
}

void write_pfm(const std::filesystem::path& path, const AnomalyMap2D& map) {
  write_pfm_raw(path, map.width, map.height, map.scores);
}

void write_pfm_image(const std::filesystem::path& path, const Image& image) {
  write_pfm_raw(path, image.width, image.height, image.pixels);
}

DepthMap read_pfm_depth(const std::filesystem::path& path) {
  DepthMap depth;
  read_pfm_raw(path, depth.width, depth.height, depth.values);
  for (double v : depth.values) {
    if (v < 0.0) throw IoError("pfm: negative depth in " + path.string());
  }
  return depth;
}

AnomalyMap2D read_pfm_map(const std::filesystem::path& path) {
  AnomalyMap2D map;
  read_pfm_raw(path, map.width, map.height, map.scores);
  return map;
}

}  // namespace anovox
