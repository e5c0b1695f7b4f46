#include "anovox/io/simv.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <vector>

namespace anovox {

namespace {

constexpr char kMagic[4] = {'S', 'I', 'M', 'V'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void write_header(std::ofstream& out, SimvKind kind, const GridSpec& spec) {
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint8_t>(kind));
  for (int a = 0; a < 3; ++a) put(out, spec.origin[a]);
  put(out, spec.voxel_size);
  for (int a = 0; a < 3; ++a) put(out, spec.dims[a]);
}

void write_mask(std::ofstream& out, const VoxelMask& mask) {
  const std::size_t bytes = (mask.size() + 7) / 8;
  // The u64 word array is already the little-endian byte bitmask; trim to
  // ceil(N/8) bytes.
  out.write(reinterpret_cast<const char*>(mask.words().data()),
            static_cast<std::streamsize>(bytes));
}

GridSpec read_header(std::ifstream& in, const std::filesystem::path& path, SimvKind& kind) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("simv: bad magic in " + path.string());
  }
  const std::uint32_t version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw IoError("simv: unsupported version " + std::to_string(version) + " in " +
                  path.string());
  }
  const std::uint8_t raw_kind = get<std::uint8_t>(in);
  if (raw_kind > 1) throw IoError("simv: unknown payload kind in " + path.string());
  kind = static_cast<SimvKind>(raw_kind);

  GridSpec spec;
  for (int a = 0; a < 3; ++a) spec.origin[a] = get<double>(in);
  spec.voxel_size = get<double>(in);
  for (int a = 0; a < 3; ++a) spec.dims[a] = get<std::uint32_t>(in);
  if (!in) throw IoError("simv: truncated header in " + path.string());
  spec.validate();
  return spec;
}

VoxelMask read_mask(std::ifstream& in, const std::filesystem::path& path, std::size_t count) {
  VoxelMask mask(count);
  const std::size_t bytes = (count + 7) / 8;
  in.read(reinterpret_cast<char*>(mask.words().data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("simv: truncated bitmask in " + path.string());
  return mask;
}

}  // namespace

SimvKind peek_simv_kind(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("simv: cannot open " + path.string());
  SimvKind kind;
  read_header(in, path, kind);
  return kind;
}

void write_simv(const std::filesystem::path& path, const AnomalyVolume& volume) {
  volume.spec.validate();
  if (volume.scores.size() != volume.spec.voxel_count()) {
    throw ValidationError("simv: score array does not match grid dims");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("simv: cannot open " + path.string() + " for writing");
  write_header(out, SimvKind::Score, volume.spec);
  write_mask(out, volume.touched);
  std::vector<float> payload(volume.scores.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    payload[i] = static_cast<float>(volume.scores[i]);
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw IoError("simv: write failed for " + path.string());
}

void write_simv(const std::filesystem::path& path, const GroundTruthVolume& volume) {
  volume.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("simv: cannot open " + path.string() + " for writing");
  write_header(out, SimvKind::Label, volume.spec);
  write_mask(out, volume.occupancy);
  out.write(reinterpret_cast<const char*>(volume.labels.data()),
            static_cast<std::streamsize>(volume.labels.size() * sizeof(std::uint16_t)));
  if (!out) throw IoError("simv: write failed for " + path.string());
}

AnomalyVolume read_simv_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("simv: cannot open " + path.string());
  SimvKind kind;
  AnomalyVolume volume;
  volume.spec = read_header(in, path, kind);
  if (kind != SimvKind::Score) {
    throw IoError("simv: " + path.string() + " holds labels, expected scores");
  }
  const std::size_t count = volume.spec.voxel_count();
  volume.touched = read_mask(in, path, count);
  std::vector<float> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw IoError("simv: truncated payload in " + path.string());
  volume.scores.assign(payload.begin(), payload.end());
  return volume;
}

GroundTruthVolume read_simv_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("simv: cannot open " + path.string());
  SimvKind kind;
  GroundTruthVolume volume;
  volume.spec = read_header(in, path, kind);
  if (kind != SimvKind::Label) {
    throw IoError("simv: " + path.string() + " holds scores, expected labels");
  }
  const std::size_t count = volume.spec.voxel_count();
  volume.occupancy = read_mask(in, path, count);
  volume.labels.resize(count);
  in.read(reinterpret_cast<char*>(volume.labels.data()),
          static_cast<std::streamsize>(count * sizeof(std::uint16_t)));
  if (!in) throw IoError("simv: truncated payload in " + path.string());
  std::uint16_t max_label = 0;
  for (std::uint16_t l : volume.labels) max_label = std::max(max_label, l);
  volume.blob_count = max_label;
  if (max_label > 0) {
    std::vector<bool> present(max_label + 1, false);
    for (std::uint16_t l : volume.labels) present[l] = true;
    for (std::uint16_t id = 1; id <= max_label; ++id) {
      if (!present[id]) {
        throw IoError("simv: blob IDs in " + path.string() + " are not contiguous");
      }
    }
  }
  volume.validate();
  return volume;
}

}  // namespace anovox
