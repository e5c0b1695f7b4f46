#include "anovox/io/pose_json.hpp"

#include <fstream>

namespace anovox {

using nlohmann::json;

json pose_to_json(const RigidTransform& pose) {
  json j;
  auto& rot = j["rotation"] = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation()(r, c));
  }
  auto& t = j["translation"] = json::array();
  for (int a = 0; a < 3; ++a) t.push_back(pose.translation()[a]);
  return j;
}

RigidTransform pose_from_json(const json& j) {
  if (!j.contains("rotation") || !j.contains("translation") || !j["rotation"].is_array() ||
      !j["translation"].is_array() || j["rotation"].size() != 9 ||
      j["translation"].size() != 3) {
    throw ValidationError("pose json: expected rotation[9] and translation[3]");
  }
  Mat3 r;
  for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = j["rotation"][k].get<double>();
  Vec3 t;
  for (int a = 0; a < 3; ++a) t[a] = j["translation"][a].get<double>();
  return RigidTransform(r, t);
}

json intrinsics_to_json(const CameraIntrinsics& intr) {
  json j;
  j["fx"] = intr.fx;
  j["fy"] = intr.fy;
  j["cx"] = intr.cx;
  j["cy"] = intr.cy;
  j["width"] = intr.width;
  j["height"] = intr.height;
  j["dist"] = intr.distortion;
  return j;
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  for (const char* key : {"fx", "fy", "cx", "cy", "width", "height", "dist"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("intrinsics json: missing field ") + key);
    }
  }
  if (!j["dist"].is_array() || j["dist"].size() != 5) {
    throw ValidationError("intrinsics json: dist must hold 5 coefficients");
  }
  std::array<double, 5> dist;
  for (int k = 0; k < 5; ++k) dist[k] = j["dist"][k].get<double>();
  return CameraIntrinsics(j["fx"].get<double>(), j["fy"].get<double>(), j["cx"].get<double>(),
                          j["cy"].get<double>(), j["width"].get<int>(), j["height"].get<int>(),
                          dist);
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("json: cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("json: write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("json: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw IoError("json: parse error in " + path.string() + ": " + err.what());
  }
  return j;
}

}  // namespace anovox
