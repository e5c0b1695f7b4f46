#include "anovox/io/correspondences_csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace anovox {

namespace {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<CalibrationView> read_correspondences_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path.string());

  std::vector<CalibrationView> views;
  std::map<long, std::size_t> view_slot;  // view_id -> index, first appearance order

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (line_number == 1 && !fields.empty() && fields[0] == "view_id") continue;  // header
    if (fields.size() != 9) {
      throw IoError("csv: line " + std::to_string(line_number) + " of " + path.string() +
                    " has " + std::to_string(fields.size()) + " fields, expected 9");
    }
    long view_id;
    double value[8];
    try {
      view_id = std::stol(fields[0]);
      for (int k = 0; k < 8; ++k) value[k] = std::stod(fields[k + 1]);
    } catch (const std::exception&) {
      throw IoError("csv: line " + std::to_string(line_number) + " of " + path.string() +
                    " is not numeric");
    }

    auto [it, inserted] = view_slot.try_emplace(view_id, views.size());
    if (inserted) views.emplace_back();
    CalibrationView& view = views[it->second];
    view.correspondences.push_back(
        {Vec2(value[0], value[1]), Vec3(value[2], value[3], value[4])});
    view.sensor_points.emplace_back(value[5], value[6], value[7]);
  }
  if (views.empty()) throw IoError("csv: no correspondences in " + path.string());
  return views;
}

void write_correspondences_csv(const std::filesystem::path& path,
                               std::span<const CalibrationView> views) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("csv: cannot open " + path.string() + " for writing");
  out << "view_id,u,v,Xp,Yp,Zp,Xs,Ys,Zs\n";
  for (std::size_t v = 0; v < views.size(); ++v) {
    const CalibrationView& view = views[v];
    for (std::size_t k = 0; k < view.correspondences.size(); ++k) {
      const auto& c = view.correspondences[k];
      const Vec3& s = view.sensor_points[k];
      out << v << "," << format_double(c.pixel.x()) << "," << format_double(c.pixel.y()) << ","
          << format_double(c.pattern_point.x()) << "," << format_double(c.pattern_point.y())
          << "," << format_double(c.pattern_point.z()) << "," << format_double(s.x()) << ","
          << format_double(s.y()) << "," << format_double(s.z()) << "\n";
    }
  }
  if (!out) throw IoError("csv: write failed for " + path.string());
}

}  // namespace anovox
