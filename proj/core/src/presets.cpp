#include "anovox/presets.hpp"

#include <nlohmann/json.hpp>

#include "anovox/errors.hpp"
#include "anovox/io/pose_json.hpp"

namespace anovox {

const BackgroundPresetTable& default_background_presets() {
  static const BackgroundPresetTable table = {
      {"plastic_stool", BackgroundPreset{30.0, -2.0}},
      {"rubbish_bin", BackgroundPreset{30.0, -2.0}},
      {"wicker_vase", BackgroundPreset{60.0, 10.0}},
      {"bathroom_furniture", BackgroundPreset{20.0, 10.0}},
      {"container", BackgroundPreset{30.0, 2.0}},
      {"plastic_vase", BackgroundPreset{60.0, 2.0}},
      {"wooden_stool", std::nullopt},
      {"sink_cabinet", std::nullopt},
  };
  return table;
}

BackgroundPresetTable load_background_presets(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  if (!j.contains("version") || j["version"].get<int>() != 1 || !j.contains("classes")) {
    throw ValidationError("presets: unsupported config format in " + path.string());
  }
  BackgroundPresetTable table;
  for (const auto& [slug, entry] : j["classes"].items()) {
    if (entry.is_null()) {
      table[slug] = std::nullopt;
    } else {
      table[slug] = BackgroundPreset{entry.at("tau").get<double>(),
                                     entry.at("alpha").get<double>()};
    }
  }
  return table;
}

void write_background_presets(const std::filesystem::path& path,
                              const BackgroundPresetTable& table) {
  nlohmann::json classes;
  for (const auto& [slug, preset] : table) {
    if (preset) {
      classes[slug] = {{"tau", preset->tau}, {"alpha", preset->alpha}};
    } else {
      classes[slug] = nullptr;
    }
  }
  write_json_file(path, nlohmann::json{{"version", 1}, {"classes", classes}});
}

}  // namespace anovox
