#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace anovox {

/// Background-removal parameters for one object class; classes whose scans
/// carry too little background to support a plane fit are not filtered.
struct BackgroundPreset {
  double tau = 30.0;
  double alpha = 0.0;
};

/// Per-class presets, keyed by class slug. nullopt = no filtering.
using BackgroundPresetTable = std::map<std::string, std::optional<BackgroundPreset>>;

/// Built-in table for the benchmark's eight object classes.
const BackgroundPresetTable& default_background_presets();

/// Versioned JSON config: {"version": 1, "classes": {slug: {tau, alpha} | null}}.
BackgroundPresetTable load_background_presets(const std::filesystem::path& path);
void write_background_presets(const std::filesystem::path& path,
                              const BackgroundPresetTable& table);

}  // namespace anovox
