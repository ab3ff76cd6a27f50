#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gslac/scan_engine.hpp"

// Built-in sample presets and their JSON serialization. Parsing is strict:
// unknown keys are rejected so a typo cannot silently change the physics.

namespace gslac {

const std::vector<SamplePreset>& builtin_presets();
const SamplePreset& builtin_preset(const std::string& name);
std::vector<std::string> builtin_preset_names();

nlohmann::json preset_to_json(const SamplePreset& preset);
SamplePreset preset_from_json(const nlohmann::json& j);

SamplePreset load_preset_file(const std::string& path);
void save_preset_file(const SamplePreset& preset, const std::string& path);

}  // namespace gslac
