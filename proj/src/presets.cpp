#include "gslac/preset_io.hpp"

#include <fstream>
#include <set>

#include "gslac/errors.hpp"

namespace gslac {

namespace {

using nlohmann::json;

// The four samples of the study. Feature widths and contrasts other than the
// pinned central-feature values are qualitative placeholders and editable
// through preset files.
std::vector<SamplePreset> make_builtin_presets() {
  std::vector<SamplePreset> out;

  {
    SamplePreset p;
    p.name = "W4";
    p.growth_type = "CVD";
    p.surface_cut = "(100)";
    p.nitrogen_ppm = 1.0;
    p.irradiation_dose_cm2 = 1e18;
    p.irradiation_energy_MeV = 10.0;
    p.annealing_note = "720 C, 2 h";
    p.detection_mode = DetectionMode::pl;
    p.background = {0.03, 0.02};
    p.features = {
        {51.2e-3, 0.5e-3, 0.0005, Polarity::dip, FeatureLabel::eslac_candidate},
        {60.0e-3, 2.0e-3, 0.003, Polarity::dip, FeatureLabel::off_axis_nv},
        {102.4e-3, 0.46e-3, 0.01, Polarity::dip, FeatureLabel::gslac},
    };
    out.push_back(p);
  }
  {
    SamplePreset p;
    p.name = "B3A";
    p.growth_type = "HPHT";
    p.surface_cut = "(111)";
    p.nitrogen_ppm = 110.0;
    p.irradiation_dose_cm2 = 2e19;
    p.irradiation_energy_MeV = 10.0;
    p.annealing_note = "700 C, 2 h";
    p.detection_mode = DetectionMode::absorption;
    p.background = {0.15, 0.03};
    p.features = {
        {51.2e-3, 3.0e-3, 0.05, Polarity::dip,
         FeatureLabel::p1_cross_relaxation},
        {60.0e-3, 2.0e-3, 0.02, Polarity::dip, FeatureLabel::off_axis_nv},
        {102.4e-3, 0.84e-3, 0.15, Polarity::dip, FeatureLabel::gslac},
    };
    out.push_back(p);
  }
  {
    SamplePreset p;
    p.name = "F11";
    p.growth_type = "HPHT";
    p.surface_cut = "(111)";
    p.nitrogen_ppm = 200.0;
    p.irradiation_dose_cm2 = 1e18;
    p.irradiation_energy_MeV = 10.0;
    p.annealing_note = "700 C, 3 h";
    p.detection_mode = DetectionMode::pl;
    p.background = {0.08, 0.025};
    p.features = {
        {51.2e-3, 3.0e-3, 0.02, Polarity::dip,
         FeatureLabel::p1_cross_relaxation},
        {60.0e-3, 2.5e-3, 0.01, Polarity::dip, FeatureLabel::off_axis_nv},
        {102.4e-3, 2.0e-3, 0.025, Polarity::dip, FeatureLabel::gslac},
    };
    out.push_back(p);
  }
  {
    SamplePreset p;
    p.name = "C7";
    p.growth_type = "HPHT";
    p.surface_cut = "(100)";
    p.nitrogen_ppm = 200.0;
    p.irradiation_dose_cm2 = 1e18;
    p.irradiation_energy_MeV = 10.0;
    p.annealing_note = "750 C, 3 h";
    p.detection_mode = DetectionMode::pl;
    p.background = {0.08, 0.025};
    p.features = {
        {51.2e-3, 3.0e-3, 0.015, Polarity::dip,
         FeatureLabel::p1_cross_relaxation},
        {60.0e-3, 2.5e-3, 0.008, Polarity::dip, FeatureLabel::off_axis_nv},
        {102.4e-3, 2.5e-3, 0.02, Polarity::dip, FeatureLabel::gslac},
    };
    out.push_back(p);
  }
  return out;
}

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) throw config_error(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw config_error(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw config_error(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where + ": bad value for '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback,
         const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(where + ": bad value for '" + key + "'");
  }
}

}  // namespace

const std::vector<SamplePreset>& builtin_presets() {
  static const std::vector<SamplePreset> presets = make_builtin_presets();
  return presets;
}

const SamplePreset& builtin_preset(const std::string& name) {
  for (const SamplePreset& p : builtin_presets())
    if (p.name == name) return p;
  throw config_error("unknown preset: " + name);
}

std::vector<std::string> builtin_preset_names() {
  std::vector<std::string> names;
  for (const SamplePreset& p : builtin_presets()) names.push_back(p.name);
  return names;
}

nlohmann::json preset_to_json(const SamplePreset& preset) {
  json j;
  j["name"] = preset.name;
  j["growth_type"] = preset.growth_type;
  j["surface_cut"] = preset.surface_cut;
  j["nitrogen_ppm"] = preset.nitrogen_ppm;
  j["irradiation_dose_cm2"] = preset.irradiation_dose_cm2;
  j["irradiation_energy_MeV"] = preset.irradiation_energy_MeV;
  j["annealing_note"] = preset.annealing_note;
  j["detection_mode"] = to_string(preset.detection_mode);
  j["background"] = {{"k_bg", preset.background.k_bg},
                     {"b_scale_T", preset.background.b_scale_T}};
  j["thermal_shift_T_per_mW"] = preset.thermal_shift_T_per_mW;
  j["angle_model"] = {
      {"linewidth_slope_T_per_deg", preset.linewidth_slope_T_per_deg},
      {"dip_depth", preset.dip_depth},
      {"beta_width_deg", preset.beta_width_deg},
      {"beta_elbow_deg", preset.beta_elbow_deg}};
  json feats = json::array();
  for (const Feature& f : preset.features) {
    feats.push_back({{"center_T", f.center_T},
                     {"fwhm_T", f.fwhm_T},
                     {"contrast", f.contrast},
                     {"polarity", to_string(f.polarity)},
                     {"label", to_string(f.label)}});
  }
  j["features"] = feats;
  return j;
}

SamplePreset preset_from_json(const nlohmann::json& j) {
  require_keys(j,
               {"name", "growth_type", "surface_cut", "nitrogen_ppm",
                "irradiation_dose_cm2", "irradiation_energy_MeV",
                "annealing_note", "detection_mode", "background",
                "thermal_shift_T_per_mW", "angle_model", "features"},
               "preset");
  SamplePreset p;
  p.name = get_required<std::string>(j, "name", "preset");
  p.growth_type = get_or<std::string>(j, "growth_type", "", "preset");
  p.surface_cut = get_or<std::string>(j, "surface_cut", "", "preset");
  p.nitrogen_ppm = get_required<double>(j, "nitrogen_ppm", "preset");
  p.irradiation_dose_cm2 = get_or<double>(j, "irradiation_dose_cm2", 0.0, "preset");
  p.irradiation_energy_MeV =
      get_or<double>(j, "irradiation_energy_MeV", 0.0, "preset");
  p.annealing_note = get_or<std::string>(j, "annealing_note", "", "preset");
  p.detection_mode = detection_mode_from_string(
      get_or<std::string>(j, "detection_mode", "PL", "preset"));
  if (j.contains("background")) {
    const json& b = j.at("background");
    require_keys(b, {"k_bg", "b_scale_T"}, "preset.background");
    p.background.k_bg = get_or<double>(b, "k_bg", 0.0, "preset.background");
    p.background.b_scale_T =
        get_or<double>(b, "b_scale_T", 0.02, "preset.background");
  }
  p.thermal_shift_T_per_mW =
      get_or<double>(j, "thermal_shift_T_per_mW", 0.0, "preset");
  if (j.contains("angle_model")) {
    const json& a = j.at("angle_model");
    require_keys(a,
                 {"linewidth_slope_T_per_deg", "dip_depth", "beta_width_deg",
                  "beta_elbow_deg"},
                 "preset.angle_model");
    p.linewidth_slope_T_per_deg = get_or<double>(
        a, "linewidth_slope_T_per_deg", p.linewidth_slope_T_per_deg,
        "preset.angle_model");
    p.dip_depth = get_or<double>(a, "dip_depth", p.dip_depth, "preset.angle_model");
    p.beta_width_deg =
        get_or<double>(a, "beta_width_deg", p.beta_width_deg, "preset.angle_model");
    p.beta_elbow_deg =
        get_or<double>(a, "beta_elbow_deg", p.beta_elbow_deg, "preset.angle_model");
  }
  if (!j.contains("features") || !j.at("features").is_array())
    throw config_error("preset: 'features' must be an array");
  for (const json& fj : j.at("features")) {
    require_keys(fj, {"center_T", "fwhm_T", "contrast", "polarity", "label"},
                 "preset.features[]");
    Feature f;
    f.center_T = get_required<double>(fj, "center_T", "feature");
    f.fwhm_T = get_required<double>(fj, "fwhm_T", "feature");
    f.contrast = get_required<double>(fj, "contrast", "feature");
    f.polarity = polarity_from_string(
        get_or<std::string>(fj, "polarity", "dip", "feature"));
    f.label = feature_label_from_string(
        get_or<std::string>(fj, "label", "GSLAC", "feature"));
    p.features.push_back(f);
  }
  p.validate();
  return p;
}

SamplePreset load_preset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open preset file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error("preset file " + path + ": " + e.what());
  }
  return preset_from_json(j);
}

void save_preset_file(const SamplePreset& preset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write preset file: " + path);
  out << preset_to_json(preset).dump(2) << "\n";
}

}  // namespace gslac
