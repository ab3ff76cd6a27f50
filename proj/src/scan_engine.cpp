#include "gslac/scan_engine.hpp"

#include <cmath>
#include <set>
#include <string>

#include "gslac/constants.hpp"
#include "gslac/errors.hpp"
#include "gslac/photophysics.hpp"
#include "gslac/rng.hpp"

namespace gslac {

namespace {

double lorentzian_unit(double x, double center, double fwhm) {
  const double u = 2.0 * (x - center) / fwhm;
  return 1.0 / (1.0 + u * u);
}

double background_value(const BackgroundModel& bg, double b) {
  if (bg.k_bg == 0.0) return 1.0;
  return 1.0 - bg.k_bg * (1.0 - std::exp(-b / bg.b_scale_T));
}

}  // namespace

void Feature::validate() const {
  if (!(fwhm_T > 0.0)) throw config_error("feature fwhm must be > 0");
  if (!(contrast > 0.0 && contrast < 1.0))
    throw config_error("feature contrast must lie in (0,1)");
}

void AngleModelParams::validate() const {
  if (!(fwhm_min_T > 0.0) || !(linewidth_slope_T_per_deg > 0.0) ||
      !(c_far > 0.0) || !(dip_depth > 0.0) || !(beta_width_deg > 0.0) ||
      !(beta_elbow_deg >= 0.0))
    throw config_error("angle model parameters must be positive");
}

void SamplePreset::validate() const {
  if (name.empty()) throw config_error("preset needs a name");
  if (!(nitrogen_ppm > 0.0)) throw config_error("nitrogen_ppm must be > 0");
  std::set<double> centers;
  for (const Feature& f : features) {
    f.validate();
    if (!centers.insert(f.center_T).second)
      throw config_error("features must have distinct centers");
  }
}

void ScanConfig::validate() const {
  if (!(b_stop_T > b_start_T)) throw config_error("b_stop must exceed b_start");
  if (n_points < 2) throw config_error("n_points must be >= 2");
  if (n_averages < 1) throw config_error("n_averages must be >= 1");
  if (!(scan_duration_s > 0.0)) throw config_error("scan duration must be > 0");
  if (pump_mW < 0.0) throw config_error("pump power must be >= 0");
  if (photon_rate_per_s < 0.0) throw config_error("photon rate must be >= 0");
}

AngleModelParams angle_model_for(const SamplePreset& preset,
                                 const Feature& gslac_feature) {
  AngleModelParams p;
  p.fwhm_min_T = gslac_feature.fwhm_T;
  p.c_far = gslac_feature.contrast;
  p.linewidth_slope_T_per_deg = preset.linewidth_slope_T_per_deg;
  p.dip_depth = preset.dip_depth;
  p.beta_width_deg = preset.beta_width_deg;
  p.beta_elbow_deg = preset.beta_elbow_deg;
  return p;
}

AngleResponse angle_response(double beta_deg, const AngleModelParams& params) {
  params.validate();
  const double ab = std::abs(beta_deg);
  AngleResponse out;
  out.fwhm_T = params.fwhm_min_T +
               params.linewidth_slope_T_per_deg *
                   std::max(0.0, ab - params.beta_elbow_deg);
  const double dip = lorentzian_unit(beta_deg, 0.0, params.beta_width_deg);
  out.contrast = params.c_far * (1.0 - params.dip_depth * dip);
  return out;
}

double figure_of_merit(double beta_deg, const AngleModelParams& params) {
  const AngleResponse r = angle_response(beta_deg, params);
  return r.contrast / r.fwhm_T;
}

ScanTrace synthesize_scan(const SamplePreset& preset, const ScanConfig& config) {
  preset.validate();
  config.validate();

  // Resolve the effective feature list once: the central feature responds to
  // misalignment and to the pump-induced thermal shift.
  std::vector<Feature> feats = preset.features;
  for (Feature& f : feats) {
    if (f.label != FeatureLabel::gslac) continue;
    const AngleResponse r =
        angle_response(config.beta_deg, angle_model_for(preset, f));
    f.fwhm_T = r.fwhm_T;
    f.contrast = r.contrast;
    f.center_T = thermal_center_shift(config.pump_mW,
                                      preset.thermal_shift_T_per_mW, f.center_T);
  }

  auto model = [&](double b) {
    double v = background_value(preset.background, b);
    for (const Feature& f : feats) {
      const double l = f.contrast * lorentzian_unit(b, f.center_T, f.fwhm_T);
      v *= (f.polarity == Polarity::dip) ? (1.0 - l) : (1.0 + l);
    }
    return v;
  };

  const double norm = model(config.normalization_T);
  if (!(norm > 0.0)) throw numeric_error("normalization point has no signal");

  ScanTrace trace;
  trace.b_T.resize(config.n_points);
  trace.signal.resize(config.n_points);
  const double step = (config.b_stop_T - config.b_start_T) / (config.n_points - 1);
  for (int i = 0; i < config.n_points; ++i) {
    trace.b_T[i] = config.b_start_T + step * i;
    trace.signal[i] = model(trace.b_T[i]) / norm;
  }
  trace.meta.sample = preset.name;
  trace.meta.detection_mode = to_string(preset.detection_mode);
  trace.meta.normalization_T = config.normalization_T;
  trace.meta.beta_deg = config.beta_deg;
  trace.meta.pump_mW = config.pump_mW;
  trace.meta.seed = config.seed;

  if (config.photon_rate_per_s > 0.0) {
    const double dwell =
        config.scan_duration_s / config.n_points * config.n_averages;
    trace = add_shot_noise(trace, config.photon_rate_per_s, dwell, config.seed);
  }
  return trace;
}

double field_from_current(double current_A) {
  if (!std::isfinite(current_A)) throw config_error("current must be finite");
  return kCoilField_T_per_A * current_A;
}

double coil_power(double current_A, double r_coil_ohm) {
  if (!(r_coil_ohm > 0.0)) throw config_error("coil resistance must be > 0");
  return current_A * current_A * r_coil_ohm;
}

ScanTrace add_shot_noise(const ScanTrace& trace, double photon_rate_per_s,
                         double dwell_time_s, std::uint64_t seed) {
  if (!(photon_rate_per_s > 0.0) || !(dwell_time_s > 0.0))
    throw config_error("photon rate and dwell time must be > 0");
  const double sigma = 1.0 / std::sqrt(photon_rate_per_s * dwell_time_s);
  ScanTrace out = trace;
  GaussianDeviate gauss(seed);
  for (double& v : out.signal) v *= 1.0 + sigma * gauss();
  return out;
}

const char* to_string(DetectionMode mode) {
  return mode == DetectionMode::pl ? "PL" : "absorption";
}

const char* to_string(FeatureLabel label) {
  switch (label) {
    case FeatureLabel::gslac: return "GSLAC";
    case FeatureLabel::p1_cross_relaxation: return "P1-cross-relaxation";
    case FeatureLabel::off_axis_nv: return "off-axis-NV";
    case FeatureLabel::eslac_candidate: return "ESLAC-candidate";
  }
  return "?";
}

const char* to_string(Polarity polarity) {
  return polarity == Polarity::dip ? "dip" : "peak";
}

DetectionMode detection_mode_from_string(const std::string& s) {
  if (s == "PL" || s == "pl") return DetectionMode::pl;
  if (s == "absorption") return DetectionMode::absorption;
  throw config_error("unknown detection mode: " + s);
}

FeatureLabel feature_label_from_string(const std::string& s) {
  if (s == "GSLAC") return FeatureLabel::gslac;
  if (s == "P1-cross-relaxation") return FeatureLabel::p1_cross_relaxation;
  if (s == "off-axis-NV") return FeatureLabel::off_axis_nv;
  if (s == "ESLAC-candidate") return FeatureLabel::eslac_candidate;
  throw config_error("unknown feature label: " + s);
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "dip") return Polarity::dip;
  if (s == "peak") return Polarity::peak;
  throw config_error("unknown polarity: " + s);
}

}  // namespace gslac
