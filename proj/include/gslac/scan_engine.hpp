#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Full-field-scan synthesis: per-sample feature catalogs, the misalignment
// response of the central anti-crossing feature, electromagnet arithmetic,
// and photon shot noise.

namespace gslac {

enum class DetectionMode { pl, absorption };

enum class FeatureLabel {
  gslac,
  p1_cross_relaxation,
  off_axis_nv,
  eslac_candidate,
};

// Polarity of the recorded signal at the feature: PL features and
// absorption-mode transmission features both dip.
enum class Polarity { dip, peak };

struct Feature {
  double center_T = 0.0;
  double fwhm_T = 0.0;
  double contrast = 0.0;  // fraction of the local background
  Polarity polarity = Polarity::dip;
  FeatureLabel label = FeatureLabel::gslac;

  void validate() const;  // fwhm > 0, contrast in (0,1)
};

// Misalignment model of the central feature. The linewidth sits at
// fwhm_min on a plateau |beta| <= beta_elbow and grows linearly beyond it;
// the contrast dips by dip_depth at beta = 0 with a Lorentzian profile of
// FWHM beta_width.
struct AngleModelParams {
  double fwhm_min_T = 0.46e-3;
  double linewidth_slope_T_per_deg = 6.0e-3;
  double c_far = 0.01;  // contrast plateau at large misalignment
  double dip_depth = 0.35;
  double beta_width_deg = 0.054;
  double beta_elbow_deg = 0.01;

  void validate() const;
};

struct AngleResponse {
  double fwhm_T = 0.0;
  double contrast = 0.0;
};

// Smooth per-sample background: 1 - k_bg * (1 - exp(-B / b_scale)).
struct BackgroundModel {
  double k_bg = 0.0;
  double b_scale_T = 0.02;
};

struct SamplePreset {
  std::string name;
  std::string growth_type;  // CVD | HPHT
  std::string surface_cut;
  double nitrogen_ppm = 0.0;  // upper bound from the sample datasheet
  double irradiation_dose_cm2 = 0.0;
  double irradiation_energy_MeV = 0.0;
  std::string annealing_note;
  DetectionMode detection_mode = DetectionMode::pl;
  BackgroundModel background;
  double thermal_shift_T_per_mW = 0.0;
  // Sample-level misalignment behavior; fwhm_min and c_far come from the
  // catalog entry of the central feature at synthesis time.
  double linewidth_slope_T_per_deg = 6.0e-3;
  double dip_depth = 0.35;
  double beta_width_deg = 0.054;
  double beta_elbow_deg = 0.01;
  std::vector<Feature> features;

  void validate() const;
};

struct ScanConfig {
  double b_start_T = 0.0;
  double b_stop_T = 0.110;
  int n_points = 5001;
  double scan_duration_s = 10.0;
  int n_averages = 64;
  double alpha_deg = 0.0;
  double beta_deg = 0.0;
  double pump_mW = 0.0;
  double normalization_T = 80e-3;
  double photon_rate_per_s = 0.0;  // 0 = noise-free
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceMeta {
  std::string sample;
  std::string detection_mode;
  double normalization_T = 80e-3;
  double beta_deg = 0.0;
  double pump_mW = 0.0;
  std::uint64_t seed = 0;
};

struct ScanTrace {
  std::vector<double> b_T;
  std::vector<double> signal;
  TraceMeta meta;
};

// Trace = background x product of feature profiles, normalized so the
// noise-free model equals 1 at normalization_T exactly; the central feature
// is first adjusted by angle_response(beta) and the configured thermal
// shift. Shot noise is applied when photon_rate_per_s > 0, with the dwell
// time per point scaled by n_averages.
ScanTrace synthesize_scan(const SamplePreset& preset, const ScanConfig& config);

AngleResponse angle_response(double beta_deg, const AngleModelParams& params);

// contrast(beta) / fwhm(beta), the per-photon sensitivity figure.
double figure_of_merit(double beta_deg, const AngleModelParams& params);

// Electromagnet calibration, 2.9 mT per ampere.
double field_from_current(double current_A);

// Resistive dissipation I^2 R.
double coil_power(double current_A, double r_coil_ohm);

// Multiplies each point by (1 + g/sqrt(photon_rate * dwell_time)) with g a
// unit Gaussian; deterministic per seed.
ScanTrace add_shot_noise(const ScanTrace& trace, double photon_rate_per_s,
                         double dwell_time_s, std::uint64_t seed);

// Assembles the full angle model for a preset's central feature.
AngleModelParams angle_model_for(const SamplePreset& preset,
                                 const Feature& gslac_feature);

const char* to_string(DetectionMode mode);
const char* to_string(FeatureLabel label);
const char* to_string(Polarity polarity);
DetectionMode detection_mode_from_string(const std::string& s);
FeatureLabel feature_label_from_string(const std::string& s);
Polarity polarity_from_string(const std::string& s);

}  // namespace gslac
