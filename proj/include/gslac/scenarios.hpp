#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gslac/inference.hpp"
#include "gslac/lockin_dsp.hpp"
#include "gslac/scan_engine.hpp"

// Study orchestration shared by the CLI and the acceptance suite: the
// misalignment study (synthesize per angle, fit, summarize) and the full
// lock-in magnetometer chain (calibrate, record, spectrum, sensitivity).

namespace gslac {

struct AngleStudyConfig {
  std::string preset_name = "W4";
  double beta_min_deg = -0.2;
  double beta_max_deg = 0.2;
  int n_angles = 41;
  double window_halfwidth_T = 6e-3;  // scan window around the central feature
  int scan_points = 1201;
  std::uint64_t seed = 0;
};

struct AngleStudyRow {
  double beta_deg = 0.0;
  double fwhm_T = 0.0;
  double contrast = 0.0;
  double fom_per_T = 0.0;  // contrast / fwhm
};

struct AngleStudyResult {
  std::vector<AngleStudyRow> rows;
  std::vector<std::pair<double, FitResult>> fits;
  AngleDependenceSummary summary;
  double fom_argmax_deg = 0.0;
  bool fom_minimum_at_zero = false;
};

// Scans a single-feature version of the preset (flat background) across the
// angle grid, fits every trace, and condenses the angle dependence.
AngleStudyResult run_angle_study(const AngleStudyConfig& config);

struct MagnetometerConfig {
  double center_T = 102.4e-3;
  double fwhm_T = 0.84e-3;
  double contrast = 0.15;
  ModulationParams mod;
  int cal_points = 81;
  double cal_settle_s = 0.09;      // per calibration point, 30 time constants
  double record_s = 7.0;
  double field_noise_asd_T = 0.45e-9;
  double field_noise_bandwidth_Hz = 2e3;
  double electronic_floor_T = 70e-12;  // field-equivalent additive noise
  double insensitive_bias_T = 80e-3;
  std::size_t psd_segment = 2048;
  double collected_power_W = 4.2e-3;
  double wavelength_m = 1042e-9;
  double prefactor = 1.0;
  std::optional<double> reference_delta_b = 12.2e-12;
  std::uint64_t seed = 1;
};

struct MagnetometerResult {
  // Demodulated output vs bias over +-fwhm/4 around the center.
  std::vector<double> cal_bias_T;
  std::vector<double> cal_x;
  std::vector<double> cal_x_oracle;  // small-modulation prediction per point
  SlopeCalibration calibration;
  double oracle_slope_per_T = 0.0;  // same line fit applied to the oracle curve

  NoiseSpectrum spectrum_sensitive;    // bias at the feature center
  NoiseSpectrum spectrum_insensitive;  // bias on the flat background
  NoiseSpectrum spectrum_electronic;   // no transmission, electronics only
  double band_sensitive_T = 0.0;       // 1-100 Hz averages
  double band_insensitive_T = 0.0;
  double band_electronic_T = 0.0;

  SensitivityReport sensitivity;
};

MagnetometerResult run_magnetometer(const MagnetometerConfig& config);

}  // namespace gslac
