#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gslac/scan_engine.hpp"

// Parameter extraction from traces: Lorentzian lineshape fits, linear and
// saturation-curve fits, and the misalignment-study summary. All fits work
// in SI units.

namespace gslac {

struct LorentzianParams {
  double center_T = 0.0;
  double fwhm_T = 0.0;
  double amplitude = 0.0;  // signed; negative = dip
  double baseline = 0.0;
};

struct FitResult {
  LorentzianParams params;
  Eigen::VectorXd param_stderr;  // center, fwhm, amplitude, baseline
  double residual_rms = 0.0;
  int n_iterations = 0;
  bool converged = false;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

struct SaturationFit {
  double c_max = 0.0;
  double p_sat_mW = 0.0;
  double stderr_c_max = 0.0;
  double stderr_p_sat = 0.0;
  double residual_rms = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool identifiable = true;  // false when the data never reach half saturation
};

struct AngleDependenceSummary {
  double fwhm_min_T = 0.0;
  double contrast_dip_fwhm_deg = 0.0;
  double dip_depth = 0.0;
  double linewidth_slope_T_per_deg = 0.0;
  double c_far = 0.0;
  double beta_elbow_deg = 0.0;
  double fwhm_residual_rms = 0.0;
  double contrast_residual_rms = 0.0;
};

// Generic damped least squares (Levenberg-Marquardt with multiplicative
// damping: x10 on a rejected step, /10 on an accepted one). Converges when
// the scaled parameter step drops below 1e-10 or after max_iterations.
struct LeastSquaresOptions {
  int max_iterations = 200;
  double lambda0 = 1e-3;
  double step_tolerance = 1e-10;
};

struct LeastSquaresOutcome {
  Eigen::VectorXd params;
  Eigen::VectorXd param_stderr;
  double residual_rms = 0.0;
  int n_iterations = 0;
  bool converged = false;
};

LeastSquaresOutcome damped_least_squares(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    const Eigen::VectorXd& initial,
    const LeastSquaresOptions& options = {});

// Lorentzian dip/peak fit: baseline + amplitude / (1 + (2(B-center)/fwhm)^2).
// Auto-initializes from the extremum, the median baseline, and the half-
// extremum crossings when no guess is given. Throws no_feature_error on a
// flat trace; non-convergence is flagged, with the best parameters returned.
FitResult fit_lorentzian(const std::vector<double>& b_T,
                         const std::vector<double>& signal,
                         std::optional<LorentzianParams> guess = {});
FitResult fit_lorentzian(const ScanTrace& trace,
                         std::optional<LorentzianParams> guess = {});

// Ordinary least squares, exact on collinear input.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fit of c_max * P / (P + p_sat) to contrast-vs-power data.
SaturationFit fit_saturation(const std::vector<double>& powers_mW,
                             const std::vector<double>& contrasts);

// Fits the misalignment model to per-angle Lorentzian fits: the piecewise-
// linear linewidth law and the Lorentzian contrast dip. Requires >= 7 angles
// spanning at least +-0.1 degrees.
AngleDependenceSummary extract_angle_dependence(
    const std::vector<std::pair<double, FitResult>>& fits);

}  // namespace gslac
