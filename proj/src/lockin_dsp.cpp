#include "gslac/lockin_dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "gslac/constants.hpp"
#include "gslac/errors.hpp"
#include "gslac/inference.hpp"
#include "gslac/rng.hpp"

namespace gslac {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Smallest cycle length (in decimated samples) after which the reference
// phase pattern repeats, or 0 if none short enough.
int reference_cycle(const ModulationParams& mod, int decimation) {
  const double per_sample =
      mod.frequency_Hz * decimation / mod.sample_rate_Hz;
  for (int cycle = 1; cycle <= 64; ++cycle) {
    const double phase = per_sample * cycle;
    if (std::abs(phase - std::round(phase)) < 1e-9) return cycle;
  }
  return 0;
}

}  // namespace

void ModulationParams::validate() const {
  if (!(amplitude_T >= 0.0)) throw config_error("modulation amplitude must be >= 0");
  if (!(frequency_Hz > 0.0) || !(sample_rate_Hz > 0.0))
    throw config_error("modulation frequency and sample rate must be > 0");
  if (!(frequency_Hz < 0.5 * sample_rate_Hz))
    throw config_error("modulation frequency must be below Nyquist");
  if (!(time_constant_s > 1.0 / frequency_Hz))
    throw config_error("time constant must exceed one modulation period");
  if (filter_order < 1) throw config_error("filter order must be >= 1");
}

TimeSeries modulate_and_sample(
    const std::function<double(double)>& signal_of_field, double bias_T,
    const ModulationParams& mod, double duration_s, double noise_asd_T,
    double noise_bandwidth_Hz, std::uint64_t seed) {
  mod.validate();
  if (!(duration_s >= 10.0 * mod.time_constant_s))
    throw config_error("duration must cover at least 10 time constants");
  if (noise_asd_T < 0.0) throw config_error("noise ASD must be >= 0");

  const std::size_t n =
      static_cast<std::size_t>(std::llround(duration_s * mod.sample_rate_Hz));
  TimeSeries ts;
  ts.sample_rate_Hz = mod.sample_rate_Hz;
  ts.values.resize(n);

  std::size_t hold = 1;
  double noise_sigma = 0.0;
  GaussianDeviate gauss(seed);
  if (noise_asd_T > 0.0) {
    if (!(noise_bandwidth_Hz > 0.0))
      throw config_error("noise bandwidth must be > 0");
    hold = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(mod.sample_rate_Hz / noise_bandwidth_Hz)));
    const double hold_rate = mod.sample_rate_Hz / static_cast<double>(hold);
    noise_sigma = noise_asd_T * std::sqrt(0.5 * hold_rate);
  }

  double noise = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (noise_sigma > 0.0 && i % hold == 0) noise = noise_sigma * gauss();
    const double t = static_cast<double>(i) / mod.sample_rate_Hz;
    const double b =
        bias_T + mod.amplitude_T * std::sin(kTwoPi * mod.frequency_Hz * t) +
        noise;
    ts.values[i] = signal_of_field(b);
  }
  return ts;
}

TimeSeries add_white_noise(const TimeSeries& ts, double asd_per_sqrtHz,
                           std::uint64_t seed) {
  if (!(asd_per_sqrtHz >= 0.0)) throw config_error("noise ASD must be >= 0");
  TimeSeries out = ts;
  if (asd_per_sqrtHz == 0.0) return out;
  const double sigma = asd_per_sqrtHz * std::sqrt(0.5 * ts.sample_rate_Hz);
  GaussianDeviate gauss(seed);
  for (double& v : out.values) v += sigma * gauss();
  return out;
}

std::vector<double> exponential_lowpass(const std::vector<double>& values,
                                        double sample_rate_Hz, double tau_s,
                                        int order) {
  if (!(sample_rate_Hz > 0.0) || !(tau_s > 0.0) || order < 1)
    throw config_error("bad low-pass parameters");
  const double alpha = 1.0 - std::exp(-1.0 / (sample_rate_Hz * tau_s));
  std::vector<double> state(order, 0.0);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double v = values[i];
    for (int k = 0; k < order; ++k) {
      state[k] += alpha * (v - state[k]);
      v = state[k];
    }
    out[i] = v;
  }
  return out;
}

DemodOutput demodulate(const TimeSeries& ts, const ModulationParams& mod,
                       double phase_deg) {
  mod.validate();
  if (ts.values.empty()) throw config_error("empty time series");
  if (std::abs(ts.sample_rate_Hz - mod.sample_rate_Hz) >
      1e-9 * mod.sample_rate_Hz)
    throw config_error("time series sample rate does not match the settings");

  const std::size_t n = ts.values.size();
  const double phase = deg_to_rad(phase_deg);
  const double alpha =
      1.0 - std::exp(-1.0 / (mod.sample_rate_Hz * mod.time_constant_s));
  const int decim = std::max(
      1, static_cast<int>(std::floor(mod.sample_rate_Hz *
                                     mod.time_constant_s / 4.0)));

  std::vector<double> xs(mod.filter_order, 0.0), ys(mod.filter_order, 0.0);
  DemodOutput out;
  out.mod = mod;
  out.decimation = decim;
  out.x.sample_rate_Hz = mod.sample_rate_Hz / decim;
  out.y.sample_rate_Hz = out.x.sample_rate_Hz;
  out.x.t0_s = ts.t0_s;
  out.y.t0_s = ts.t0_s;
  out.x.values.reserve(n / decim + 1);
  out.y.values.reserve(n / decim + 1);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = ts.t0_s + static_cast<double>(i) / mod.sample_rate_Hz;
    const double arg = kTwoPi * mod.frequency_Hz * t + phase;
    double vx = ts.values[i] * std::sin(arg);
    double vy = ts.values[i] * std::cos(arg);
    for (int k = 0; k < mod.filter_order; ++k) {
      xs[k] += alpha * (vx - xs[k]);
      vx = xs[k];
      ys[k] += alpha * (vy - ys[k]);
      vy = ys[k];
    }
    if (i % decim == static_cast<std::size_t>(decim - 1)) {
      out.x.values.push_back(vx);
      out.y.values.push_back(vy);
    }
  }
  return out;
}

double steady_mean(const DemodOutput& demod, double trailing_fraction) {
  const std::size_t n = demod.x.values.size();
  if (n == 0) throw config_error("empty demodulated series");
  const int cycle = reference_cycle(demod.mod, demod.decimation);
  std::size_t want = static_cast<std::size_t>(
      std::max(1.0, trailing_fraction * static_cast<double>(n)));
  if (cycle > 1) {
    want = std::max<std::size_t>(cycle, want - want % cycle);
    want = std::min(want, n - n % cycle);
  }
  want = std::min(want, n);
  double sum = 0.0;
  for (std::size_t i = n - want; i < n; ++i) sum += demod.x.values[i];
  return sum / static_cast<double>(want);
}

SlopeCalibration calibrate_slope(const std::vector<double>& bias_T,
                                 const std::vector<double>& x_out,
                                 double fit_window_T, double check_window_T) {
  if (bias_T.size() != x_out.size())
    throw config_error("bias and output arrays differ in length");
  if (bias_T.size() < 5) throw numeric_error("calibration needs >= 5 points");
  if (!(fit_window_T > 0.0)) throw config_error("fit window must be > 0");
  if (!(check_window_T > 0.0)) check_window_T = fit_window_T;

  // Coarse zero-crossing estimate from the full line, then two refinement
  // passes restricted to the fit window.
  LinearFit lin = fit_line(bias_T, x_out);
  if (lin.slope == 0.0) throw numeric_error("output has no slope to calibrate");
  double center = -lin.intercept / lin.slope;

  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> bw, xw;
    for (std::size_t i = 0; i < bias_T.size(); ++i) {
      if (std::abs(bias_T[i] - center) <= 0.5 * fit_window_T) {
        bw.push_back(bias_T[i]);
        xw.push_back(x_out[i]);
      }
    }
    if (bw.size() < 5)
      throw numeric_error("calibration fit window holds fewer than 5 points");
    lin = fit_line(bw, xw);
    if (lin.slope == 0.0) throw numeric_error("output has no slope to calibrate");
    center = -lin.intercept / lin.slope;
  }

  SlopeCalibration out;
  out.slope_per_T = lin.slope;
  out.center_T = center;
  out.stderr_slope = lin.stderr_slope;

  std::vector<double> bc, xc;
  for (std::size_t i = 0; i < bias_T.size(); ++i) {
    if (std::abs(bias_T[i] - center) <= 0.5 * check_window_T) {
      bc.push_back(bias_T[i]);
      xc.push_back(x_out[i]);
    }
  }
  if (bc.size() >= 3) {
    const LinearFit check = fit_line(bc, xc);
    double ssr = 0.0;
    double lo = xc[0], hi = xc[0];
    for (std::size_t i = 0; i < bc.size(); ++i) {
      const double r = xc[i] - (check.intercept + check.slope * bc[i]);
      ssr += r * r;
      lo = std::min(lo, xc[i]);
      hi = std::max(hi, xc[i]);
    }
    const double range = hi - lo;
    if (range > 0.0) {
      out.check_rms_fraction = std::sqrt(ssr / bc.size()) / range;
      out.linear_ok = out.check_rms_fraction < 0.05;
    }
  }
  return out;
}

NoiseSpectrum noise_spectrum(const TimeSeries& ts, std::size_t segment_length,
                             double overlap_fraction,
                             const std::string& window) {
  if (!(ts.sample_rate_Hz > 0.0)) throw config_error("sample rate must be > 0");
  if (segment_length < 8) throw config_error("segment length too short");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw config_error("overlap fraction must lie in [0,1)");

  const std::size_t n = ts.values.size();
  const std::size_t hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(segment_length * (1.0 - overlap_fraction))));
  if (n < segment_length + hop)
    throw numeric_error("record too short for two segments");
  const std::size_t n_seg = 1 + (n - segment_length) / hop;

  std::vector<double> w(segment_length, 1.0);
  if (window == "hann") {
    for (std::size_t i = 0; i < segment_length; ++i)
      w[i] = 0.5 * (1.0 - std::cos(kTwoPi * i / segment_length));
  } else if (window != "rect") {
    throw config_error("unknown window: " + window);
  }
  double wss = 0.0;
  for (double v : w) wss += v * v;

  const std::size_t n_bins = segment_length / 2 + 1;
  std::vector<double> psd(n_bins, 0.0);
  std::vector<double> buf(segment_length);
  std::vector<std::complex<double>> spec(n_bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(
      static_cast<int>(segment_length), buf.data(),
      reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);

  for (std::size_t s = 0; s < n_seg; ++s) {
    const double* seg = ts.values.data() + s * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < segment_length; ++i) mean += seg[i];
    mean /= segment_length;
    for (std::size_t i = 0; i < segment_length; ++i)
      buf[i] = (seg[i] - mean) * w[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < n_bins; ++k)
      psd[k] += std::norm(spec[k]);
  }
  fftw_destroy_plan(plan);

  NoiseSpectrum out;
  out.window_descriptor = window;
  out.n_averages = static_cast<int>(n_seg);
  out.frequencies_Hz.resize(n_bins);
  out.asd.resize(n_bins);
  const double scale = 1.0 / (ts.sample_rate_Hz * wss * n_seg);
  for (std::size_t k = 0; k < n_bins; ++k) {
    out.frequencies_Hz[k] = k * ts.sample_rate_Hz / segment_length;
    const bool interior = k > 0 && !(segment_length % 2 == 0 && k == n_bins - 1);
    out.asd[k] = std::sqrt(psd[k] * scale * (interior ? 2.0 : 1.0));
  }
  return out;
}

double band_average(const NoiseSpectrum& spec, double f_lo_Hz, double f_hi_Hz) {
  if (!(f_hi_Hz >= f_lo_Hz)) throw config_error("band limits out of order");
  if (spec.frequencies_Hz.empty() || f_lo_Hz < spec.frequencies_Hz.front() ||
      f_hi_Hz > spec.frequencies_Hz.back())
    throw config_error("band lies outside the spectrum range");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < spec.frequencies_Hz.size(); ++k) {
    if (spec.frequencies_Hz[k] >= f_lo_Hz && spec.frequencies_Hz[k] <= f_hi_Hz) {
      sum += spec.asd[k];
      ++count;
    }
  }
  if (count == 0) throw config_error("band contains no spectrum bins");
  return sum / static_cast<double>(count);
}

NoiseSpectrum equalize_demod_response(const NoiseSpectrum& spec,
                                      const ModulationParams& mod) {
  mod.validate();
  const double alpha =
      1.0 - std::exp(-1.0 / (mod.sample_rate_Hz * mod.time_constant_s));
  NoiseSpectrum out = spec;
  for (std::size_t k = 0; k < out.asd.size(); ++k) {
    const double omega = kTwoPi * spec.frequencies_Hz[k] / mod.sample_rate_Hz;
    const std::complex<double> z = std::polar(1.0, -omega);
    const double h1 = std::abs(alpha / (1.0 - (1.0 - alpha) * z));
    out.asd[k] /= std::pow(h1, mod.filter_order);
  }
  return out;
}

double photon_rate(double power_W, double wavelength_m) {
  if (!(power_W >= 0.0)) throw config_error("power must be >= 0");
  if (!(wavelength_m > 0.0)) throw config_error("wavelength must be > 0");
  return power_W * wavelength_m / (kPlanck_J_s * kSpeedOfLight_m_per_s);
}

double SensitivityReport::implied_prefactor() const {
  if (!reference_delta_b || delta_b_T_per_sqrtHz <= 0.0) return 0.0;
  return *reference_delta_b * prefactor / delta_b_T_per_sqrtHz;
}

std::string SensitivityReport::to_text() const {
  std::ostringstream os;
  os << "delta_b_T_per_sqrtHz = " << format_g(delta_b_T_per_sqrtHz) << "\n";
  os << "fwhm_T = " << format_g(fwhm_T) << "\n";
  os << "contrast = " << format_g(contrast) << "\n";
  os << "photon_rate_per_s = " << format_g(photon_rate_per_s) << "\n";
  os << "prefactor = " << format_g(prefactor) << "\n";
  if (reference_delta_b) {
    os << "reference_delta_b_T_per_sqrtHz = " << format_g(*reference_delta_b)
       << "\n";
    os << "implied_prefactor = " << format_g(implied_prefactor()) << "\n";
  }
  for (const auto& [key, note] : provenance)
    os << "provenance." << key << " = " << note << "\n";
  return os.str();
}

SensitivityReport shot_noise_limit(double fwhm_T, double contrast,
                                   double photon_rate_per_s, double prefactor) {
  if (!(fwhm_T > 0.0)) throw config_error("fwhm must be > 0");
  if (!(contrast > 0.0 && contrast <= 1.0))
    throw config_error("contrast must lie in (0,1]");
  if (!(photon_rate_per_s > 0.0)) throw config_error("photon rate must be > 0");
  if (!(prefactor > 0.0)) throw config_error("prefactor must be > 0");

  SensitivityReport r;
  r.fwhm_T = fwhm_T;
  r.contrast = contrast;
  r.photon_rate_per_s = photon_rate_per_s;
  r.prefactor = prefactor;
  r.delta_b_T_per_sqrtHz =
      prefactor * fwhm_T / (contrast * std::sqrt(photon_rate_per_s));
  return r;
}

}  // namespace gslac
