#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Phase-sensitive detection chain: field modulation and sampling, software
// lock-in demodulation with a cascaded one-pole low-pass, slope calibration,
// averaged-periodogram noise spectra, band averages, and the photon-shot-
// noise sensitivity calculator.

namespace gslac {

struct ModulationParams {
  double amplitude_T = 1e-5;       // 0.01 mT
  double frequency_Hz = 15e3;
  double time_constant_s = 3e-3;
  double sample_rate_Hz = 300e3;   // >= 20x the modulation frequency
  int filter_order = 1;

  void validate() const;  // frequency < sample_rate/2, time_constant > 1/frequency
};

struct TimeSeries {
  double sample_rate_Hz = 0.0;
  double t0_s = 0.0;
  std::vector<double> values;
};

struct DemodOutput {
  TimeSeries x;
  TimeSeries y;
  ModulationParams mod;
  int decimation = 1;  // input samples per output sample
};

struct NoiseSpectrum {
  std::vector<double> frequencies_Hz;
  std::vector<double> asd;  // T/sqrt(Hz) once the input is calibrated
  std::string window_descriptor;
  int n_averages = 0;
};

struct SensitivityReport {
  double delta_b_T_per_sqrtHz = 0.0;
  double fwhm_T = 0.0;
  double contrast = 0.0;
  double photon_rate_per_s = 0.0;
  double prefactor = 1.0;
  // Optional externally quoted sensitivity to compare against; the implied
  // prefactor is reference / (delta_b / prefactor).
  std::optional<double> reference_delta_b;
  std::map<std::string, std::string> provenance;

  double implied_prefactor() const;
  std::string to_text() const;  // key = value lines
};

// Samples signal_of_field(bias + amplitude sin(2 pi f t) + field noise).
// Field noise is white Gaussian of the given one-sided amplitude spectral
// density, generated as a zero-order hold at noise_bandwidth_Hz so the
// excursions stay small compared with a lineshape while the spectrum is flat
// across the measurement band. Deterministic per seed.
TimeSeries modulate_and_sample(
    const std::function<double(double)>& signal_of_field, double bias_T,
    const ModulationParams& mod, double duration_s, double noise_asd_T = 0.0,
    double noise_bandwidth_Hz = 2e3, std::uint64_t seed = 0);

// Adds white Gaussian noise of the given one-sided ASD (in the units of the
// series, per sqrt(Hz)) to every sample.
TimeSeries add_white_noise(const TimeSeries& ts, double asd_per_sqrtHz,
                           std::uint64_t seed);

// Multiplies by the in-phase/quadrature references, applies the cascaded
// exponential low-pass, and decimates keeping >= 4 samples per time
// constant. For a small modulation the steady-state X(bias) approaches
// (amplitude/2) d(signal)/dB at the bias point.
DemodOutput demodulate(const TimeSeries& ts, const ModulationParams& mod,
                       double phase_deg = 0.0);

// Mean of the trailing fraction of the demodulated X output, trimmed to an
// integer number of residual-carrier cycles so reference feedthrough
// averages out. Used to read the settled lock-in output.
double steady_mean(const DemodOutput& demod, double trailing_fraction = 0.25);

// Cascaded one-pole exponential low-pass, y += (1-exp(-dt/tau)) (x - y).
std::vector<double> exponential_lowpass(const std::vector<double>& values,
                                        double sample_rate_Hz, double tau_s,
                                        int order);

struct SlopeCalibration {
  double slope_per_T = 0.0;   // demodulated signal per tesla
  double center_T = 0.0;      // zero crossing of the fitted line
  double stderr_slope = 0.0;
  // Linearity diagnostic over the checking window: rms residual of a line
  // fit as a fraction of the output range there.
  double check_rms_fraction = 0.0;
  bool linear_ok = false;
};

// Fits X vs bias over fit_window_T (full width, centered on the zero
// crossing) and evaluates the linearity check over check_window_T.
SlopeCalibration calibrate_slope(const std::vector<double>& bias_T,
                                 const std::vector<double>& x_out,
                                 double fit_window_T, double check_window_T);

// Averaged-periodogram one-sided amplitude spectral density. Windows:
// "hann" (default) or "rect"; segments overlap by overlap_fraction and are
// mean-subtracted.
NoiseSpectrum noise_spectrum(const TimeSeries& ts, std::size_t segment_length,
                             double overlap_fraction = 0.5,
                             const std::string& window = "hann");

double band_average(const NoiseSpectrum& spec, double f_lo_Hz, double f_hi_Hz);

// Divides the ASD by the demodulator's low-pass magnitude response so a flat
// input spectrum reads flat after the lock-in chain.
NoiseSpectrum equalize_demod_response(const NoiseSpectrum& spec,
                                      const ModulationParams& mod);

// P lambda / (h c).
double photon_rate(double power_W, double wavelength_m);

// delta_B = prefactor * fwhm / (contrast * sqrt(photon_rate)), the photon-
// shot-noise sensitivity with the linewidth expressed as a field width.
SensitivityReport shot_noise_limit(double fwhm_T, double contrast,
                                   double photon_rate_per_s,
                                   double prefactor = 1.0);

}  // namespace gslac
