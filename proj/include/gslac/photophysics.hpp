#pragma once

// Steady-state optical photophysics: a five-level rate model (two ground,
// two excited, one metastable singlet) in which the spin-mixing fraction
// routes excitation between the low-ISC and high-ISC branches. Observables
// derived from the populations: relative PL, single-pass singlet absorbance,
// and on-resonance cavity transmission.

namespace gslac {

struct RateModel {
  double pump_rate_per_mW = 1e5;     // green excitation rate scale, s^-1/mW
  double radiative_rate = 6.6e7;     // excited -> ground, s^-1
  double isc_rate_ms0 = 5e6;         // excited m_s=0-like -> singlet, s^-1
  double isc_rate_ms1 = 5e7;         // excited m_s=+-1-like -> singlet, s^-1
  double singlet_decay_rate = 5e6;   // singlet -> ground m_s=0, s^-1
  double absorption_scale = 0.5;     // singlet population -> absorbance

  // Rates are order-of-magnitude placeholders, not a calibrated NV model;
  // consumers rely on ratios and monotonic trends only.
  void validate() const;  // all >= 0, isc_rate_ms1 > isc_rate_ms0
};

struct Populations {
  double ground_ms0 = 0.0;
  double ground_ms1 = 0.0;
  double excited_ms0 = 0.0;
  double excited_ms1 = 0.0;
  double singlet = 0.0;

  double sum() const {
    return ground_ms0 + ground_ms1 + excited_ms0 + excited_ms1 + singlet;
  }
};

struct CavitySpec {
  double r_back = 0.985;      // power reflectivity of the coated diamond face
  double r_front = 0.985;     // power reflectivity of the spherical mirror
  double passive_loss = 0.0;  // single-pass fractional loss, NV absorption excluded

  void validate() const;
};

// Solves the linear steady-state balance. mixing in [0,1] splits each
// excitation event between the two branches (m/2 crosses over). With no pump
// the model relaxes to equal ground-state populations.
Populations steady_state(const RateModel& model, double pump_mW, double mixing);

// radiative_rate * (excited_ms0 + excited_ms1); callers normalize to the
// mixing = 0 value when they want a relative PL signal.
double pl_rate(const Populations& pop, const RateModel& model);

// absorption_scale * singlet.
double singlet_absorbance(const Populations& pop, const RateModel& model);

// On-resonance two-mirror transmission with an intracavity absorber:
// T = T1 T2 a / (1 - r1 r2 a)^2, a = (1 - passive_loss) exp(-absorbance).
double cavity_transmission(const CavitySpec& cavity, double absorbance);

// C_max * pump / (pump + P_sat).
double contrast_saturation(double pump_mW, double c_max, double p_sat_mW);

// B0 + shift_coeff * pump: linear pump-induced displacement of a feature
// center. The coefficient is user-supplied.
double thermal_center_shift(double pump_mW, double shift_coeff_T_per_mW,
                            double b0_T);

}  // namespace gslac
