#pragma once

#include <numbers>

// Shared physical constants and model defaults. SI units throughout;
// spin energies are quoted as frequencies (H/h, in Hz).

namespace gslac {

inline constexpr double kPlanck_J_s = 6.62607015e-34;
inline constexpr double kSpeedOfLight_m_per_s = 299792458.0;

// NV ground-state defaults. The zero-field splitting is pinned by the
// crossing field through B = D / (gamma/2pi).
inline constexpr double kDefaultZeroFieldSplitting_Hz = 2.87e9;
inline constexpr double kDefaultGyromagnetic_Hz_per_T = 28.024e9;

// Electromagnet calibration: field produced per ampere of coil current.
inline constexpr double kCoilField_T_per_A = 2.9e-3;

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace gslac
