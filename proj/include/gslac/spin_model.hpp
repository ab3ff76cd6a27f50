#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "gslac/constants.hpp"

// NV ground-state spin Hamiltonian: construction, diagonalization, and the
// level anti-crossing diagnostics built on top of it. Basis ordering is
// m_s = +1, 0, -1 (and m_I = +1, 0, -1 within each electron block when the
// electron-nucleus model is enabled). Energies are frequencies in Hz.

namespace gslac {

struct HyperfineParams {
  double a_parallel_Hz = 0.0;
  double a_perpendicular_Hz = 0.0;
  double quadrupole_p_Hz = 0.0;
};

struct SpinSystemParams {
  double d_Hz = kDefaultZeroFieldSplitting_Hz;
  double gamma_Hz_per_T = kDefaultGyromagnetic_Hz_per_T;
  // Enables the 9x9 electron (x) nitrogen-nucleus model. No defaults: the
  // caller must supply explicit coupling constants.
  std::optional<HyperfineParams> hyperfine;

  int dimension() const { return hyperfine ? 9 : 3; }
  void validate() const;  // d > 0, gamma > 0
};

// Applied field in the NV frame: z along the NV axis, polar angle theta,
// azimuth phi. Interfaces use degrees.
struct FieldVector {
  double magnitude_T = 0.0;
  double theta_deg = 0.0;
  double phi_deg = 0.0;

  // Experiment angles: beta tilts the field away from the NV axis about y,
  // alpha rotates about z. Equivalent to theta = |beta| with the azimuth set
  // by alpha and the sign of beta.
  static FieldVector from_experiment_angles(double magnitude_T,
                                            double alpha_deg, double beta_deg);

  double parallel_T() const;    // magnitude * cos(theta)
  double transverse_T() const;  // magnitude * sin(theta)
  Eigen::Vector3d cartesian_T() const;
  void validate() const;  // magnitude >= 0, theta in [0,180), phi in [0,360)
};

struct LevelSet {
  FieldVector field;
  Eigen::VectorXd energies_Hz;  // ascending
  Eigen::MatrixXcd states;      // orthonormal eigenvectors, one per column
};

// Spin-1 operator matrices in the m = +1, 0, -1 basis.
Eigen::Matrix3cd spin1_sx();
Eigen::Matrix3cd spin1_sy();
Eigen::Matrix3cd spin1_sz();

// H/h = D Sz^2 + (gamma/2pi) B.S, extended with hyperfine and quadrupole
// terms when enabled. Hermitian, dimension 3 or 9, in Hz.
Eigen::MatrixXcd build_hamiltonian(const SpinSystemParams& params,
                                   const FieldVector& field);

// Real ascending eigenvalues and orthonormal eigenvectors. Near-degenerate
// pairs are ordered by ascending <Sz> so level tracking across field sweeps
// is deterministic. Rejects non-Hermitian input.
LevelSet eigensystem(const Eigen::MatrixXcd& h);
LevelSet eigensystem(const SpinSystemParams& params, const FieldVector& field);

struct GslacResult {
  double b_center_T = 0.0;  // field magnitude minimizing the two-level gap
  double min_gap_Hz = 0.0;
};

// Locates the field magnitude that minimizes the gap between the two lowest
// levels, holding the transverse field component fixed. Bracketed golden
// section to better than 1 uT; throws no_crossing_error when the range does
// not contain an interior minimum.
GslacResult find_gslac(const SpinSystemParams& params, double transverse_T,
                       double b_lo_T, double b_hi_T);

// 1 - max_k |<m_s=0|psi_k>|^2: zero when some eigenstate is purely m_s = 0.
double spin_mixing(const SpinSystemParams& params, const FieldVector& field);

// B sin(beta): the transverse field produced by a misalignment angle.
double transverse_component(double b_T, double beta_deg);

}  // namespace gslac
