#include "gslac/spin_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gslac/errors.hpp"

namespace gslac {

namespace {

using cd = std::complex<double>;

// kron(a, b) for two 3x3 blocks.
Eigen::MatrixXcd kron3(const Eigen::Matrix3cd& a, const Eigen::Matrix3cd& b) {
  Eigen::MatrixXcd out(9, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
  return out;
}

// <Sz> of one eigenvector, used to break ordering ties between degenerate
// levels. For the 9-dimensional model Sz acts on the electron factor only.
double sz_expectation(const Eigen::VectorXcd& v) {
  const Eigen::Index dim = v.size();
  double out = 0.0;
  if (dim == 3) {
    out = std::norm(v(0)) - std::norm(v(2));
  } else {
    for (int n = 0; n < 3; ++n)
      out += std::norm(v(0 + n)) - std::norm(v(6 + n));
  }
  return out;
}

}  // namespace

void SpinSystemParams::validate() const {
  if (!(d_Hz > 0.0)) throw config_error("zero-field splitting must be > 0");
  if (!(gamma_Hz_per_T > 0.0))
    throw config_error("gyromagnetic ratio must be > 0");
}

FieldVector FieldVector::from_experiment_angles(double magnitude_T,
                                                double alpha_deg,
                                                double beta_deg) {
  const double br = deg_to_rad(beta_deg);
  const double ar = deg_to_rad(alpha_deg);
  const double x = std::sin(br) * std::cos(ar);
  const double y = std::sin(br) * std::sin(ar);
  const double z = std::cos(br);
  FieldVector f;
  f.magnitude_T = magnitude_T;
  f.theta_deg = rad_to_deg(std::atan2(std::hypot(x, y), z));
  f.phi_deg = rad_to_deg(std::atan2(y, x));
  if (f.phi_deg < 0.0) f.phi_deg += 360.0;
  if (f.phi_deg >= 360.0) f.phi_deg -= 360.0;
  f.validate();
  return f;
}

double FieldVector::parallel_T() const {
  return magnitude_T * std::cos(deg_to_rad(theta_deg));
}

double FieldVector::transverse_T() const {
  return magnitude_T * std::sin(deg_to_rad(theta_deg));
}

Eigen::Vector3d FieldVector::cartesian_T() const {
  const double bt = transverse_T();
  const double pr = deg_to_rad(phi_deg);
  return {bt * std::cos(pr), bt * std::sin(pr), parallel_T()};
}

void FieldVector::validate() const {
  if (!(magnitude_T >= 0.0)) throw config_error("field magnitude must be >= 0");
  if (!(theta_deg >= 0.0 && theta_deg < 180.0))
    throw config_error("theta must lie in [0, 180) degrees");
  if (!(phi_deg >= 0.0 && phi_deg < 360.0))
    throw config_error("phi must lie in [0, 360) degrees");
}

Eigen::Matrix3cd spin1_sx() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 1) = s;
  m(1, 0) = s;
  m(1, 2) = s;
  m(2, 1) = s;
  return m;
}

Eigen::Matrix3cd spin1_sy() {
  const cd i{0.0, 1.0};
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 1) = -i * s;
  m(1, 0) = i * s;
  m(1, 2) = -i * s;
  m(2, 1) = i * s;
  return m;
}

Eigen::Matrix3cd spin1_sz() {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = 1.0;
  m(2, 2) = -1.0;
  return m;
}

Eigen::MatrixXcd build_hamiltonian(const SpinSystemParams& params,
                                   const FieldVector& field) {
  params.validate();
  field.validate();

  const Eigen::Matrix3cd sx = spin1_sx();
  const Eigen::Matrix3cd sy = spin1_sy();
  const Eigen::Matrix3cd sz = spin1_sz();
  const Eigen::Vector3d b = field.cartesian_T();

  Eigen::Matrix3cd h3 = params.d_Hz * (sz * sz) +
                        params.gamma_Hz_per_T * (b.x() * sx + b.y() * sy +
                                                 b.z() * sz);
  if (!params.hyperfine) return h3;

  const HyperfineParams& hf = *params.hyperfine;
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  // Nuclear spin-1 operators share the electron matrices.
  Eigen::MatrixXcd h9 = kron3(h3, id);
  h9 += hf.a_parallel_Hz * kron3(sz, sz);
  h9 += hf.a_perpendicular_Hz * (kron3(sx, sx) + kron3(sy, sy));
  h9 += hf.quadrupole_p_Hz *
        kron3(id, (sz * sz - (2.0 / 3.0) * id).eval());
  return h9;
}

LevelSet eigensystem(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw config_error("eigensystem requires a square matrix");

  const double scale = h.cwiseAbs().maxCoeff();
  const double herm_resid = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm_resid > 1e-9 * std::max(scale, 1e-300))
    throw numeric_error("matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw numeric_error("eigendecomposition failed");

  LevelSet out;
  out.energies_Hz = solver.eigenvalues();
  out.states = solver.eigenvectors();

  // Order ties (numerically degenerate neighbours) by ascending <Sz>.
  if (h.rows() == 3 || h.rows() == 9) {
    const Eigen::Index n = out.energies_Hz.size();
    const double espan = std::max({std::abs(out.energies_Hz(0)),
                                   std::abs(out.energies_Hz(n - 1)), 1.0});
    const double tie_tol = 1e-9 * espan;
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i + 1;
      while (j < n && out.energies_Hz(j) - out.energies_Hz(j - 1) <= tie_tol)
        ++j;
      if (j - i > 1) {
        std::vector<Eigen::Index> idx(j - i);
        std::iota(idx.begin(), idx.end(), i);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](Eigen::Index a, Eigen::Index b) {
                           return sz_expectation(out.states.col(a)) <
                                  sz_expectation(out.states.col(b));
                         });
        Eigen::VectorXd e = out.energies_Hz;
        Eigen::MatrixXcd v = out.states;
        for (Eigen::Index k = 0; k < j - i; ++k) {
          out.energies_Hz(i + k) = e(idx[k]);
          out.states.col(i + k) = v.col(idx[k]);
        }
      }
      i = j;
    }
  }
  return out;
}

LevelSet eigensystem(const SpinSystemParams& params, const FieldVector& field) {
  LevelSet out = eigensystem(build_hamiltonian(params, field));
  out.field = field;
  return out;
}

GslacResult find_gslac(const SpinSystemParams& params, double transverse_T,
                       double b_lo_T, double b_hi_T) {
  params.validate();
  if (!(transverse_T >= 0.0)) throw config_error("transverse field must be >= 0");
  if (!(b_hi_T > b_lo_T)) throw config_error("field range must have b_hi > b_lo");
  if (b_hi_T <= transverse_T)
    throw config_error("field range lies below the transverse component");
  const double lo = std::max(b_lo_T, transverse_T);

  auto gap = [&](double b) {
    const double bz = std::sqrt(std::max(0.0, b * b - transverse_T * transverse_T));
    FieldVector f;
    f.magnitude_T = b;
    f.theta_deg = rad_to_deg(std::atan2(transverse_T, bz));
    const LevelSet ls = eigensystem(params, f);
    return ls.energies_Hz(1) - ls.energies_Hz(0);
  };

  // Coarse bracket, then golden section inside the winning cell pair.
  constexpr int kGrid = 65;
  double best_b = lo;
  double best_gap = 0.0;
  int best_k = 0;
  std::vector<double> bs(kGrid), gs(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    bs[k] = lo + (b_hi_T - lo) * k / (kGrid - 1);
    gs[k] = gap(bs[k]);
    if (k == 0 || gs[k] < best_gap) {
      best_gap = gs[k];
      best_b = bs[k];
      best_k = k;
    }
  }
  if (best_k == 0 || best_k == kGrid - 1)
    throw no_crossing_error("gap has no interior minimum in the field range");

  constexpr double kInvPhi = 0.6180339887498949;
  double a = bs[best_k - 1];
  double b = bs[best_k + 1];
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = gap(x1);
  double f2 = gap(x2);
  // Far tighter than the 1 uT contract: at an exact crossing the reported
  // gap scales as gamma times the interval width.
  constexpr double kTolT = 5e-9;
  while (b - a > kTolT) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = gap(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = gap(x2);
    }
  }
  best_b = 0.5 * (a + b);
  best_gap = gap(best_b);
  return {best_b, std::max(0.0, best_gap)};
}

double spin_mixing(const SpinSystemParams& params, const FieldVector& field) {
  const LevelSet ls = eigensystem(params, field);
  const Eigen::Index dim = ls.energies_Hz.size();
  double best = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    double proj = 0.0;
    if (dim == 3) {
      proj = std::norm(ls.states(1, k));
    } else {
      for (int n = 0; n < 3; ++n) proj += std::norm(ls.states(3 + n, k));
    }
    best = std::max(best, proj);
  }
  return std::clamp(1.0 - best, 0.0, 1.0);
}

double transverse_component(double b_T, double beta_deg) {
  if (!(b_T >= 0.0)) throw config_error("field magnitude must be >= 0");
  return b_T * std::sin(deg_to_rad(beta_deg));
}

}  // namespace gslac
