#include "gslac/photophysics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gslac/errors.hpp"

namespace gslac {

void RateModel::validate() const {
  if (pump_rate_per_mW < 0 || radiative_rate < 0 || isc_rate_ms0 < 0 ||
      isc_rate_ms1 < 0 || singlet_decay_rate < 0 || absorption_scale < 0)
    throw config_error("rate model entries must be >= 0");
  if (!(isc_rate_ms1 > isc_rate_ms0))
    throw config_error("isc_rate_ms1 must exceed isc_rate_ms0");
}

void CavitySpec::validate() const {
  if (!(r_back > 0.0 && r_back < 1.0) || !(r_front > 0.0 && r_front < 1.0))
    throw config_error("mirror reflectivities must lie in (0,1)");
  if (!(passive_loss >= 0.0 && passive_loss < 1.0))
    throw config_error("passive loss must lie in [0,1)");
}

Populations steady_state(const RateModel& model, double pump_mW,
                         double mixing) {
  model.validate();
  if (!(pump_mW >= 0.0)) throw config_error("pump power must be >= 0");
  if (!(mixing >= 0.0 && mixing <= 1.0))
    throw config_error("mixing must lie in [0,1]");

  const double pump = model.pump_rate_per_mW * pump_mW;
  if (pump == 0.0) {
    // Dark equilibrium: the ground levels share the population equally.
    Populations p;
    p.ground_ms0 = 0.5;
    p.ground_ms1 = 0.5;
    return p;
  }
  if (model.radiative_rate + model.isc_rate_ms0 + model.isc_rate_ms1 <= 0.0)
    throw numeric_error("singular rate configuration: no decay path");

  // Levels: 0 g0, 1 g1, 2 e0, 3 e1, 4 singlet.
  enum { g0, g1, e0, e1, s };
  Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Zero();
  auto add = [&](int from, int to, double rate) {
    m(to, from) += rate;
    m(from, from) -= rate;
  };
  const double cross = 0.5 * mixing;
  add(g0, e0, pump * (1.0 - cross));
  add(g0, e1, pump * cross);
  add(g1, e1, pump * (1.0 - cross));
  add(g1, e0, pump * cross);
  add(e0, g0, model.radiative_rate);
  add(e1, g1, model.radiative_rate);
  add(e0, s, model.isc_rate_ms0);
  add(e1, s, model.isc_rate_ms1);
  add(s, g0, model.singlet_decay_rate);

  // Replace one balance row with the conservation equation.
  Eigen::Matrix<double, 5, 5> a = m;
  a.row(0).setOnes();
  Eigen::Matrix<double, 5, 1> rhs = Eigen::Matrix<double, 5, 1>::Zero();
  rhs(0) = 1.0;
  Eigen::Matrix<double, 5, 1> p = a.colPivHouseholderQr().solve(rhs);
  if (!p.allFinite())
    throw numeric_error("singular rate configuration");
  const double balance = (m * p).cwiseAbs().maxCoeff();
  if (balance > 1e-6 * std::max(pump, model.radiative_rate))
    throw numeric_error("steady-state solve did not balance");

  p = p.cwiseMax(0.0);
  p /= p.sum();
  Populations out;
  out.ground_ms0 = p(g0);
  out.ground_ms1 = p(g1);
  out.excited_ms0 = p(e0);
  out.excited_ms1 = p(e1);
  out.singlet = p(s);
  return out;
}

double pl_rate(const Populations& pop, const RateModel& model) {
  return model.radiative_rate * (pop.excited_ms0 + pop.excited_ms1);
}

double singlet_absorbance(const Populations& pop, const RateModel& model) {
  return model.absorption_scale * pop.singlet;
}

double cavity_transmission(const CavitySpec& cavity, double absorbance) {
  cavity.validate();
  if (!(absorbance >= 0.0)) throw config_error("absorbance must be >= 0");
  const double r1 = std::sqrt(cavity.r_back);
  const double r2 = std::sqrt(cavity.r_front);
  const double t1 = 1.0 - cavity.r_back;
  const double t2 = 1.0 - cavity.r_front;
  const double a = (1.0 - cavity.passive_loss) * std::exp(-absorbance);
  const double denom = 1.0 - r1 * r2 * a;
  return t1 * t2 * a / (denom * denom);
}

double contrast_saturation(double pump_mW, double c_max, double p_sat_mW) {
  if (!(pump_mW >= 0.0)) throw config_error("pump power must be >= 0");
  if (!(p_sat_mW > 0.0)) throw config_error("saturation power must be > 0");
  return c_max * pump_mW / (pump_mW + p_sat_mW);
}

double thermal_center_shift(double pump_mW, double shift_coeff_T_per_mW,
                            double b0_T) {
  return b0_T + shift_coeff_T_per_mW * pump_mW;
}

}  // namespace gslac
