#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gslac/errors.hpp"
#include "gslac/photophysics.hpp"
#include "oracles.hpp"

using namespace gslac;

TEST_CASE("no pump leaves everything in the ground states") {
  const Populations p = steady_state(RateModel{}, 0.0, 0.3);
  CHECK(p.singlet == 0.0);
  CHECK(p.excited_ms0 == 0.0);
  CHECK(p.excited_ms1 == 0.0);
  CHECK(p.ground_ms0 + p.ground_ms1 == doctest::Approx(1.0));
}

TEST_CASE("populations are conserved and non-negative (randomized)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> upump(0.0, 1e4), umix(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Populations p = steady_state(RateModel{}, upump(rng), umix(rng));
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
    CHECK(p.ground_ms0 >= 0.0);
    CHECK(p.ground_ms1 >= 0.0);
    CHECK(p.excited_ms0 >= 0.0);
    CHECK(p.excited_ms1 >= 0.0);
    CHECK(p.singlet >= 0.0);
  }
}

TEST_CASE("steady state matches explicit time integration") {
  const RateModel model{};
  for (const double mixing : {0.0, 0.3, 1.0}) {
    const Populations ss = steady_state(model, 100.0, mixing);
    const Populations ode = oracle::integrate_rate_model(model, 100.0, mixing);
    CHECK(std::abs(ss.ground_ms0 - ode.ground_ms0) < 1e-6);
    CHECK(std::abs(ss.ground_ms1 - ode.ground_ms1) < 1e-6);
    CHECK(std::abs(ss.excited_ms0 - ode.excited_ms0) < 1e-6);
    CHECK(std::abs(ss.excited_ms1 - ode.excited_ms1) < 1e-6);
    CHECK(std::abs(ss.singlet - ode.singlet) < 1e-6);
  }
}

TEST_CASE("mixing raises the singlet population and lowers PL") {
  const RateModel model{};
  const Populations p0 = steady_state(model, 100.0, 0.0);
  const Populations p3 = steady_state(model, 100.0, 0.3);
  CHECK(p3.singlet > p0.singlet);
  CHECK(pl_rate(p3, model) < pl_rate(p0, model));
}

TEST_CASE("PL vanishes without excited population") {
  Populations p;
  p.ground_ms0 = 0.7;
  p.ground_ms1 = 0.3;
  CHECK(pl_rate(p, RateModel{}) == 0.0);
}

TEST_CASE("PL at zero mixing bounds PL at full mixing") {
  const RateModel model{};
  const Populations a = steady_state(model, 250.0, 0.0);
  const Populations b = steady_state(model, 250.0, 1.0);
  CHECK(pl_rate(a, model) >= pl_rate(b, model));
}

TEST_CASE("PL increases strictly with pump power") {
  const RateModel model{};
  double prev = pl_rate(steady_state(model, 0.0, 0.2), model);
  CHECK(prev == 0.0);
  for (int i = 1; i <= 20; ++i) {
    const double pump = 50.0 * i;
    const double pl = pl_rate(steady_state(model, pump, 0.2), model);
    CHECK(pl > prev);
    prev = pl;
  }
}

TEST_CASE("singlet population is non-decreasing in mixing (grid)") {
  const RateModel model{};
  for (const double pump : {10.0, 100.0, 1000.0}) {
    double prev = -1.0;
    for (int k = 0; k <= 20; ++k) {
      const double s = steady_state(model, pump, k / 20.0).singlet;
      CHECK(s >= prev - 1e-12);
      prev = s;
    }
  }
}

TEST_CASE("singlet absorbance is a linear map of the singlet population") {
  RateModel model{};
  Populations p;
  CHECK(singlet_absorbance(p, model) == 0.0);
  p.singlet = 0.2;
  const double a1 = singlet_absorbance(p, model);
  model.absorption_scale *= 2.0;
  CHECK(singlet_absorbance(p, model) == doctest::Approx(2.0 * a1));
  Populations q = p;
  q.singlet = 0.4;
  model.absorption_scale /= 2.0;
  CHECK(singlet_absorbance(q, model) > singlet_absorbance(p, model));
}

TEST_CASE("matched lossless cavity transmits fully on resonance") {
  CavitySpec cavity;
  cavity.r_back = 0.985;
  cavity.r_front = 0.985;
  cavity.passive_loss = 0.0;
  CHECK(std::abs(cavity_transmission(cavity, 0.0) - 1.0) < 1e-9);
}

TEST_CASE("an opaque absorber kills the transmission") {
  CHECK(cavity_transmission(CavitySpec{}, 20.0) < 1e-6);
}

TEST_CASE("transmission decreases strictly with absorbance") {
  const CavitySpec cavity{};
  double prev = 2.0;
  for (int i = 0; i < 50; ++i) {
    const double t = cavity_transmission(cavity, 0.004 * i);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("transmission stays in [0,1] and matches the closed form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ur(0.5, 0.999), ul(0.0, 0.2),
      ua(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    CavitySpec c;
    c.r_back = ur(rng);
    c.r_front = ur(rng);
    c.passive_loss = ul(rng);
    const double absorbance = ua(rng);
    const double t = cavity_transmission(c, absorbance);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    const double a = (1.0 - c.passive_loss) * std::exp(-absorbance);
    const double expect = (1.0 - c.r_back) * (1.0 - c.r_front) * a /
                          std::pow(1.0 - std::sqrt(c.r_back * c.r_front) * a, 2);
    CHECK(std::abs(t - expect) < 1e-12);
  }
}

TEST_CASE("contrast saturation examples") {
  CHECK(contrast_saturation(0.0, 0.15, 150.0) == 0.0);
  CHECK(contrast_saturation(150.0, 0.15, 150.0) == doctest::Approx(0.075));
  const double near_limit = contrast_saturation(150.0 * 1e7, 0.15, 150.0);
  CHECK(std::abs(near_limit - 0.15) < 0.15 * 2e-7);
}

TEST_CASE("contrast saturation is concave and bounded") {
  std::vector<double> c;
  for (int i = 0; i <= 100; ++i) c.push_back(contrast_saturation(10.0 * i, 0.15, 150.0));
  for (std::size_t i = 1; i + 1 < c.size(); ++i) {
    CHECK(c[i + 1] - 2.0 * c[i] + c[i - 1] <= 1e-12);
    CHECK(c[i] <= 0.15);
  }
}

TEST_CASE("thermal shift is linear in pump power") {
  CHECK(thermal_center_shift(123.0, 0.0, 0.1024) == 0.1024);
  const double b0 = 0.1024, k = 2e-7;
  const double s1 = thermal_center_shift(100.0, k, b0) - b0;
  const double s2 = thermal_center_shift(200.0, k, b0) - b0;
  CHECK(s2 == doctest::Approx(2.0 * s1));
  CHECK(thermal_center_shift(100.0, -k, b0) < b0);
}

TEST_CASE("degenerate rate configurations are rejected") {
  RateModel dead{};
  dead.radiative_rate = 0.0;
  dead.isc_rate_ms0 = 0.0;
  dead.isc_rate_ms1 = 0.0;
  CHECK_THROWS_AS(steady_state(dead, 10.0, 0.0), std::runtime_error);

  RateModel inverted{};
  inverted.isc_rate_ms1 = inverted.isc_rate_ms0;
  CHECK_THROWS_AS(steady_state(inverted, 10.0, 0.0), config_error);

  CHECK_THROWS_AS(steady_state(RateModel{}, -1.0, 0.0), config_error);
  CHECK_THROWS_AS(steady_state(RateModel{}, 1.0, 1.5), config_error);
}
