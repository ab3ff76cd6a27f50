#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "gslac/errors.hpp"
#include "gslac/inference.hpp"
#include "gslac/rng.hpp"
#include "gslac/scan_engine.hpp"

using namespace gslac;

namespace {

std::pair<std::vector<double>, std::vector<double>> make_lorentzian(
    double center, double fwhm, double amplitude, double baseline,
    double half_span, int n) {
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = center - half_span + 2.0 * half_span * i / (n - 1);
    const double u = 2.0 * (x[i] - center) / fwhm;
    y[i] = baseline + amplitude / (1.0 + u * u);
  }
  return {x, y};
}

}  // namespace

TEST_CASE("noise-free Lorentzian round trip recovers the parameters") {
  auto [x, y] = make_lorentzian(102.4e-3, 0.46e-3, -0.03, 1.0, 3e-3, 401);
  const FitResult fit = fit_lorentzian(x, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params.center_T - 102.4e-3) < 1e-6 * 102.4e-3);
  CHECK(std::abs(fit.params.fwhm_T - 0.46e-3) < 1e-6 * 0.46e-3);
  CHECK(std::abs(fit.params.amplitude + 0.03) < 1e-6 * 0.03);
  CHECK(std::abs(fit.params.baseline - 1.0) < 1e-6);
  CHECK(fit.residual_rms < 1e-8);
}

TEST_CASE("noisy fits recover center and width (Monte Carlo)") {
  int pass = 0;
  for (int seed = 0; seed < 100; ++seed) {
    auto [x, y] = make_lorentzian(102.4e-3, 0.46e-3, -0.03, 1.0, 3e-3, 201);
    GaussianDeviate g(seed + 1);
    for (double& v : y) v *= 1.0 + 1e-4 * g();
    const FitResult fit = fit_lorentzian(x, y);
    const bool ok = std::abs(fit.params.center_T - 102.4e-3) < 1e-6 &&
                    std::abs(fit.params.fwhm_T - 0.46e-3) < 0.02 * 0.46e-3;
    if (ok) ++pass;
  }
  CHECK(pass >= 95);
}

TEST_CASE("a flat trace raises no_feature_error") {
  std::vector<double> x(64), y(64, 1.0);
  for (int i = 0; i < 64; ++i) x[i] = i;
  CHECK_THROWS_AS(fit_lorentzian(x, y), no_feature_error);
}

TEST_CASE("too few points are rejected") {
  std::vector<double> x{0, 1, 2, 3}, y{0, 1, 0.5, 0.2};
  CHECK_THROWS_AS(fit_lorentzian(x, y), numeric_error);
}

TEST_CASE("parameter errors shrink with the noise level") {
  auto run = [&](double noise, int seed) {
    auto [x, y] = make_lorentzian(0.1, 1e-3, -0.05, 1.0, 6e-3, 201);
    GaussianDeviate g(seed);
    for (double& v : y) v += noise * g();
    const FitResult fit = fit_lorentzian(x, y);
    return std::abs(fit.params.center_T - 0.1);
  };
  std::vector<double> lo, hi;
  for (int s = 0; s < 60; ++s) {
    lo.push_back(run(1e-5, 1000 + s));
    hi.push_back(run(1e-3, 2000 + s));
  }
  std::nth_element(lo.begin(), lo.begin() + 30, lo.end());
  std::nth_element(hi.begin(), hi.begin() + 30, hi.end());
  CHECK(lo[30] < hi[30]);
}

TEST_CASE("stderr fields are populated and non-negative") {
  auto [x, y] = make_lorentzian(0.1, 1e-3, -0.05, 1.0, 6e-3, 201);
  GaussianDeviate g(42);
  for (double& v : y) v += 1e-4 * g();
  const FitResult fit = fit_lorentzian(x, y);
  REQUIRE(fit.param_stderr.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(fit.param_stderr(k) >= 0.0);
  // The center uncertainty should be of the right scale (sub-uT here).
  CHECK(fit.param_stderr(0) < 1e-5);
  CHECK(fit.param_stderr(0) > 1e-10);
}

TEST_CASE("line fit is exact on y = 2x + 1") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i + 1.0);
  }
  const LinearFit fit = fit_line(x, y);
  CHECK(fit.slope == 2.0);
  CHECK(fit.intercept == 1.0);
  CHECK(fit.stderr_slope == doctest::Approx(0.0));
}

TEST_CASE("line fit is invariant under point permutation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> x(40), y(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
  }
  const LinearFit a = fit_line(x, y);
  std::vector<std::size_t> idx(40);
  for (std::size_t i = 0; i < 40; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<double> xp, yp;
  for (const std::size_t i : idx) {
    xp.push_back(x[i]);
    yp.push_back(y[i]);
  }
  const LinearFit b = fit_line(xp, yp);
  CHECK(std::abs(a.slope - b.slope) < 1e-12 * std::max(1.0, std::abs(a.slope)));
  CHECK(std::abs(a.intercept - b.intercept) < 1e-12);
}

TEST_CASE("line fit matches an SVD least-squares oracle") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const int n = 50;
  std::vector<double> x(n), y(n);
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    x[i] = u(rng);
    y[i] = 0.7 * x[i] - 2.1 + 0.3 * u(rng);
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d sol =
      a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
  const LinearFit fit = fit_line(x, y);
  CHECK(std::abs(fit.slope - sol(0)) < 1e-10);
  CHECK(std::abs(fit.intercept - sol(1)) < 1e-10);
}

TEST_CASE("saturation fit recovers exact parameters") {
  const std::vector<double> p{50, 100, 200, 400, 800};
  std::vector<double> c;
  for (const double pw : p) c.push_back(0.15 * pw / (pw + 150.0));
  const SaturationFit fit = fit_saturation(p, c);
  CHECK(fit.converged);
  CHECK(fit.identifiable);
  CHECK(std::abs(fit.c_max - 0.15) < 1e-8);
  CHECK(std::abs(fit.p_sat_mW - 150.0) < 1e-4);
}

TEST_CASE("scaling the contrasts scales c_max and keeps p_sat") {
  const std::vector<double> p{50, 100, 200, 400, 800};
  std::vector<double> c1, c2;
  for (const double pw : p) {
    c1.push_back(0.15 * pw / (pw + 150.0));
    c2.push_back(2.0 * c1.back());
  }
  const SaturationFit a = fit_saturation(p, c1);
  const SaturationFit b = fit_saturation(p, c2);
  CHECK(b.c_max == doctest::Approx(2.0 * a.c_max).epsilon(1e-9));
  CHECK(b.p_sat_mW == doctest::Approx(a.p_sat_mW).epsilon(1e-9));
}

TEST_CASE("saturation fit under 1% noise (Monte Carlo)") {
  const std::vector<double> p{50, 100, 200, 400, 800};
  int pass = 0;
  for (int seed = 0; seed < 100; ++seed) {
    GaussianDeviate g(seed + 31);
    std::vector<double> c;
    for (const double pw : p)
      c.push_back(0.15 * pw / (pw + 150.0) * (1.0 + 0.01 * g()));
    const SaturationFit fit = fit_saturation(p, c);
    if (std::abs(fit.c_max - 0.15) < 0.05 * 0.15) ++pass;
  }
  CHECK(pass >= 95);
}

TEST_CASE("powers far below saturation are flagged non-identifiable") {
  const std::vector<double> p{1.0, 2.0, 3.0};
  std::vector<double> c;
  for (const double pw : p) c.push_back(0.15 * pw / (pw + 150.0));
  const SaturationFit fit = fit_saturation(p, c);
  CHECK_FALSE(fit.identifiable);
}

namespace {

std::vector<std::pair<double, FitResult>> synthetic_angle_fits(
    const AngleModelParams& params, int n, double span, double noise,
    std::uint64_t seed) {
  GaussianDeviate g(seed);
  std::vector<std::pair<double, FitResult>> fits;
  for (int i = 0; i < n; ++i) {
    const double beta = -span + 2.0 * span * i / (n - 1);
    const AngleResponse r = angle_response(beta, params);
    FitResult fr;
    fr.params.center_T = 102.4e-3;
    fr.params.fwhm_T = r.fwhm_T;
    fr.params.baseline = 1.0;
    fr.params.amplitude = -r.contrast * (1.0 + (noise > 0 ? noise * g() : 0.0));
    fr.converged = true;
    fits.emplace_back(beta, fr);
  }
  return fits;
}

}  // namespace

TEST_CASE("angle summary round trip is exact on noise-free data") {
  const AngleModelParams params{};
  const auto fits = synthetic_angle_fits(params, 41, 0.2, 0.0, 0);
  const AngleDependenceSummary s = extract_angle_dependence(fits);
  CHECK(std::abs(s.fwhm_min_T - 0.46e-3) < 1e-6 * 0.46e-3);
  CHECK(std::abs(s.contrast_dip_fwhm_deg - 0.054) < 1e-6 * 0.054);
  CHECK(std::abs(s.dip_depth - 0.35) < 1e-6);
  CHECK(std::abs(s.linewidth_slope_T_per_deg - 6e-3) < 1e-5 * 6e-3);
  CHECK(std::abs(s.c_far - 0.01) < 1e-7);
}

TEST_CASE("angle summary is mirror symmetric") {
  const AngleModelParams params{};
  auto fits = synthetic_angle_fits(params, 41, 0.2, 0.0, 0);
  auto mirrored = fits;
  for (auto& [beta, fr] : mirrored) beta = -beta;
  const AngleDependenceSummary a = extract_angle_dependence(fits);
  const AngleDependenceSummary b = extract_angle_dependence(mirrored);
  CHECK(a.fwhm_min_T == doctest::Approx(b.fwhm_min_T).epsilon(1e-12));
  CHECK(a.contrast_dip_fwhm_deg ==
        doctest::Approx(b.contrast_dip_fwhm_deg).epsilon(1e-12));
}

TEST_CASE("angle summary under 2% contrast noise (Monte Carlo)") {
  const AngleModelParams params{};
  int pass = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto fits = synthetic_angle_fits(params, 41, 0.2, 0.02, 100 + seed);
    const AngleDependenceSummary s = extract_angle_dependence(fits);
    if (std::abs(s.contrast_dip_fwhm_deg - 0.054) < 0.15 * 0.054) ++pass;
  }
  CHECK(pass >= 95);
}

TEST_CASE("angle summary preconditions") {
  const AngleModelParams params{};
  CHECK_THROWS_AS(
      extract_angle_dependence(synthetic_angle_fits(params, 5, 0.2, 0.0, 0)),
      numeric_error);
  CHECK_THROWS_AS(
      extract_angle_dependence(synthetic_angle_fits(params, 41, 0.05, 0.0, 0)),
      numeric_error);
}
