#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gslac/errors.hpp"
#include "gslac/inference.hpp"
#include "gslac/preset_io.hpp"
#include "gslac/scan_engine.hpp"

using namespace gslac;

namespace {

SamplePreset gslac_only_preset(double fwhm = 0.46e-3, double contrast = 0.01) {
  SamplePreset p = builtin_preset("W4");
  p.background = {0.0, 0.02};
  p.features = {{102.4e-3, fwhm, contrast, Polarity::dip, FeatureLabel::gslac}};
  return p;
}

double signal_at(const ScanTrace& trace, double b) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.b_T.size(); ++i)
    if (std::abs(trace.b_T[i] - b) < std::abs(trace.b_T[best] - b)) best = i;
  return trace.signal[best];
}

}  // namespace

TEST_CASE("angle response at zero misalignment") {
  const AngleModelParams p{};
  const AngleResponse r = angle_response(0.0, p);
  CHECK(r.fwhm_T == doctest::Approx(0.46e-3).epsilon(1e-12));
  CHECK(r.contrast == doctest::Approx(0.65 * p.c_far).epsilon(1e-12));
}

TEST_CASE("angle response at half the dip width") {
  const AngleModelParams p{};
  const AngleResponse r = angle_response(0.054 / 2.0, p);
  CHECK(r.contrast == doctest::Approx(p.c_far * (1.0 - 0.35 / 2.0)).epsilon(1e-12));
}

TEST_CASE("angle response far from alignment") {
  const AngleModelParams p{};
  const AngleResponse r = angle_response(0.2, p);
  CHECK(std::abs(r.contrast - p.c_far) < 0.01 * p.c_far);
  CHECK(r.fwhm_T > p.fwhm_min_T);
}

TEST_CASE("linewidth never drops below its minimum and varies continuously") {
  const AngleModelParams p{};
  double prev = angle_response(-0.2, p).fwhm_T;
  for (int i = 1; i <= 400; ++i) {
    const double beta = -0.2 + 0.4 * i / 400.0;
    const double w = angle_response(beta, p).fwhm_T;
    CHECK(w >= p.fwhm_min_T - 1e-15);
    CHECK(std::abs(w - prev) <= p.linewidth_slope_T_per_deg * 0.001 + 1e-15);
    prev = w;
  }
}

TEST_CASE("figure of merit is symmetric with an off-axis maximum") {
  const AngleModelParams p{};
  CHECK(figure_of_merit(0.07, p) == doctest::Approx(figure_of_merit(-0.07, p)));
  CHECK(figure_of_merit(0.01, p) > figure_of_merit(0.0, p));
  CHECK(figure_of_merit(0.0, p) < figure_of_merit(0.002, p));
  CHECK(figure_of_merit(0.0, p) < figure_of_merit(-0.002, p));

  double best_beta = 0.0, best = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double beta = -0.2 + 0.4 * i / 4000.0;
    const double fom = figure_of_merit(beta, p);
    if (fom > best) {
      best = fom;
      best_beta = beta;
    }
  }
  CHECK(std::abs(best_beta) > 0.005);
  CHECK(std::abs(best_beta) < 0.03);
}

TEST_CASE("electromagnet arithmetic") {
  CHECK(field_from_current(1.0) == 2.9e-3);
  CHECK(field_from_current(0.0) == 0.0);
  CHECK(field_from_current(35.310344827586207) ==
        doctest::Approx(102.4e-3).epsilon(1e-12));

  CHECK(coil_power(0.0, 1.05) == 0.0);
  CHECK(coil_power(20.0, 1.05) == doctest::Approx(4.0 * coil_power(10.0, 1.05)));
  const double i_120mT = 0.120 / 2.9e-3;
  CHECK(std::abs(coil_power(i_120mT, 1.05) - 1800.0) < 18.0);
}

TEST_CASE("W4 trace shows the cataloged features") {
  const SamplePreset& w4 = builtin_preset("W4");
  ScanConfig cfg;
  cfg.b_start_T = 0.0;
  cfg.b_stop_T = 0.110;
  cfg.n_points = 5501;
  const ScanTrace trace = synthesize_scan(w4, cfg);

  for (std::size_t fi = 0; fi < w4.features.size(); ++fi) {
    SamplePreset without = w4;
    without.features.erase(without.features.begin() + fi);
    const ScanTrace ref = synthesize_scan(without, cfg);
    const Feature& f = w4.features[fi];
    const double ratio = signal_at(trace, f.center_T) / signal_at(ref, f.center_T);
    double expected = f.contrast;
    if (f.label == FeatureLabel::gslac)
      expected = angle_response(0.0, angle_model_for(w4, f)).contrast;
    CHECK(ratio < 1.0);
    CHECK(std::abs((1.0 - ratio) - expected) < 0.05 * expected + 1e-9);
  }
}

TEST_CASE("the 51.2 mT feature carries the pinned 0.05% contrast") {
  const SamplePreset& w4 = builtin_preset("W4");
  const Feature& f = w4.features.front();
  CHECK(f.center_T == 51.2e-3);
  CHECK(f.contrast == 0.0005);
  CHECK(f.label == FeatureLabel::eslac_candidate);
}

TEST_CASE("no features and a flat background give exactly 1") {
  SamplePreset p = gslac_only_preset();
  p.features.clear();
  ScanConfig cfg;
  cfg.b_start_T = 0.0;
  cfg.b_stop_T = 0.110;
  cfg.n_points = 101;
  const ScanTrace trace = synthesize_scan(p, cfg);
  for (const double v : trace.signal) CHECK(v == 1.0);
}

TEST_CASE("no features reproduces the normalized background") {
  SamplePreset p = gslac_only_preset();
  p.features.clear();
  p.background = {0.03, 0.02};
  ScanConfig cfg;
  cfg.b_start_T = 0.0;
  cfg.b_stop_T = 0.110;
  cfg.n_points = 221;
  const ScanTrace trace = synthesize_scan(p, cfg);
  auto bg = [&](double b) { return 1.0 - 0.03 * (1.0 - std::exp(-b / 0.02)); };
  for (std::size_t i = 0; i < trace.b_T.size(); ++i)
    CHECK(trace.signal[i] ==
          doctest::Approx(bg(trace.b_T[i]) / bg(0.08)).epsilon(1e-12));
}

TEST_CASE("normalization point sits at exactly 1") {
  const SamplePreset p = gslac_only_preset();
  ScanConfig cfg;
  cfg.b_start_T = 0.06;
  cfg.b_stop_T = 0.10;
  cfg.n_points = 5;  // grid hits 0.08
  const ScanTrace trace = synthesize_scan(p, cfg);
  CHECK(std::abs(trace.b_T[2] - 0.08) < 1e-12);
  CHECK(std::abs(trace.signal[2] - 1.0) < 1e-12);
}

TEST_CASE("synthesize/fit round trip recovers the injected feature") {
  const SamplePreset p = gslac_only_preset();
  ScanConfig cfg;
  cfg.b_start_T = 102.4e-3 - 3e-3;
  cfg.b_stop_T = 102.4e-3 + 3e-3;
  cfg.n_points = 601;
  const ScanTrace trace = synthesize_scan(p, cfg);
  const FitResult fit = fit_lorentzian(trace);
  const AngleResponse expect =
      angle_response(0.0, angle_model_for(p, p.features[0]));
  CHECK(std::abs(fit.params.center_T - 102.4e-3) < 1e-6 * 102.4e-3);
  CHECK(std::abs(fit.params.fwhm_T - expect.fwhm_T) < 1e-6 * expect.fwhm_T);
  const double contrast = -fit.params.amplitude / fit.params.baseline;
  CHECK(std::abs(contrast - expect.contrast) < 1e-6 * expect.contrast);
}

TEST_CASE("misalignment widens the synthesized central feature") {
  const SamplePreset p = gslac_only_preset();
  ScanConfig cfg;
  cfg.b_start_T = 102.4e-3 - 6e-3;
  cfg.b_stop_T = 102.4e-3 + 6e-3;
  cfg.n_points = 1201;
  cfg.beta_deg = 0.1;
  const FitResult fit = fit_lorentzian(synthesize_scan(p, cfg));
  const AngleResponse expect =
      angle_response(0.1, angle_model_for(p, p.features[0]));
  CHECK(std::abs(fit.params.fwhm_T - expect.fwhm_T) < 1e-5 * expect.fwhm_T);
}

TEST_CASE("pump power shifts the central feature through the thermal model") {
  SamplePreset p = gslac_only_preset();
  p.thermal_shift_T_per_mW = 2e-7;
  ScanConfig cfg;
  cfg.b_start_T = 102.4e-3 - 3e-3;
  cfg.b_stop_T = 102.4e-3 + 3e-3;
  cfg.n_points = 601;
  cfg.pump_mW = 500.0;
  const FitResult fit = fit_lorentzian(synthesize_scan(p, cfg));
  CHECK(fit.params.center_T ==
        doctest::Approx(102.4e-3 + 2e-7 * 500.0).epsilon(1e-9));
}

TEST_CASE("shot noise has the Poisson-limit relative deviation") {
  SamplePreset p = gslac_only_preset();
  p.features.clear();
  ScanConfig cfg;
  cfg.b_start_T = 0.0;
  cfg.b_stop_T = 0.110;
  cfg.n_points = 100000;
  const ScanTrace clean = synthesize_scan(p, cfg);
  const ScanTrace noisy = add_shot_noise(clean, 1e15, 1e-3, 7);
  double mean = 0.0;
  for (const double v : noisy.signal) mean += v;
  mean /= noisy.signal.size();
  double var = 0.0;
  for (const double v : noisy.signal) var += (v - mean) * (v - mean);
  var /= noisy.signal.size();
  const double rel_std = std::sqrt(var);
  CHECK(std::abs(rel_std - 1e-6) < 0.05e-6);
}

TEST_CASE("shot noise is deterministic per seed") {
  SamplePreset p = gslac_only_preset();
  ScanConfig cfg;
  cfg.b_start_T = 0.09;
  cfg.b_stop_T = 0.11;
  cfg.n_points = 2001;
  cfg.photon_rate_per_s = 1e12;
  cfg.seed = 42;
  const ScanTrace a = synthesize_scan(p, cfg);
  const ScanTrace b = synthesize_scan(p, cfg);
  REQUIRE(a.signal.size() == b.signal.size());
  for (std::size_t i = 0; i < a.signal.size(); ++i)
    CHECK(a.signal[i] == b.signal[i]);
  cfg.seed = 43;
  const ScanTrace c = synthesize_scan(p, cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.signal.size(); ++i)
    if (a.signal[i] != c.signal[i]) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("noise std scales with the inverse square root of dwell time") {
  SamplePreset p = gslac_only_preset();
  p.features.clear();
  ScanConfig cfg;
  cfg.b_start_T = 0.0;
  cfg.b_stop_T = 0.110;
  cfg.n_points = 60000;
  const ScanTrace clean = synthesize_scan(p, cfg);
  auto rel_std = [&](double dwell, std::uint64_t seed) {
    const ScanTrace noisy = add_shot_noise(clean, 1e9, dwell, seed);
    double mean = 0.0;
    for (const double v : noisy.signal) mean += v;
    mean /= noisy.signal.size();
    double var = 0.0;
    for (const double v : noisy.signal) var += (v - mean) * (v - mean);
    return std::sqrt(var / noisy.signal.size());
  };
  const double s1 = rel_std(1e-3, 1);
  const double s4 = rel_std(4e-3, 2);
  const double s16 = rel_std(16e-3, 3);
  CHECK(std::abs(s1 / s4 - 2.0) < 0.2);
  CHECK(std::abs(s4 / s16 - 2.0) < 0.2);
}

TEST_CASE("removing a feature only perturbs its neighborhood") {
  // Lorentzian tails put the cross-talk bound at contrast/(1 + (2*5)^2).
  const SamplePreset& w4 = builtin_preset("W4");
  SamplePreset without = w4;
  const Feature removed = without.features[1];  // 60 mT
  without.features.erase(without.features.begin() + 1);
  ScanConfig cfg;
  cfg.b_start_T = 0.0;
  cfg.b_stop_T = 0.110;
  cfg.n_points = 5501;
  const ScanTrace a = synthesize_scan(w4, cfg);
  const ScanTrace b = synthesize_scan(without, cfg);
  const double tail_bound = removed.contrast / 101.0 * 1.5;
  bool center_changed = false;
  for (std::size_t i = 0; i < a.b_T.size(); ++i) {
    const double d = std::abs(a.signal[i] - b.signal[i]);
    if (std::abs(a.b_T[i] - removed.center_T) > 5.0 * removed.fwhm_T)
      CHECK(d <= tail_bound);
    if (std::abs(a.b_T[i] - removed.center_T) < removed.fwhm_T &&
        d > 0.4 * removed.contrast)
      center_changed = true;
  }
  CHECK(center_changed);
}

TEST_CASE("built-in presets carry the sample table") {
  CHECK(builtin_preset_names() ==
        std::vector<std::string>{"W4", "B3A", "F11", "C7"});
  const SamplePreset& w4 = builtin_preset("W4");
  CHECK(w4.growth_type == "CVD");
  CHECK(w4.surface_cut == "(100)");
  CHECK(w4.nitrogen_ppm == 1.0);
  CHECK(w4.irradiation_dose_cm2 == 1e18);
  CHECK(w4.irradiation_energy_MeV == 10.0);
  CHECK(w4.annealing_note == "720 C, 2 h");
  const SamplePreset& b3a = builtin_preset("B3A");
  CHECK(b3a.growth_type == "HPHT");
  CHECK(b3a.surface_cut == "(111)");
  CHECK(b3a.irradiation_dose_cm2 == 2e19);
  CHECK(b3a.detection_mode == DetectionMode::absorption);
  const SamplePreset& c7 = builtin_preset("C7");
  CHECK(c7.annealing_note == "750 C, 3 h");
  CHECK(builtin_preset("F11").nitrogen_ppm == 200.0);
  CHECK_THROWS_AS(builtin_preset("Z9"), config_error);
}

TEST_CASE("presets round-trip through JSON unchanged") {
  for (const SamplePreset& p : builtin_presets()) {
    const SamplePreset q = preset_from_json(preset_to_json(p));
    CHECK(preset_to_json(q).dump() == preset_to_json(p).dump());
  }
}

TEST_CASE("unknown preset keys are rejected") {
  nlohmann::json j = preset_to_json(builtin_preset("W4"));
  j["typo_key"] = 1.0;
  CHECK_THROWS_AS(preset_from_json(j), config_error);
  nlohmann::json j2 = preset_to_json(builtin_preset("W4"));
  j2["features"][0]["contrst"] = 0.1;
  CHECK_THROWS_AS(preset_from_json(j2), config_error);
}

TEST_CASE("invalid scan configurations are rejected") {
  const SamplePreset p = gslac_only_preset();
  ScanConfig cfg;
  cfg.b_start_T = 0.1;
  cfg.b_stop_T = 0.05;
  CHECK_THROWS_AS(synthesize_scan(p, cfg), config_error);
  cfg.b_stop_T = 0.11;
  cfg.n_points = 1;
  CHECK_THROWS_AS(synthesize_scan(p, cfg), config_error);

  SamplePreset dup = p;
  dup.features.push_back(dup.features[0]);
  ScanConfig ok;
  CHECK_THROWS_AS(synthesize_scan(dup, ok), config_error);
}
