// Command-line front end: field-level sweeps, scan synthesis, lineshape
// fits, the misalignment study, the lock-in magnetometer chain, and the
// bare shot-noise sensitivity calculator. Every run resolves its full
// configuration (defaults, then config file, then flags) and echoes it as a
// manifest.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gslac/constants.hpp"
#include "gslac/csv.hpp"
#include "gslac/errors.hpp"
#include "gslac/inference.hpp"
#include "gslac/lockin_dsp.hpp"
#include "gslac/preset_io.hpp"
#include "gslac/scan_engine.hpp"
#include "gslac/scenarios.hpp"
#include "gslac/spin_model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Binds config keys to CLI flags and storage so a run can be assembled from
// defaults, a strict JSON config file, and command-line overrides (flags
// win). The manifest is the full set of resolved values.
class CommandConfig {
 public:
  explicit CommandConfig(CLI::App* cmd) : cmd_(cmd) {
    cmd_->add_option("--config", config_path_,
                     "JSON config file; unknown keys are rejected");
  }

  template <typename T>
  CLI::Option* bind(const std::string& key, T* target, const std::string& help) {
    std::string flag = "--" + key;
    for (char& ch : flag)
      if (ch == '_') ch = '-';
    CLI::Option* opt = cmd_->add_option(flag, *target, help);
    entries_.push_back(Entry{
        key, opt,
        [target, key](const json& v) {
          try {
            *target = v.get<T>();
          } catch (const json::exception&) {
            throw gslac::config_error("config: bad value for '" + key + "'");
          }
        },
        [target]() { return json(*target); }});
    return opt;
  }

  // Apply the config file (if any) to every key whose flag was not set.
  void resolve() {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw gslac::io_error("cannot open config file: " + config_path_);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw gslac::config_error(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw gslac::config_error("config file: expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      Entry* entry = nullptr;
      for (Entry& e : entries_)
        if (e.key == it.key()) entry = &e;
      if (!entry)
        throw gslac::config_error("config: unknown key '" + it.key() + "'");
      if (entry->opt->count() == 0) entry->set(it.value());
    }
  }

  json manifest() const {
    json m;
    for (const Entry& e : entries_) m[e.key] = e.get();
    return m;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> set;
    std::function<json()> get;
  };
  CLI::App* cmd_;
  std::string config_path_;
  std::vector<Entry> entries_;
};

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw gslac::io_error("cannot create output directory: " + out_dir);
  return dir;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw gslac::io_error("cannot write manifest.json");
  out << manifest.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gslac::io_error("cannot write " + path.string());
  out << text;
}

gslac::SamplePreset resolve_preset(const std::string& name,
                                   const std::string& file) {
  if (!file.empty()) return gslac::load_preset_file(file);
  return gslac::builtin_preset(name);
}

// ---------------------------------------------------------------------------
// levels

void setup_levels(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "levels", "Sweep the ground-state levels vs field and locate the crossing");
  auto cfg = std::make_shared<CommandConfig>(cmd);
  struct Opts {
    double d_Hz = gslac::kDefaultZeroFieldSplitting_Hz;
    double gamma_Hz_per_T = gslac::kDefaultGyromagnetic_Hz_per_T;
    double b_start_T = 0.0;
    double b_stop_T = -1.0;  // auto: 1.2x the crossing field
    int n_points = 2001;
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    double transverse_T = 0.0;
    double hyperfine_a_parallel_Hz = 0.0;
    double hyperfine_a_perpendicular_Hz = 0.0;
    double hyperfine_quadrupole_Hz = 0.0;
    bool enable_hyperfine = false;
    std::string out_dir;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  cfg->bind("d_Hz", &o->d_Hz, "Zero-field splitting");
  cfg->bind("gamma_Hz_per_T", &o->gamma_Hz_per_T, "Gyromagnetic ratio");
  cfg->bind("b_start_T", &o->b_start_T, "Sweep start");
  cfg->bind("b_stop_T", &o->b_stop_T, "Sweep stop (-1 = auto)");
  cfg->bind("n_points", &o->n_points, "Sweep points");
  cfg->bind("theta_deg", &o->theta_deg, "Field polar angle");
  cfg->bind("phi_deg", &o->phi_deg, "Field azimuth");
  cfg->bind("transverse_T", &o->transverse_T,
            "Transverse component held fixed while locating the crossing");
  cfg->bind("hyperfine_a_parallel_Hz", &o->hyperfine_a_parallel_Hz,
            "Axial hyperfine constant (9x9 model)");
  cfg->bind("hyperfine_a_perpendicular_Hz", &o->hyperfine_a_perpendicular_Hz,
            "Transverse hyperfine constant (9x9 model)");
  cfg->bind("hyperfine_quadrupole_Hz", &o->hyperfine_quadrupole_Hz,
            "Nuclear quadrupole constant (9x9 model)");
  cfg->bind("enable_hyperfine", &o->enable_hyperfine,
            "Use the electron (x) nucleus model");
  cfg->bind("seed", &o->seed, "Unused here; echoed for uniformity");
  cfg->bind("out_dir", &o->out_dir, "Output directory")->required();

  cmd->callback([cfg, o]() {
    cfg->resolve();
    gslac::SpinSystemParams params;
    params.d_Hz = o->d_Hz;
    params.gamma_Hz_per_T = o->gamma_Hz_per_T;
    if (o->enable_hyperfine)
      params.hyperfine = gslac::HyperfineParams{o->hyperfine_a_parallel_Hz,
                                                o->hyperfine_a_perpendicular_Hz,
                                                o->hyperfine_quadrupole_Hz};
    const double b_cross = params.d_Hz / params.gamma_Hz_per_T;
    if (o->b_stop_T <= 0.0) o->b_stop_T = 1.2 * b_cross;

    const fs::path dir = prepare_out_dir(o->out_dir);
    json manifest = cfg->manifest();
    manifest["b_stop_T"] = o->b_stop_T;  // resolved value

    gslac::CsvTable table;
    table.columns = {"B_T"};
    for (int k = 0; k < params.dimension(); ++k)
      table.columns.push_back("E" + std::to_string(k + 1) + "_Hz");
    for (int i = 0; i < o->n_points; ++i) {
      const double b = o->b_start_T +
                       (o->b_stop_T - o->b_start_T) * i / (o->n_points - 1);
      gslac::FieldVector f;
      f.magnitude_T = b;
      f.theta_deg = o->theta_deg;
      f.phi_deg = o->phi_deg;
      const gslac::LevelSet levels = gslac::eigensystem(params, f);
      std::vector<double> row{b};
      for (int k = 0; k < params.dimension(); ++k)
        row.push_back(levels.energies_Hz(k));
      table.rows.push_back(row);
    }
    gslac::write_csv((dir / "levels.csv").string(), table);

    const gslac::GslacResult gs = gslac::find_gslac(
        params, o->transverse_T, 0.8 * b_cross, 1.2 * b_cross);
    std::string report;
    report += "gslac_center_T = " + gslac::format_number(gs.b_center_T) + "\n";
    report += "gslac_min_gap_Hz = " + gslac::format_number(gs.min_gap_Hz) + "\n";
    write_text(dir / "gslac_report.txt", report);
    write_manifest(dir, manifest);
    std::cout << report;
  });
}

// ---------------------------------------------------------------------------
// scan

void setup_scan(CLI::App& app) {
  auto* cmd = app.add_subcommand("scan", "Synthesize a full field-scan trace");
  auto cfg = std::make_shared<CommandConfig>(cmd);
  struct Opts {
    std::string preset = "W4";
    std::string preset_file;
    std::string mode;  // empty = preset's own detection mode
    gslac::ScanConfig scan;
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cfg->bind("preset", &o->preset, "Built-in sample preset (W4, B3A, F11, C7)");
  cfg->bind("preset_file", &o->preset_file, "JSON preset file (overrides --preset)");
  cfg->bind("mode", &o->mode, "Detection mode override: PL or absorption");
  cfg->bind("b_start_T", &o->scan.b_start_T, "Scan start");
  cfg->bind("b_stop_T", &o->scan.b_stop_T, "Scan stop");
  cfg->bind("n_points", &o->scan.n_points, "Scan points");
  cfg->bind("scan_duration_s", &o->scan.scan_duration_s, "Sweep duration");
  cfg->bind("n_averages", &o->scan.n_averages, "Trace averages");
  cfg->bind("alpha_deg", &o->scan.alpha_deg, "z-axis rotation angle");
  cfg->bind("beta_deg", &o->scan.beta_deg, "y-axis misalignment angle");
  cfg->bind("pump_mW", &o->scan.pump_mW, "Pump power");
  cfg->bind("normalization_T", &o->scan.normalization_T, "Normalization field");
  cfg->bind("photon_rate_per_s", &o->scan.photon_rate_per_s,
            "Detected photon rate for shot noise (0 = noise-free)");
  cfg->bind("seed", &o->scan.seed, "Noise seed");
  cfg->bind("out_dir", &o->out_dir, "Output directory")->required();

  cmd->callback([cfg, o]() {
    cfg->resolve();
    gslac::SamplePreset preset = resolve_preset(o->preset, o->preset_file);
    if (!o->mode.empty())
      preset.detection_mode = gslac::detection_mode_from_string(o->mode);
    const fs::path dir = prepare_out_dir(o->out_dir);
    const gslac::ScanTrace trace = gslac::synthesize_scan(preset, o->scan);
    gslac::write_trace_csv((dir / "trace.csv").string(), trace);
    write_manifest(dir, cfg->manifest());
    std::cout << "trace.csv: " << trace.b_T.size() << " points, sample "
              << preset.name << "\n";
  });
}

// ---------------------------------------------------------------------------
// fit

void setup_fit(CLI::App& app) {
  auto* cmd = app.add_subcommand("fit", "Fit a lineshape to a trace CSV");
  auto cfg = std::make_shared<CommandConfig>(cmd);
  struct Opts {
    std::string trace;
    std::string model = "lorentzian";
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cfg->bind("trace", &o->trace, "Trace CSV path")->required();
  cfg->bind("model", &o->model, "Fit model (lorentzian)");
  cfg->bind("out_dir", &o->out_dir, "Optional output directory");

  cmd->callback([cfg, o]() {
    cfg->resolve();
    if (o->model != "lorentzian")
      throw gslac::config_error("unknown fit model: " + o->model);
    const gslac::ScanTrace trace = gslac::read_trace_csv(o->trace);
    const gslac::FitResult fit = gslac::fit_lorentzian(trace);

    std::string report;
    auto line = [&report](const std::string& k, double v) {
      report += k + " = " + gslac::format_number(v) + "\n";
    };
    line("center_T", fit.params.center_T);
    line("fwhm_T", fit.params.fwhm_T);
    line("amplitude", fit.params.amplitude);
    line("baseline", fit.params.baseline);
    line("contrast", std::abs(fit.params.amplitude) / fit.params.baseline);
    line("stderr_center_T", fit.param_stderr(0));
    line("stderr_fwhm_T", fit.param_stderr(1));
    line("stderr_amplitude", fit.param_stderr(2));
    line("stderr_baseline", fit.param_stderr(3));
    line("residual_rms", fit.residual_rms);
    report += "n_iterations = " + std::to_string(fit.n_iterations) + "\n";
    report += std::string("converged = ") + (fit.converged ? "true" : "false") + "\n";
    std::cout << report;
    if (!o->out_dir.empty()) {
      const fs::path dir = prepare_out_dir(o->out_dir);
      write_text(dir / "fit_report.txt", report);
      write_manifest(dir, cfg->manifest());
    }
  });
}

// ---------------------------------------------------------------------------
// angle-study

void setup_angle_study(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "angle-study", "Per-angle scans, fits, and the misalignment summary");
  auto cfg = std::make_shared<CommandConfig>(cmd);
  struct Opts {
    gslac::AngleStudyConfig study;
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cfg->bind("preset", &o->study.preset_name, "Sample preset");
  cfg->bind("beta_min_deg", &o->study.beta_min_deg, "Smallest angle");
  cfg->bind("beta_max_deg", &o->study.beta_max_deg, "Largest angle");
  cfg->bind("n_angles", &o->study.n_angles, "Angle grid size");
  cfg->bind("window_halfwidth_T", &o->study.window_halfwidth_T,
            "Half width of the per-angle scan window");
  cfg->bind("scan_points", &o->study.scan_points, "Points per scan");
  cfg->bind("seed", &o->study.seed, "Seed (echoed; scans are noise-free)");
  cfg->bind("out_dir", &o->out_dir, "Output directory")->required();

  cmd->callback([cfg, o]() {
    cfg->resolve();
    const fs::path dir = prepare_out_dir(o->out_dir);
    const gslac::AngleStudyResult res = gslac::run_angle_study(o->study);

    gslac::CsvTable table;
    table.columns = {"beta_deg", "fwhm_T", "contrast", "fom_per_T"};
    for (const gslac::AngleStudyRow& row : res.rows)
      table.rows.push_back({row.beta_deg, row.fwhm_T, row.contrast, row.fom_per_T});
    gslac::write_csv((dir / "angle_fits.csv").string(), table);

    std::string report;
    auto line = [&report](const std::string& k, double v) {
      report += k + " = " + gslac::format_number(v) + "\n";
    };
    line("fwhm_min_T", res.summary.fwhm_min_T);
    line("contrast_dip_fwhm_deg", res.summary.contrast_dip_fwhm_deg);
    line("dip_depth", res.summary.dip_depth);
    line("linewidth_slope_T_per_deg", res.summary.linewidth_slope_T_per_deg);
    line("c_far", res.summary.c_far);
    line("beta_elbow_deg", res.summary.beta_elbow_deg);
    line("fom_argmax_deg", res.fom_argmax_deg);
    report += std::string("fom_minimum_at_zero = ") +
              (res.fom_minimum_at_zero ? "true" : "false") + "\n";
    write_text(dir / "angle_summary.txt", report);
    write_manifest(dir, cfg->manifest());
    std::cout << report;
  });
}

// ---------------------------------------------------------------------------
// magnetometer

void setup_magnetometer(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "magnetometer",
      "Lock-in magnetometer chain: calibration scan, noise spectra, sensitivity");
  auto cfg = std::make_shared<CommandConfig>(cmd);
  struct Opts {
    gslac::MagnetometerConfig mag;
    double reference_delta_b_T = 12.2e-12;
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cfg->bind("center_T", &o->mag.center_T, "Feature center");
  cfg->bind("fwhm_T", &o->mag.fwhm_T, "Feature linewidth");
  cfg->bind("contrast", &o->mag.contrast, "Feature contrast");
  cfg->bind("modulation_amplitude_T", &o->mag.mod.amplitude_T, "Field modulation");
  cfg->bind("modulation_frequency_Hz", &o->mag.mod.frequency_Hz,
            "Modulation frequency");
  cfg->bind("time_constant_s", &o->mag.mod.time_constant_s,
            "Demodulation time constant");
  cfg->bind("sample_rate_Hz", &o->mag.mod.sample_rate_Hz, "Sampling rate");
  cfg->bind("filter_order", &o->mag.mod.filter_order, "Low-pass order");
  cfg->bind("cal_points", &o->mag.cal_points, "Calibration scan points");
  cfg->bind("record_s", &o->mag.record_s, "Noise record duration");
  cfg->bind("field_noise_asd_T", &o->mag.field_noise_asd_T,
            "Injected white field noise ASD");
  cfg->bind("field_noise_bandwidth_Hz", &o->mag.field_noise_bandwidth_Hz,
            "Bandwidth of the injected field noise");
  cfg->bind("electronic_floor_T", &o->mag.electronic_floor_T,
            "Electronic noise floor, field-equivalent ASD");
  cfg->bind("insensitive_bias_T", &o->mag.insensitive_bias_T,
            "Bias for the magnetically insensitive record");
  cfg->bind("psd_segment", &o->mag.psd_segment, "Spectrum segment length");
  cfg->bind("collected_power_W", &o->mag.collected_power_W, "Collected probe power");
  cfg->bind("wavelength_m", &o->mag.wavelength_m, "Probe wavelength");
  cfg->bind("prefactor", &o->mag.prefactor, "Sensitivity prefactor");
  cfg->bind("reference_delta_b_T", &o->reference_delta_b_T,
            "Reference sensitivity to compare against (0 = none)");
  cfg->bind("seed", &o->mag.seed, "Noise seed");
  cfg->bind("out_dir", &o->out_dir, "Output directory")->required();

  cmd->callback([cfg, o]() {
    cfg->resolve();
    o->mag.reference_delta_b =
        o->reference_delta_b_T > 0.0 ? std::optional<double>(o->reference_delta_b_T)
                                     : std::nullopt;
    const fs::path dir = prepare_out_dir(o->out_dir);
    const gslac::MagnetometerResult res = gslac::run_magnetometer(o->mag);

    gslac::CsvTable scan;
    scan.columns = {"bias_T", "x_demod", "x_small_modulation_model"};
    for (std::size_t i = 0; i < res.cal_bias_T.size(); ++i)
      scan.rows.push_back({res.cal_bias_T[i], res.cal_x[i], res.cal_x_oracle[i]});
    gslac::write_csv((dir / "demod_scan.csv").string(), scan);

    gslac::write_spectrum_csv((dir / "spectrum_sensitive.csv").string(),
                              res.spectrum_sensitive);
    gslac::write_spectrum_csv((dir / "spectrum_insensitive.csv").string(),
                              res.spectrum_insensitive);
    gslac::write_spectrum_csv((dir / "spectrum_electronic.csv").string(),
                              res.spectrum_electronic);

    std::string report;
    auto line = [&report](const std::string& k, double v) {
      report += k + " = " + gslac::format_number(v) + "\n";
    };
    line("calibration_slope_per_T", res.calibration.slope_per_T);
    line("calibration_center_T", res.calibration.center_T);
    line("calibration_rms_fraction", res.calibration.check_rms_fraction);
    report += std::string("calibration_linear_ok = ") +
              (res.calibration.linear_ok ? "true" : "false") + "\n";
    line("oracle_slope_per_T", res.oracle_slope_per_T);
    line("band_average_sensitive_T_per_sqrtHz", res.band_sensitive_T);
    line("band_average_insensitive_T_per_sqrtHz", res.band_insensitive_T);
    line("band_average_electronic_T_per_sqrtHz", res.band_electronic_T);
    report += res.sensitivity.to_text();
    write_text(dir / "sensitivity_report.txt", report);
    write_manifest(dir, cfg->manifest());
    std::cout << report;
  });
}

// ---------------------------------------------------------------------------
// sense

void setup_sense(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "sense", "Photon-shot-noise sensitivity from linewidth, contrast, rate");
  auto cfg = std::make_shared<CommandConfig>(cmd);
  struct Opts {
    double fwhm_T = 0.84e-3;
    double contrast = 0.15;
    double photon_rate_per_s = 0.0;  // 0 = derive from power and wavelength
    double power_W = 4.2e-3;
    double wavelength_m = 1042e-9;
    double prefactor = 1.0;
    double reference_delta_b_T = 0.0;
    std::string out_dir;
  };
  auto o = std::make_shared<Opts>();
  cfg->bind("fwhm_T", &o->fwhm_T, "Feature linewidth as a field width");
  cfg->bind("contrast", &o->contrast, "Feature contrast");
  cfg->bind("photon_rate_per_s", &o->photon_rate_per_s,
            "Detected photon rate (0 = derive from power and wavelength)");
  cfg->bind("power_W", &o->power_W, "Collected optical power");
  cfg->bind("wavelength_m", &o->wavelength_m, "Probe wavelength");
  cfg->bind("prefactor", &o->prefactor, "Proportionality prefactor");
  cfg->bind("reference_delta_b_T", &o->reference_delta_b_T,
            "Reference sensitivity to compare against (0 = none)");
  cfg->bind("out_dir", &o->out_dir, "Optional output directory");

  cmd->callback([cfg, o]() {
    cfg->resolve();
    const double rate = o->photon_rate_per_s > 0.0
                            ? o->photon_rate_per_s
                            : gslac::photon_rate(o->power_W, o->wavelength_m);
    gslac::SensitivityReport report =
        gslac::shot_noise_limit(o->fwhm_T, o->contrast, rate, o->prefactor);
    if (o->reference_delta_b_T > 0.0)
      report.reference_delta_b = o->reference_delta_b_T;
    report.provenance = {
        {"photon_rate_per_s",
         o->photon_rate_per_s > 0.0
             ? "taken directly from configuration"
             : "P*lambda/(h*c) from power_W and wavelength_m"},
    };
    std::cout << report.to_text();
    if (!o->out_dir.empty()) {
      const fs::path dir = prepare_out_dir(o->out_dir);
      write_text(dir / "sensitivity_report.txt", report.to_text());
      write_manifest(dir, cfg->manifest());
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microwave-free level anti-crossing magnetometer simulator"};
  app.require_subcommand(1);
  setup_levels(app);
  setup_scan(app);
  setup_fit(app);
  setup_angle_study(app);
  setup_magnetometer(app);
  setup_sense(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const gslac::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gslac::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const gslac::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
