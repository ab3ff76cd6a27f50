#include "gslac/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gslac/errors.hpp"

namespace gslac {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  for (const auto& [key, value] : table.metadata)
    out << "# " << key << " = " << value << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_number(row[c]);
    out << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) {
        auto trim = [](std::string s) {
          const auto a = s.find_first_not_of(" \t");
          const auto b = s.find_last_not_of(" \t");
          return a == std::string::npos ? std::string{}
                                        : s.substr(a, b - a + 1);
        };
        table.metadata.emplace_back(trim(body.substr(0, eq)),
                                    trim(body.substr(eq + 1)));
      }
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str())
        throw io_error(path + ": cannot parse value '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != table.columns.size())
      throw io_error(path + ": row width does not match the header");
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw io_error(path + ": no header line");
  return table;
}

void write_trace_csv(const std::string& path, const ScanTrace& trace) {
  CsvTable t;
  t.metadata = {
      {"sample", trace.meta.sample},
      {"detection_mode", trace.meta.detection_mode},
      {"normalization_point_T", format_number(trace.meta.normalization_T)},
      {"beta_deg", format_number(trace.meta.beta_deg)},
      {"pump_mW", format_number(trace.meta.pump_mW)},
      {"seed", std::to_string(trace.meta.seed)},
  };
  t.columns = {"B_T", "signal"};
  t.rows.reserve(trace.b_T.size());
  for (std::size_t i = 0; i < trace.b_T.size(); ++i)
    t.rows.push_back({trace.b_T[i], trace.signal[i]});
  write_csv(path, t);
}

ScanTrace read_trace_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.columns.size() != 2 || t.columns[0] != "B_T" ||
      t.columns[1] != "signal")
    throw io_error(path + ": expected columns B_T,signal");
  ScanTrace trace;
  for (const auto& [key, value] : t.metadata) {
    if (key == "sample") trace.meta.sample = value;
    if (key == "detection_mode") trace.meta.detection_mode = value;
    if (key == "normalization_point_T")
      trace.meta.normalization_T = std::atof(value.c_str());
    if (key == "beta_deg") trace.meta.beta_deg = std::atof(value.c_str());
    if (key == "pump_mW") trace.meta.pump_mW = std::atof(value.c_str());
    if (key == "seed") trace.meta.seed = std::strtoull(value.c_str(), nullptr, 10);
  }
  for (const auto& row : t.rows) {
    trace.b_T.push_back(row[0]);
    trace.signal.push_back(row[1]);
  }
  return trace;
}

void write_timeseries_csv(
    const std::string& path, const TimeSeries& ts,
    const std::vector<std::pair<std::string, std::string>>& extra_metadata) {
  CsvTable t;
  t.metadata = {{"sample_rate_Hz", format_number(ts.sample_rate_Hz)}};
  for (const auto& kv : extra_metadata) t.metadata.push_back(kv);
  t.columns = {"t_s", "value"};
  t.rows.reserve(ts.values.size());
  for (std::size_t i = 0; i < ts.values.size(); ++i)
    t.rows.push_back({ts.t0_s + i / ts.sample_rate_Hz, ts.values[i]});
  write_csv(path, t);
}

void write_spectrum_csv(const std::string& path, const NoiseSpectrum& spec) {
  CsvTable t;
  t.metadata = {{"window", spec.window_descriptor},
                {"n_averages", std::to_string(spec.n_averages)}};
  t.columns = {"f_Hz", "asd_T_per_sqrtHz"};
  t.rows.reserve(spec.frequencies_Hz.size());
  for (std::size_t i = 0; i < spec.frequencies_Hz.size(); ++i)
    t.rows.push_back({spec.frequencies_Hz[i], spec.asd[i]});
  write_csv(path, t);
}

}  // namespace gslac
