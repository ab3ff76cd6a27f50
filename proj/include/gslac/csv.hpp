#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gslac/lockin_dsp.hpp"
#include "gslac/scan_engine.hpp"

// Plain-text CSV emission and parsing. One header line, comma separators,
// decimal points, '#'-prefixed "key = value" metadata lines before the
// header. Numbers are written with %.12g so reruns are byte-identical.

namespace gslac {

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

std::string format_number(double v);  // %.12g

// Trace CSV: columns B_T,signal.
void write_trace_csv(const std::string& path, const ScanTrace& trace);
ScanTrace read_trace_csv(const std::string& path);

// Time-series CSV: columns t_s,value.
void write_timeseries_csv(const std::string& path, const TimeSeries& ts,
                          const std::vector<std::pair<std::string, std::string>>&
                              extra_metadata = {});

// Spectrum CSV: columns f_Hz,asd_T_per_sqrtHz.
void write_spectrum_csv(const std::string& path, const NoiseSpectrum& spec);

}  // namespace gslac
