#pragma once
// Deterministic output emission: CSV tables (RFC 4180: CRLF line endings,
// mandatory header row, minimal quoting), self-contained SVG line charts
// (no external tooling), and the per-run manifest.  All floating-point
// formatting goes through format_double ("%.12g", C locale), so identical
// inputs serialize to identical bytes on every run and worker count.

#include <cstdint>
#include <string>
#include <vector>

namespace boundarylab::harness {

extern const char* kCodeVersion;

/// Shortest-round-trip-ish decimal: printf "%.12g"; -0 normalizes to 0.
std::string format_double(double x);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::invalid_argument when the cell count differs from the
  /// header width.
  void add_row(std::vector<std::string> cells);
  /// RFC 4180 bytes; fields containing comma, quote, CR or LF are quoted
  /// with doubled inner quotes.
  std::string to_string() const;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Fixed-size (860 x 520) line chart with axes, tick labels and a legend.
/// log2_x draws the x axis on a log2 scale (all x must then be positive).
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<Series>& series,
                           bool log2_x = false);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(const std::string& bytes);

/// Seconds since the epoch as "YYYY-MM-DDTHH:MM:SSZ" (UTC).  Honors the
/// SOURCE_DATE_EPOCH environment variable for reproducible runs, else uses
/// the current time.
std::string manifest_timestamp();

struct RunManifest {
  std::string subcommand;
  std::string config_hash;  // fnv1a64 of the raw config bytes, 16 hex digits
  std::string code_version = kCodeVersion;
  std::uint64_t seed = 0;
  std::string created_utc;
  std::vector<std::string> outputs;  // files written by this run, sorted

  /// Deterministic JSON (fixed key order, escaped strings).
  std::string to_json() const;
};

/// Creates parent directories and writes bytes; throws std::runtime_error on
/// I/O failure.
void write_file(const std::string& path, const std::string& bytes);

}  // namespace boundarylab::harness
