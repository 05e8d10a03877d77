#pragma once
// Experiment configuration: a strict UTF-8 key/value text format with
// line-precise errors.  One "key = value" pair per line, '#' starts a
// comment, blank lines are ignored, keys may not repeat.
//
// Required keys
//   dim              matrix dimension (>= 2)
//   generators       step support: matrices separated by ';', rows within a
//                    matrix by ',', integer entries by whitespace; every
//                    matrix must have determinant 1
//   weights          one positive rational per generator ("p/q" or "p"),
//                    summing exactly to 1
//   n                walk segment length (>= 1)
//   alpha            interval length (>= 1)
//   L                step-size bound (> 0)
//   M                flat-distance threshold (> 0), or the word "sweep" to
//                    calibrate it from data
//   paths            Monte Carlo sample count (>= 1)
//   seed             64-bit master seed
// Optional keys
//   horizon_factor   boundary horizon multiplier (default 8)
//   out_dir          output directory (default "out")
//   formats          subset of {csv, svg} (default both)
//   window           sweep window length (default 50)
//   epsilon          sweep miss tolerance in (0, 1) (default 0.1)
//   max_exponent     sweep grid cap: 2^0 .. 2^max_exponent (default 12)
//   avez_nmax        exact convolution grid cap (default 8)

#include <cstdint>
#include <stdexcept>
#include <string>

#include "boundarylab/walk.hpp"

namespace boundarylab::harness {

/// Message always starts with "<file>:<line>: " (line 0 for file-level
/// problems such as missing keys).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int dim = 0;
  walk::MuSpec mu;
  int n = 0;
  int alpha = 0;
  double L = 0.0;
  double M = 0.0;        // meaningful only when sweep_m is false
  bool sweep_m = false;  // M = sweep
  int horizon_factor = 8;
  int paths = 0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_svg = true;
  int window = 50;
  double epsilon = 0.1;
  int max_exponent = 12;
  int avez_nmax = 8;
  std::string source_text;  // raw config bytes (hashed into the manifest)
};

/// Parses and validates; filename only labels error messages.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& filename);

/// Reads the file and parses it.  A missing or unreadable file is a
/// ConfigError.
ExperimentConfig load_config(const std::string& path);

}  // namespace boundarylab::harness
