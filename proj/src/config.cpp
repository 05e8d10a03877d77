#include "boundarylab/config.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "boundarylab/exactgroup.hpp"

namespace boundarylab::harness {
namespace {

using exact::BigInt;
using exact::GroupElement;

[[noreturn]] void fail(const std::string& file, int line,
                       const std::string& msg) {
  throw ConfigError(file + ":" + std::to_string(line) + ": " + msg);
}

// Validates UTF-8 (RFC 3629: 1-4 byte sequences, no overlongs, no
// surrogates, max U+10FFFF) and returns the 1-based line of the first bad
// byte, or 0 when clean.
int first_invalid_utf8_line(const std::string& text) {
  int line = 1;
  size_t i = 0;
  const auto cont = [&](size_t k) {
    return i + k < text.size() &&
           (static_cast<unsigned char>(text[i + k]) & 0xc0) == 0x80;
  };
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == '\n') ++line;
    if (c < 0x80) {
      ++i;
    } else if ((c & 0xe0) == 0xc0) {
      if (c < 0xc2 || !cont(1)) return line;
      i += 2;
    } else if ((c & 0xf0) == 0xe0) {
      if (!cont(1) || !cont(2)) return line;
      const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
      if ((c == 0xe0 && c1 < 0xa0) || (c == 0xed && c1 >= 0xa0)) return line;
      i += 3;
    } else if ((c & 0xf8) == 0xf0) {
      if (c > 0xf4 || !cont(1) || !cont(2) || !cont(3)) return line;
      const unsigned char c1 = static_cast<unsigned char>(text[i + 1]);
      if ((c == 0xf0 && c1 < 0x90) || (c == 0xf4 && c1 >= 0x90)) return line;
      i += 4;
    } else {
      return line;
    }
  }
  return 0;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

long long parse_int(const std::string& file, int line, const std::string& key,
                    const std::string& value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(file, line, "key '" + key + "': not an integer: '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& file, int line,
                        const std::string& key, const std::string& value) {
  try {
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("sign");
    size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(file, line,
         "key '" + key + "': not an unsigned integer: '" + value + "'");
  }
}

double parse_float(const std::string& file, int line, const std::string& key,
                   const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(file, line, "key '" + key + "': not a number: '" + value + "'");
  }
}

walk::Rational parse_rational(const std::string& file, int line,
                              const std::string& token) {
  const auto parts = split(token, '/');
  if (parts.size() > 2 || parts[0].empty() ||
      (parts.size() == 2 && parts[1].empty())) {
    fail(file, line, "weight is not a rational 'p/q': '" + token + "'");
  }
  try {
    const BigInt num(parts[0]);
    const BigInt den = parts.size() == 2 ? BigInt(parts[1]) : BigInt(1);
    if (den == 0) fail(file, line, "weight has zero denominator: '" + token + "'");
    return walk::Rational(num, den);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(file, line, "weight is not a rational 'p/q': '" + token + "'");
  }
}

std::vector<GroupElement> parse_generators(const std::string& file, int line,
                                           int dim, const std::string& value) {
  std::vector<GroupElement> out;
  for (const std::string& mat : split(value, ';')) {
    const auto rows = split(mat, ',');
    if (static_cast<int>(rows.size()) != dim) {
      fail(file, line,
           "generator " + std::to_string(out.size() + 1) + " has " +
               std::to_string(rows.size()) + " rows, expected " +
               std::to_string(dim));
    }
    std::vector<BigInt> entries;
    for (const std::string& row : rows) {
      const auto cells = tokens(row);
      if (static_cast<int>(cells.size()) != dim) {
        fail(file, line,
             "generator " + std::to_string(out.size() + 1) + " has a row of " +
                 std::to_string(cells.size()) + " entries, expected " +
                 std::to_string(dim));
      }
      for (const std::string& cell : cells) {
        try {
          entries.emplace_back(cell);
        } catch (const std::exception&) {
          fail(file, line, "generator entry is not an integer: '" + cell + "'");
        }
      }
    }
    try {
      out.emplace_back(dim, std::move(entries));
    } catch (const std::exception& e) {
      fail(file, line,
           "generator " + std::to_string(out.size() + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& filename) {
  if (const int bad = first_invalid_utf8_line(text)) {
    fail(filename, bad, "invalid UTF-8 byte sequence");
  }

  std::map<std::string, std::pair<int, std::string>> pairs;  // key -> (line, value)
  {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string stripped = trim(raw);
      if (stripped.empty()) continue;
      const size_t eq = stripped.find('=');
      if (eq == std::string::npos) {
        fail(filename, line, "expected 'key = value'");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) fail(filename, line, "empty key");
      if (value.empty()) fail(filename, line, "key '" + key + "': empty value");
      if (!pairs.emplace(key, std::make_pair(line, value)).second) {
        fail(filename, line, "duplicate key '" + key + "'");
      }
    }
  }

  const auto take = [&](const std::string& key) -> std::pair<int, std::string> {
    const auto it = pairs.find(key);
    if (it == pairs.end()) fail(filename, 0, "missing required key '" + key + "'");
    auto v = it->second;
    pairs.erase(it);
    return v;
  };
  const auto take_optional =
      [&](const std::string& key) -> std::pair<int, std::string> {
    const auto it = pairs.find(key);
    if (it == pairs.end()) return {0, ""};
    auto v = it->second;
    pairs.erase(it);
    return v;
  };

  ExperimentConfig cfg;
  cfg.source_text = text;

  {
    const auto [line, value] = take("dim");
    const long long dim = parse_int(filename, line, "dim", value);
    if (dim < 2 || dim > 64) fail(filename, line, "dim must be in [2, 64]");
    cfg.dim = static_cast<int>(dim);
  }

  const auto [gen_line, gen_value] = take("generators");
  std::vector<GroupElement> support =
      parse_generators(filename, gen_line, cfg.dim, gen_value);

  {
    const auto [line, value] = take("weights");
    std::vector<walk::Rational> weights;
    for (const std::string& t : tokens(value)) {
      weights.push_back(parse_rational(filename, line, t));
    }
    if (weights.size() != support.size()) {
      fail(filename, line,
           std::to_string(weights.size()) + " weights for " +
               std::to_string(support.size()) + " generators");
    }
    try {
      cfg.mu = walk::MuSpec::validated(std::move(support), std::move(weights));
    } catch (const std::exception& e) {
      fail(filename, line, e.what());
    }
  }

  {
    const auto [line, value] = take("n");
    const long long n = parse_int(filename, line, "n", value);
    if (n < 1 || n > 1000000) fail(filename, line, "n must be in [1, 10^6]");
    cfg.n = static_cast<int>(n);
  }
  {
    const auto [line, value] = take("alpha");
    const long long a = parse_int(filename, line, "alpha", value);
    if (a < 1 || a > 1000000) fail(filename, line, "alpha must be in [1, 10^6]");
    cfg.alpha = static_cast<int>(a);
  }
  {
    const auto [line, value] = take("L");
    cfg.L = parse_float(filename, line, "L", value);
    if (!(cfg.L > 0.0)) fail(filename, line, "L must be positive");
  }
  {
    const auto [line, value] = take("M");
    if (value == "sweep") {
      cfg.sweep_m = true;
    } else {
      cfg.M = parse_float(filename, line, "M", value);
      if (!(cfg.M > 0.0)) fail(filename, line, "M must be positive or 'sweep'");
    }
  }
  {
    const auto [line, value] = take("paths");
    const long long p = parse_int(filename, line, "paths", value);
    if (p < 1 || p > 100000000) {
      fail(filename, line, "paths must be in [1, 10^8]");
    }
    cfg.paths = static_cast<int>(p);
  }
  {
    const auto [line, value] = take("seed");
    cfg.seed = parse_u64(filename, line, "seed", value);
  }

  if (const auto [line, value] = take_optional("horizon_factor"); line) {
    const long long h = parse_int(filename, line, "horizon_factor", value);
    if (h < 1 || h > 1024) {
      fail(filename, line, "horizon_factor must be in [1, 1024]");
    }
    cfg.horizon_factor = static_cast<int>(h);
  }
  if (const auto [line, value] = take_optional("out_dir"); line) {
    cfg.out_dir = value;
  }
  if (const auto [line, value] = take_optional("formats"); line) {
    cfg.write_csv = false;
    cfg.write_svg = false;
    for (const std::string& t : tokens(value)) {
      if (t == "csv") {
        cfg.write_csv = true;
      } else if (t == "svg") {
        cfg.write_svg = true;
      } else {
        fail(filename, line, "unknown format '" + t + "' (csv, svg)");
      }
    }
    if (!cfg.write_csv && !cfg.write_svg) {
      fail(filename, line, "formats selects nothing");
    }
  }
  if (const auto [line, value] = take_optional("window"); line) {
    const long long w = parse_int(filename, line, "window", value);
    if (w < 1 || w > 1000000) fail(filename, line, "window must be >= 1");
    cfg.window = static_cast<int>(w);
  }
  if (const auto [line, value] = take_optional("epsilon"); line) {
    cfg.epsilon = parse_float(filename, line, "epsilon", value);
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
      fail(filename, line, "epsilon must lie in (0, 1)");
    }
  }
  if (const auto [line, value] = take_optional("max_exponent"); line) {
    const long long e = parse_int(filename, line, "max_exponent", value);
    if (e < 0 || e > 62) fail(filename, line, "max_exponent must be in [0, 62]");
    cfg.max_exponent = static_cast<int>(e);
  }
  if (const auto [line, value] = take_optional("avez_nmax"); line) {
    const long long m = parse_int(filename, line, "avez_nmax", value);
    if (m < 1 || m > 64) fail(filename, line, "avez_nmax must be in [1, 64]");
    cfg.avez_nmax = static_cast<int>(m);
  }

  if (!pairs.empty()) {
    const auto& [key, where] = *pairs.begin();
    fail(filename, where.first, "unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ":0: cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace boundarylab::harness
