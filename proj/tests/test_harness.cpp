#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "boundarylab/config.hpp"
#include "boundarylab/report.hpp"
#include "boundarylab/runner.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using namespace boundarylab;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p.string();
}

// A complete valid config; individual cases mutate copies of it.
const char* kBaseConfig =
    "dim = 2\n"
    "generators = 1 2, 0 1; 1 0, 2 1; 1 -2, 0 1; 1 0, -2 1\n"
    "weights = 1/4 1/4 1/4 1/4\n"
    "n = 400\n"
    "alpha = 20\n"
    "L = 1.25\n"
    "M = sweep\n"
    "paths = 64\n"
    "seed = 20260815\n";

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config happy path parses every key") {
  std::string text = kBaseConfig;
  text +=
      "formats = csv\n"
      "epsilon = 0.25\n"
      "max_exponent = 10\n"
      "avez_nmax = 6\n"
      "out_dir = out/xyz\n";
  const harness::ExperimentConfig cfg =
      harness::parse_config_text(text, "cfg");
  CHECK(cfg.dim == 2);
  CHECK(cfg.mu.atoms() == 4);
  CHECK(cfg.n == 400);
  CHECK(cfg.alpha == 20);
  CHECK(cfg.L == 1.25);
  CHECK(cfg.sweep_m);
  CHECK(cfg.horizon_factor == 8);  // default
  CHECK(cfg.paths == 64);
  CHECK(cfg.seed == 20260815);
  CHECK(cfg.out_dir == "out/xyz");
  CHECK(cfg.write_csv);
  CHECK_FALSE(cfg.write_svg);
  CHECK(cfg.window == 50);  // default
  CHECK(cfg.epsilon == 0.25);
  CHECK(cfg.max_exponent == 10);
  CHECK(cfg.avez_nmax == 6);
  CHECK(cfg.source_text == text);

  // A fixed numeric threshold parses too.
  std::string fixed = kBaseConfig;
  fixed.replace(fixed.find("M = sweep"), 9, "M = 256.0");
  const harness::ExperimentConfig cfg2 =
      harness::parse_config_text(fixed, "cfg");
  CHECK_FALSE(cfg2.sweep_m);
  CHECK(cfg2.M == 256.0);
}

TEST_CASE("config errors carry the offending line") {
  using harness::ConfigError;
  const auto parse = [](const std::string& text) {
    return harness::parse_config_text(text, "cfg");
  };

  // Unknown key: line 10 of base + 1 appended line.
  CHECK_THROWS_WITH_AS(parse(std::string(kBaseConfig) + "mystery = 1\n"),
                       doctest::Contains("cfg:10: unknown key 'mystery'"),
                       ConfigError);

  // Missing required key reports the file, not a line.
  {
    std::string text = kBaseConfig;
    const auto at = text.find("n = 400\n");
    text.erase(at, 8);
    CHECK_THROWS_WITH_AS(parse(text),
                         doctest::Contains("cfg:0: missing required key 'n'"),
                         ConfigError);
  }

  // Duplicate key reports the second occurrence.
  CHECK_THROWS_WITH_AS(parse(std::string(kBaseConfig) + "dim = 2\n"),
                       doctest::Contains("cfg:10: duplicate key 'dim'"),
                       ConfigError);

  // Invalid UTF-8 wins over everything else and names its line.
  CHECK_THROWS_WITH_AS(
      parse("dim = 2\n# fine\nbad\xFF = 1\n"),
      doctest::Contains("cfg:3: invalid UTF-8 byte sequence"), ConfigError);

  // Determinant enforcement happens on the generators line.
  {
    std::string text = kBaseConfig;
    text.replace(text.find("1 2, 0 1"), 8, "1 1, 1 1");
    CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("cfg:2: generator 1"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse(text),
                         doctest::Contains("determinant must be exactly +1"),
                         ConfigError);
  }

  // Weight sanity: count, zero denominator, sum.
  {
    std::string text = kBaseConfig;
    text.replace(text.find("weights = 1/4 1/4 1/4 1/4"), 25,
                 "weights = 1/4 1/4 1/2");
    CHECK_THROWS_WITH_AS(parse(text),
                         doctest::Contains("cfg:3: 3 weights for 4 generators"),
                         ConfigError);
  }
  {
    std::string text = kBaseConfig;
    text.replace(text.find("weights = 1/4 1/4 1/4 1/4"), 25,
                 "weights = 1/0 1/4 1/4 1/4");
    CHECK_THROWS_WITH_AS(parse(text),
                         doctest::Contains("cfg:3: weight has zero denominator"),
                         ConfigError);
  }
  {
    std::string text = kBaseConfig;
    text.replace(text.find("weights = 1/4 1/4 1/4 1/4"), 25,
                 "weights = 1/2 1/4 1/4 1/8");
    CHECK_THROWS_WITH_AS(parse(text),
                         doctest::Contains("weights must sum exactly to 1"),
                         ConfigError);
  }

  // Threshold: zero is rejected, the sweep keyword is not.
  {
    std::string text = kBaseConfig;
    text.replace(text.find("M = sweep"), 9, "M = 0");
    CHECK_THROWS_WITH_AS(parse(text),
                         doctest::Contains("cfg:7: M must be positive"),
                         ConfigError);
  }

  // Shape errors.
  CHECK_THROWS_WITH_AS(parse("dim\n"), doctest::Contains("expected 'key = value'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("= 2\n"), doctest::Contains("cfg:1: empty key"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("dim =\n"),
                       doctest::Contains("key 'dim': empty value"), ConfigError);
}

TEST_CASE("csv writer follows the quoting rules") {
  harness::Csv csv;
  csv.header = {"a", "b"};
  csv.add_row({"1", "x,y"});
  csv.add_row({"2", "he said \"hi\""});
  csv.add_row({"3", "line\nbreak"});
  CHECK(csv.to_string() ==
        "a,b\r\n"
        "1,\"x,y\"\r\n"
        "2,\"he said \"\"hi\"\"\"\r\n"
        "3,\"line\nbreak\"\r\n");
  CHECK_THROWS_AS(csv.add_row({"only one"}), std::invalid_argument);
}

TEST_CASE("compact doubles survive a round trip") {
  CHECK(harness::format_double(0.0) == "0");
  CHECK(harness::format_double(0.25) == "0.25");
  CHECK(harness::format_double(-3.0) == "-3");
  for (const double x : {1.0 / 3.0, 1e-12, 12345.6789, 2.0 / 7.0, 1.5e17}) {
    const double back = std::stod(harness::format_double(x));
    CHECK(std::abs(back - x) <= 1e-11 * std::abs(x));
  }
}

TEST_CASE("line charts are deterministic markup") {
  harness::Series a{"alpha", {1, 2, 4, 8}, {0.5, 0.25, 0.125, 0.0625}};
  harness::Series b{"beta", {1, 2, 4, 8}, {1.0, 1.0, 1.0, 1.0}};
  const std::string svg =
      harness::line_chart_svg("rates", "n", "nats", {a, b});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("rates") != std::string::npos);
  CHECK(svg.find("alpha") != std::string::npos);
  CHECK(svg.find("beta") != std::string::npos);
  CHECK(svg == harness::line_chart_svg("rates", "n", "nats", {a, b}));

  const std::string log_svg =
      harness::line_chart_svg("rates", "n", "nats", {a}, true);
  CHECK(log_svg.find("<svg") != std::string::npos);
  CHECK(log_svg != svg);
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(harness::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(harness::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(harness::fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("manifest timestamps honor the epoch override") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  CHECK(harness::manifest_timestamp() == "1970-01-01T00:00:00Z");
  setenv("SOURCE_DATE_EPOCH", "86399", 1);
  CHECK(harness::manifest_timestamp() == "1970-01-01T23:59:59Z");
  unsetenv("SOURCE_DATE_EPOCH");
  const std::string now = harness::manifest_timestamp();
  CHECK(now.size() == 20);
  CHECK(now[10] == 'T');
  CHECK(now.back() == 'Z');
}

TEST_CASE("run manifest serializes with fixed key order") {
  harness::RunManifest m;
  m.subcommand = "avez";
  m.config_hash = "0123456789abcdef";
  m.seed = 42;
  m.created_utc = "1970-01-01T00:00:00Z";
  m.outputs = {"a.csv", "b.svg"};
  CHECK(m.to_json() ==
        std::string("{\n"
                    "  \"subcommand\": \"avez\",\n"
                    "  \"config_hash\": \"0123456789abcdef\",\n"
                    "  \"code_version\": \"") +
            harness::kCodeVersion +
            "\",\n"
            "  \"seed\": 42,\n"
            "  \"created_utc\": \"1970-01-01T00:00:00Z\",\n"
            "  \"outputs\": [\"a.csv\", \"b.svg\"]\n"
            "}\n");
}

TEST_CASE("cli rejects malformed invocations") {
  CHECK(harness::run_cli({}) == harness::kExitConfigError);
  CHECK(harness::run_cli({"bogus"}) == harness::kExitConfigError);
  CHECK(harness::run_cli({"simulate"}) == harness::kExitConfigError);
  CHECK(harness::run_cli({"simulate", "--config", "/does/not/exist.cfg"}) ==
        harness::kExitConfigError);
  CHECK(harness::run_cli({"--help"}) == harness::kExitPass);

  // A config whose text is invalid also exits with the config code.
  const fs::path dir = fresh_dir("bl_harness_badcfg");
  const std::string cfg = write_text(dir / "bad.cfg", "dim = 1\n");
  CHECK(harness::run_cli({"simulate", "--config", cfg}) ==
        harness::kExitConfigError);
}

TEST_CASE("cli simulate is deterministic and honest about the identity walk") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  const fs::path dir = fresh_dir("bl_harness_identity");
  const std::string cfg = write_text(dir / "id.cfg",
                                     "dim = 2\n"
                                     "generators = 1 0, 0 1\n"
                                     "weights = 1\n"
                                     "n = 10\n"
                                     "alpha = 5\n"
                                     "L = 1\n"
                                     "M = 1\n"
                                     "paths = 3\n"
                                     "seed = 5\n"
                                     "horizon_factor = 2\n");

  const fs::path out1 = dir / "run1";
  CHECK(harness::run_cli({"simulate", "--config", cfg, "--out",
                          out1.string()}) == harness::kExitPass);
  const std::string csv = slurp(out1 / "simulate.csv");
  CHECK(slurp(out1 / "manifest.json").find("\"simulate.csv\"") !=
        std::string::npos);

  // Every radial, gap and drift column of the identity walk is exactly 0.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "path,n,r_1,r_2,min_gap,drift\r");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find(',', line.find(',') + 1);
    CHECK(line.substr(first + 1) == "0,0,0,0");
    ++rows;
  }
  CHECK(rows == 3 * 10);

  // Re-running, with any worker count, reproduces the bytes.
  const fs::path out2 = dir / "run2";
  CHECK(harness::run_cli({"simulate", "--config", cfg, "--out", out2.string(),
                          "--threads", "3"}) == harness::kExitPass);
  CHECK(slurp(out2 / "simulate.csv") == csv);
  CHECK(slurp(out2 / "manifest.json") == slurp(out1 / "manifest.json"));
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("cli seed override lands in the outputs and the manifest") {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  const fs::path dir = fresh_dir("bl_harness_seed");
  const std::string cfg = write_text(dir / "walk.cfg",
                                     "dim = 2\n"
                                     "generators = 1 2, 0 1; 1 0, 2 1; "
                                     "1 -2, 0 1; 1 0, -2 1\n"
                                     "weights = 1/4 1/4 1/4 1/4\n"
                                     "n = 6\n"
                                     "alpha = 3\n"
                                     "L = 1.25\n"
                                     "M = 4\n"
                                     "paths = 2\n"
                                     "seed = 5\n");
  const fs::path out1 = dir / "a";
  const fs::path out2 = dir / "b";
  CHECK(harness::run_cli({"simulate", "--config", cfg, "--out",
                          out1.string()}) == harness::kExitPass);
  CHECK(harness::run_cli({"simulate", "--config", cfg, "--out", out2.string(),
                          "--seed", "123"}) == harness::kExitPass);
  CHECK(slurp(out1 / "simulate.csv") != slurp(out2 / "simulate.csv"));
  CHECK(slurp(out2 / "manifest.json").find("\"seed\": 123") !=
        std::string::npos);
  unsetenv("SOURCE_DATE_EPOCH");
}

}  // TEST_SUITE
