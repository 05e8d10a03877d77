#include "boundarylab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "boundarylab/config.hpp"
#include "boundarylab/entropy.hpp"
#include "boundarylab/flags.hpp"
#include "boundarylab/liegeom.hpp"
#include "boundarylab/parallel.hpp"
#include "boundarylab/pindown.hpp"
#include "boundarylab/report.hpp"
#include "boundarylab/walk.hpp"

namespace boundarylab::harness {
namespace {

using entropy::CheckStatus;

struct RunContext {
  ExperimentConfig cfg;
  std::string config_path;
  int threads = 1;
};

std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void emit_outputs(const RunContext& ctx, const std::string& subcommand,
                  const std::vector<std::pair<std::string, std::string>>& files) {
  RunManifest manifest;
  manifest.subcommand = subcommand;
  manifest.config_hash = hash_hex(ctx.cfg.source_text);
  manifest.seed = ctx.cfg.seed;
  manifest.created_utc = manifest_timestamp();
  for (const auto& [name, bytes] : files) {
    write_file(ctx.cfg.out_dir + "/" + name, bytes);
    manifest.outputs.push_back(name);
  }
  std::sort(manifest.outputs.begin(), manifest.outputs.end());
  write_file(ctx.cfg.out_dir + "/manifest.json", manifest.to_json());
}

/// Up to 10 evenly spaced checkpoints ending exactly at n.
std::vector<int> checkpoints(int n) {
  std::vector<int> out;
  const int step = std::max(1, n / 10);
  for (int i = step; i < n; i += step) out.push_back(i);
  out.push_back(n);
  return out;
}

/// Linear-interpolation quantile of an ascending vector; NaN when empty.
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double t = p * static_cast<double>(sorted.size() - 1);
  const size_t i = static_cast<size_t>(t);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = t - static_cast<double>(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

int exit_code(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass:
      return kExitPass;
    case CheckStatus::inconclusive:
      return kExitInconclusive;
    case CheckStatus::fail:
      return kExitFail;
  }
  return kExitFail;
}

/// The calibrated threshold: the config's fixed M, or the sweep result.
/// Sweeps cap the sample at 64 paths; the grid curve is reported by sweep-m.
double resolve_m(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (!cfg.sweep_m) return cfg.M;
  pindown::SweepParams params;
  params.n = cfg.n;
  params.window = cfg.window;
  params.epsilon = cfg.epsilon;
  params.paths = std::min(cfg.paths, 64);
  params.seed = cfg.seed;
  params.horizon_factor = cfg.horizon_factor;
  params.max_exponent = cfg.max_exponent;
  const double m = pindown::sweep_M(cfg.mu, params).M;
  std::cout << "calibrated M = " << format_double(m) << "\n";
  return m;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::vector<int> grid = checkpoints(cfg.n);
  const int d = cfg.dim;

  struct PathRows {
    std::vector<std::vector<std::string>> rows;
  };
  std::vector<PathRows> slots(static_cast<size_t>(cfg.paths));
  util::parallel_for_index(cfg.paths, ctx.threads, [&](int p) {
    const walk::BilateralPath path = walk::sample_path(
        cfg.mu, walk::attempt_seed(cfg.seed, static_cast<std::uint64_t>(p), 0),
        cfg.n, 0);
    const std::vector<double> gaps = walk::contracting_diagnostic(path, grid);
    PathRows& out = slots[static_cast<size_t>(p)];
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      const int i = grid[gi];
      const lie::RadialVector r = lie::radial(path.position(i));
      std::vector<std::string> row{std::to_string(p), std::to_string(i)};
      for (int j = 0; j < d; ++j) row.push_back(format_double(r.v[j]));
      row.push_back(format_double(gaps[gi]));
      row.push_back(format_double(r.norm() / static_cast<double>(i)));
      out.rows.push_back(std::move(row));
    }
  });

  Csv csv;
  csv.header = {"path", "n"};
  for (int j = 1; j <= d; ++j) csv.header.push_back("r_" + std::to_string(j));
  csv.header.push_back("min_gap");
  csv.header.push_back("drift");
  for (const PathRows& s : slots) {
    for (const auto& row : s.rows) csv.add_row(row);
  }

  std::vector<std::pair<std::string, std::string>> files;
  if (cfg.write_csv) files.emplace_back("simulate.csv", csv.to_string());
  emit_outputs(ctx, "simulate", files);
  std::cout << "simulate: " << cfg.paths << " paths, " << grid.size()
            << " checkpoints\n";
  return kExitPass;
}

int cmd_convergence(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::vector<int> grid = checkpoints(cfg.n);
  const int horizon = cfg.horizon_factor * cfg.n;

  struct PathDists {
    std::vector<double> dist;  // per checkpoint; NaN marks indeterminate
  };
  std::vector<PathDists> slots(static_cast<size_t>(cfg.paths));
  util::parallel_for_index(cfg.paths, ctx.threads, [&](int p) {
    const walk::BilateralPath path = walk::sample_path(
        cfg.mu, walk::attempt_seed(cfg.seed, static_cast<std::uint64_t>(p), 0),
        horizon, 0);
    PathDists& out = slots[static_cast<size_t>(p)];
    out.dist.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    flags::Flag limit;
    try {
      limit = flags::forward_flag(path.position(horizon));
    } catch (const flags::FlagsError&) {
      return;  // whole path indeterminate at the horizon
    }
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      try {
        out.dist[gi] = flags::flag_distance(
            flags::forward_flag(path.position(grid[gi])), limit);
      } catch (const flags::FlagsError&) {
        // leave NaN: indeterminate at this checkpoint
      }
    }
  });

  Csv csv;
  csv.header = {"n", "q1", "median", "q3", "indeterminate_frac", "warning"};
  Series med{"median", {}, {}}, q1s{"lower quartile", {}, {}},
      q3s{"upper quartile", {}, {}};
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<double> values;
    int indeterminate = 0;
    for (const PathDists& s : slots) {
      if (std::isfinite(s.dist[gi])) {
        values.push_back(s.dist[gi]);
      } else {
        ++indeterminate;
      }
    }
    std::sort(values.begin(), values.end());
    const double frac =
        static_cast<double>(indeterminate) / static_cast<double>(cfg.paths);
    const double q1 = quantile(values, 0.25);
    const double q2 = quantile(values, 0.5);
    const double q3 = quantile(values, 0.75);
    csv.add_row({std::to_string(grid[gi]), format_double(q1),
                 format_double(q2), format_double(q3), format_double(frac),
                 frac > 0.05 ? "1" : "0"});
    if (std::isfinite(q2)) {
      med.x.push_back(grid[gi]);
      med.y.push_back(q2);
      q1s.x.push_back(grid[gi]);
      q1s.y.push_back(q1);
      q3s.x.push_back(grid[gi]);
      q3s.y.push_back(q3);
    }
  }

  std::vector<std::pair<std::string, std::string>> files;
  if (cfg.write_csv) files.emplace_back("convergence.csv", csv.to_string());
  if (cfg.write_svg) {
    files.emplace_back(
        "convergence.svg",
        line_chart_svg("flag distance to the horizon estimate", "n",
                       "flag distance", {med, q1s, q3s}));
  }
  emit_outputs(ctx, "convergence", files);
  std::cout << "convergence: " << cfg.paths << " paths, horizon " << horizon
            << "\n";
  return kExitPass;
}

int cmd_pindown(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.n < 8 * cfg.alpha) {
    throw ConfigError(ctx.config_path +
                      ":0: pindown runs n ∈ {n/4, n/2, n}, so n must be >= "
                      "8*alpha");
  }
  entropy::RateParams params;
  params.n_grid = {cfg.n / 4, cfg.n / 2, cfg.n};
  params.alpha = cfg.alpha;
  params.L = cfg.L;
  params.M = resolve_m(ctx);
  params.paths = cfg.paths;
  params.seed = cfg.seed;
  params.horizon_factor = cfg.horizon_factor;
  params.threads = ctx.threads;
  const entropy::RateReport report = entropy::pindown_rate(cfg.mu, params);

  Csv csv;
  csv.header = {"n", "mean_bound_rate", "decode_success_frac"};
  Series bound{"candidate bound / n", {}, {}}, synth{"budget + bound / n", {}, {}};
  for (const auto& row : report.rows) {
    csv.add_row({std::to_string(row.n), format_double(row.mean_bound_rate),
                 format_double(row.decode_success_frac)});
    bound.x.push_back(row.n);
    bound.y.push_back(row.mean_bound_rate);
    synth.x.push_back(row.n);
    synth.y.push_back(row.synthesis_rate);
    std::cout << "n=" << row.n << " bound/n="
              << format_double(row.mean_bound_rate) << " +/- "
              << format_double(2.0 * row.bound_rate_std_error)
              << " decode=" << format_double(row.decode_success_frac)
              << " synthesis/n=" << format_double(row.synthesis_rate) << "\n";
  }
  std::cout << "strict decrease: " << entropy::to_string(report.decrease)
            << "\noverall: " << entropy::to_string(report.status) << "\n";

  std::vector<std::pair<std::string, std::string>> files;
  if (cfg.write_csv) files.emplace_back("pindown.csv", csv.to_string());
  if (cfg.write_svg) {
    files.emplace_back("pindown.svg",
                       line_chart_svg("endpoint candidate-count rate", "n",
                                      "nats per step", {bound, synth}));
  }
  emit_outputs(ctx, "pindown", files);
  return exit_code(report.status);
}

int cmd_entropy_budget(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.n < 8 * cfg.alpha) {
    throw ConfigError(ctx.config_path +
                      ":0: entropy-budget runs alpha ∈ {alpha, 2*alpha, "
                      "4*alpha}, so n must be >= 8*alpha");
  }
  const double m = resolve_m(ctx);
  std::vector<entropy::BudgetReport> reports;
  for (int a : {cfg.alpha, 2 * cfg.alpha, 4 * cfg.alpha}) {
    entropy::SampleParams params;
    params.pin = {cfg.n, a, cfg.L, m};
    params.paths = cfg.paths;
    params.seed = cfg.seed;
    params.horizon_factor = cfg.horizon_factor;
    params.threads = ctx.threads;
    reports.push_back(entropy::budget_verify(cfg.mu, params));
  }

  Csv csv;
  csv.header = {"n",          "alpha",        "L",
                "M",          "H_tau_rate",   "H_pi_rate",
                "H_sigma_rate", "H_beta_rate", "H_joint_rate",
                "bound_rate", "stderr"};
  Series sum{"component sum / n", {}, {}};
  CheckStatus status = CheckStatus::pass;
  for (const auto& r : reports) {
    const double n = static_cast<double>(r.pin.n);
    const double bound_rate = r.tau.bound_rate + r.pi.bound_rate +
                              r.sigma.bound_rate + r.beta.bound_rate;
    csv.add_row({std::to_string(r.pin.n), std::to_string(r.pin.alpha),
                 format_double(r.pin.L), format_double(r.pin.M),
                 format_double(r.tau.rate), format_double(r.pi.rate),
                 format_double(r.sigma.rate), format_double(r.beta.rate),
                 format_double(r.joint.rate), format_double(bound_rate),
                 format_double(r.joint.estimate.std_error / n)});
    sum.x.push_back(r.pin.alpha);
    sum.y.push_back(r.sum_rate);
    status = entropy::combine(status, r.status);
    std::cout << "alpha=" << r.pin.alpha << " sum/n="
              << format_double(r.sum_rate) << " +/- "
              << format_double(2.0 * r.sum_rate_std_error)
              << " joint/n=" << format_double(r.joint.rate)
              << " bad_freq=" << format_double(r.bad_frequency) << " "
              << entropy::to_string(r.status) << "\n";
  }
  // The budget rate must strictly shrink as the interval length doubles.
  CheckStatus trend = CheckStatus::pass;
  for (size_t i = 1; i < reports.size(); ++i) {
    const auto& a = reports[i];
    const auto& b = reports[i - 1];
    trend = entropy::combine(
        trend, entropy::check_strictly_less(
                   a.sum_rate - 2.0 * a.sum_rate_std_error,
                   a.sum_rate + 2.0 * a.sum_rate_std_error,
                   b.sum_rate - 2.0 * b.sum_rate_std_error,
                   b.sum_rate + 2.0 * b.sum_rate_std_error));
  }
  status = entropy::combine(status, trend);
  std::cout << "strict decrease on doubling alpha: "
            << entropy::to_string(trend) << "\noverall: "
            << entropy::to_string(status) << "\n";

  std::vector<std::pair<std::string, std::string>> files;
  if (cfg.write_csv) files.emplace_back("budget.csv", csv.to_string());
  if (cfg.write_svg) {
    files.emplace_back("budget.svg",
                       line_chart_svg("record entropy budget", "alpha",
                                      "nats per step", {sum}));
  }
  emit_outputs(ctx, "entropy-budget", files);
  return exit_code(status);
}

int cmd_avez(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  std::vector<int> grid;
  for (int i = 1; i <= cfg.avez_nmax; ++i) grid.push_back(i);
  const entropy::AvezReport report = entropy::avez_estimate(cfg.mu, grid);

  bool monotone = true;
  Csv csv;
  csv.header = {"n", "H", "H_over_n"};
  Series rate{"H(n)/n", {}, {}}, slope{"least-squares slope", {}, {}};
  for (size_t i = 0; i < grid.size(); ++i) {
    csv.add_row({std::to_string(grid[i]), format_double(report.step_entropy[i]),
                 format_double(report.rate[i])});
    rate.x.push_back(grid[i]);
    rate.y.push_back(report.rate[i]);
    slope.x.push_back(grid[i]);
    slope.y.push_back(report.slope);
    if (i > 0 && report.rate[i] > report.rate[i - 1] + 1e-12) monotone = false;
  }
  std::cout << "per-step entropy slope = " << format_double(report.slope)
            << " nats (upper bound " << format_double(report.rate.back())
            << ")\n";

  std::vector<std::pair<std::string, std::string>> files;
  if (cfg.write_csv) files.emplace_back("avez.csv", csv.to_string());
  if (cfg.write_svg) {
    files.emplace_back("avez.svg",
                       line_chart_svg("per-step entropy", "n", "nats per step",
                                      {rate, slope}));
  }
  emit_outputs(ctx, "avez", files);
  if (!monotone) {
    std::cerr << "error: H(n)/n failed to be non-increasing\n";
    return kExitFail;
  }
  return kExitPass;
}

int cmd_sweep_m(const RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  pindown::SweepParams params;
  params.n = cfg.n;
  params.window = cfg.window;
  params.epsilon = cfg.epsilon;
  params.paths = cfg.paths;
  params.seed = cfg.seed;
  params.horizon_factor = cfg.horizon_factor;
  params.max_exponent = cfg.max_exponent;
  const pindown::SweepResult result = pindown::sweep_M(cfg.mu, params);

  Csv csv;
  csv.header = {"M", "hit_fraction", "chosen"};
  Series curve{"window hit fraction", {}, {}};
  for (const auto& [m, frac] : result.curve) {
    csv.add_row({format_double(m), format_double(frac),
                 m == result.M ? "1" : "0"});
    curve.x.push_back(m);
    curve.y.push_back(frac);
  }
  std::cout << "sweep: M = " << format_double(result.M) << " (window "
            << cfg.window << ", tolerance " << format_double(cfg.epsilon)
            << ")\n";

  std::vector<std::pair<std::string, std::string>> files;
  if (cfg.write_csv) files.emplace_back("sweep.csv", csv.to_string());
  if (cfg.write_svg) {
    files.emplace_back("sweep.svg",
                       line_chart_svg("critical-time threshold sweep", "M",
                                      "hit fraction", {curve},
                                      /*log2_x=*/true));
  }
  emit_outputs(ctx, "sweep-m", files);
  return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"random-walk boundary laboratory", "boundary-lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  int threads = 1;

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"simulate", "per-path radial parts, singular gaps and drift"},
      {"convergence", "flag distance to the horizon estimate per checkpoint"},
      {"pindown", "endpoint candidate-count rate over a doubling n grid"},
      {"entropy-budget", "record component entropy rates against budgets"},
      {"avez", "exact per-step entropies and their slope"},
      {"sweep-m", "calibrate the critical-time threshold M"}};
  for (const auto& [name, description] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_override, "override the output directory");
    sub->add_option("--seed", seed_override, "override the master seed")
        ->check(CLI::Number);
    sub->add_option("--threads", threads, "worker count")
        ->check(CLI::Range(1, 256));
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    RunContext ctx;
    ctx.cfg = load_config(config_path);
    ctx.config_path = config_path;
    ctx.threads = threads;
    if (sub->count("--out") > 0) ctx.cfg.out_dir = out_override;
    if (sub->count("--seed") > 0) ctx.cfg.seed = seed_override;

    const std::string name = sub->get_name();
    if (name == "simulate") return cmd_simulate(ctx);
    if (name == "convergence") return cmd_convergence(ctx);
    if (name == "pindown") return cmd_pindown(ctx);
    if (name == "entropy-budget") return cmd_entropy_budget(ctx);
    if (name == "avez") return cmd_avez(ctx);
    return cmd_sweep_m(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}

}  // namespace boundarylab::harness
