#include "boundarylab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "boundarylab/liegeom.hpp"
#include "boundarylab/parallel.hpp"

namespace boundarylab::entropy {
namespace {

using exact::GroupElement;

double to_double(const walk::Rational& r) { return r.convert_to<double>(); }

// c * log(c) with the 0 log 0 = 0 convention.
double xlogx(double c) { return c > 0.0 ? c * std::log(c) : 0.0; }

double least_squares_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < m; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace

// ---------------------------------------------------------------------------
// Plug-in estimation.

void CountTable::add(const std::string& key, std::uint64_t count) {
  if (count == 0) return;
  counts[key] += count;
  total += count;
}

void CountTable::merge(const CountTable& other) {
  for (const auto& [key, count] : other.counts) counts[key] += count;
  total += other.total;
}

EntropyEstimate plugin_entropy(const CountTable& counts) {
  if (counts.total == 0 || counts.counts.empty()) {
    throw EntropyError("plugin_entropy: empty count table");
  }
  const double n = static_cast<double>(counts.total);
  double s = 0.0;  // sum of c log c
  for (const auto& [key, c] : counts.counts) {
    if (c == 0) throw EntropyError("plugin_entropy: zero count stored");
    s += xlogx(static_cast<double>(c));
  }
  EntropyEstimate est;
  est.samples = counts.total;
  est.value = std::max(0.0, std::log(n) - s / n);
  const double k = static_cast<double>(counts.counts.size());
  est.miller_madow = est.value + (k - 1.0) / (2.0 * n);
  if (counts.total >= 2) {
    // Leave-one-out values share the closed form
    //   H_(a) = log(N-1) - S_a/(N-1),
    //   S_a = S - c_a log c_a + (c_a - 1) log(c_a - 1),
    // so the jackknife variance needs one pass over atoms, not over samples.
    double mean = 0.0;
    std::vector<std::pair<double, double>> loo;  // (count, H_(a))
    loo.reserve(counts.counts.size());
    for (const auto& [key, c] : counts.counts) {
      const double ca = static_cast<double>(c);
      const double sa = s - xlogx(ca) + xlogx(ca - 1.0);
      const double ha = std::log(n - 1.0) - sa / (n - 1.0);
      loo.emplace_back(ca, ha);
      mean += ca * ha;
    }
    mean /= n;
    double var = 0.0;
    for (const auto& [ca, ha] : loo) var += ca * (ha - mean) * (ha - mean);
    var *= (n - 1.0) / n;
    est.std_error = std::sqrt(std::max(0.0, var));
  }
  return est;
}

double measure_entropy(const walk::MuSpec& mu) {
  double h = 0.0;
  for (const auto& w : mu.weights) h -= xlogx(to_double(w));
  return h;
}

// ---------------------------------------------------------------------------
// Exact convolution entropies.

ConvolutionTable convolve_step(const ConvolutionTable& table,
                               const walk::MuSpec& mu, std::size_t max_atoms) {
  ConvolutionTable out;
  out.step = table.step + 1;
  for (const auto& [key, p] : table.probs) {
    const GroupElement g = GroupElement::from_canonical_key(key);
    for (size_t j = 0; j < mu.support.size(); ++j) {
      out.probs[(g * mu.support[j]).canonical_key()] += p * mu.weights[j];
    }
    if (out.probs.size() > max_atoms) {
      throw EntropyError(
          "exact convolution support exceeds the atom budget at step " +
          std::to_string(out.step) +
          "; use the sampling estimator (plugin_entropy over sampled "
          "positions) instead");
    }
  }
  return out;
}

ConvolutionTable step_distribution(const walk::MuSpec& mu, int n,
                                   std::size_t max_atoms) {
  if (n < 0) throw EntropyError("step_distribution: negative step");
  if (mu.support.empty()) throw EntropyError("step_distribution: empty measure");
  ConvolutionTable table;
  table.step = 0;
  table.probs[GroupElement::identity(mu.dim()).canonical_key()] =
      walk::Rational(1);
  for (int i = 0; i < n; ++i) table = convolve_step(table, mu, max_atoms);
  return table;
}

EntropyEstimate exact_step_entropy(const walk::MuSpec& mu, int n,
                                   std::size_t max_atoms) {
  const ConvolutionTable table = step_distribution(mu, n, max_atoms);
  double h = 0.0;
  for (const auto& [key, p] : table.probs) h -= xlogx(to_double(p));
  EntropyEstimate est;
  est.value = std::max(0.0, h);
  est.miller_madow = est.value;
  est.std_error = 0.0;
  est.samples = 0;
  return est;
}

AvezReport avez_estimate(const walk::MuSpec& mu, const std::vector<int>& n_grid,
                         std::size_t max_atoms) {
  if (n_grid.empty()) throw EntropyError("avez_estimate: empty grid");
  for (size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw EntropyError("avez_estimate: grid must be ascending and >= 1");
    }
  }
  AvezReport report;
  report.n_grid = n_grid;
  ConvolutionTable table = step_distribution(mu, 0, max_atoms);
  size_t next = 0;
  for (int step = 1; step <= n_grid.back(); ++step) {
    table = convolve_step(table, mu, max_atoms);
    if (step == n_grid[next]) {
      double h = 0.0;
      for (const auto& [key, p] : table.probs) h -= xlogx(to_double(p));
      h = std::max(0.0, h);
      report.step_entropy.push_back(h);
      report.rate.push_back(h / static_cast<double>(step));
      ++next;
    }
  }
  if (n_grid.size() == 1) {
    report.slope = report.rate.front();
  } else {
    std::vector<double> x(n_grid.begin(), n_grid.end());
    report.slope = least_squares_slope(x, report.step_entropy);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Verdicts.

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::inconclusive:
      return "inconclusive";
    case CheckStatus::fail:
      return "fail";
  }
  return "fail";
}

CheckStatus combine(CheckStatus a, CheckStatus b) {
  if (a == CheckStatus::fail || b == CheckStatus::fail) {
    return CheckStatus::fail;
  }
  if (a == CheckStatus::inconclusive || b == CheckStatus::inconclusive) {
    return CheckStatus::inconclusive;
  }
  return CheckStatus::pass;
}

CheckStatus check_upper_bound(double lo, double hi, double bound) {
  if (hi <= bound) return CheckStatus::pass;
  if (lo > bound) return CheckStatus::fail;
  return CheckStatus::inconclusive;
}

CheckStatus check_strictly_less(double left_lo, double left_hi,
                                double right_lo, double right_hi) {
  if (left_hi < right_lo) return CheckStatus::pass;
  if (left_lo >= right_hi) return CheckStatus::fail;
  return CheckStatus::inconclusive;
}

// ---------------------------------------------------------------------------
// Record entropy budget.

void SampleParams::validate() const {
  pin.validate();
  if (paths < 1) throw EntropyError("sampling: paths must be >= 1");
  if (horizon_factor < 1) {
    throw EntropyError("sampling: horizon_factor must be >= 1");
  }
  if (threads < 1) throw EntropyError("sampling: threads must be >= 1");
}

namespace {

struct PathRecord {
  walk::BoundaryEstimate estimate;
  pindown::CriticalData critical;
  pindown::PinDownRecord record;
};

PathRecord make_record(const walk::MuSpec& mu, std::uint64_t seed,
                       std::uint64_t index, const pindown::PinParams& pin,
                       int horizon_factor) {
  const int horizon = horizon_factor * pin.n;
  PathRecord out{
      walk::sample_boundary(mu, seed, index, horizon, horizon), {}, {}};
  out.critical = pindown::critical_times(out.estimate.path,
                                         out.estimate.boundary.flat, pin);
  out.record = pindown::encode_record(out.estimate.path,
                                      out.estimate.boundary.flat, pin,
                                      out.critical);
  return out;
}

// Band [value - 2 se, miller_madow + 2 se] scaled to a rate; the corrected
// value caps the upper edge so undersampling bias cannot manufacture a pass.
CheckStatus budget_status(const EntropyEstimate& est, double n, double bound) {
  const double lo = (est.value - 2.0 * est.std_error) / n;
  const double hi = (est.miller_madow + 2.0 * est.std_error) / n;
  return check_upper_bound(lo, hi, bound);
}

}  // namespace

BudgetReport budget_verify(const walk::MuSpec& mu, const SampleParams& params) {
  params.validate();
  const pindown::PinParams& pin = params.pin;
  const int d = mu.dim();
  const double n = static_cast<double>(pin.n);

  struct Outcome {
    std::string tau, pi, sigma, beta, joint;
    int attempts = 0;
    int interior = 0;
    int interior_bad = 0;
  };
  std::vector<Outcome> slots(static_cast<size_t>(params.paths));
  util::parallel_for_index(params.paths, params.threads, [&](int p) {
    const PathRecord rec = make_record(mu, params.seed,
                                       static_cast<std::uint64_t>(p), pin,
                                       params.horizon_factor);
    Outcome& o = slots[static_cast<size_t>(p)];
    o.tau = rec.record.tau_bytes();
    o.pi = rec.record.pi_bytes();
    o.sigma = rec.record.sigma_bytes();
    o.beta = rec.record.beta_bytes();
    o.joint = rec.record.serialize();
    o.attempts = rec.estimate.attempts;
    const int intervals = pindown::interval_count(pin.n, pin.alpha);
    for (int k = 1; k + 1 < intervals; ++k) {
      ++o.interior;
      if (!rec.critical.good_mask[static_cast<size_t>(k)]) ++o.interior_bad;
    }
  });

  CountTable t_tau, t_pi, t_sigma, t_beta, t_joint;
  long long interior = 0, interior_bad = 0;
  BudgetReport report;
  report.pin = pin;
  report.paths = params.paths;
  for (const Outcome& o : slots) {
    t_tau.add(o.tau);
    t_pi.add(o.pi);
    t_sigma.add(o.sigma);
    t_beta.add(o.beta);
    t_joint.add(o.joint);
    report.total_attempts += o.attempts;
    interior += o.interior;
    interior_bad += o.interior_bad;
  }

  report.step_entropy = measure_entropy(mu);
  report.bad_frequency =
      interior > 0 ? static_cast<double>(interior_bad) /
                         static_cast<double>(interior)
                   : 0.0;
  report.epsilon_hat = 3.0 * report.bad_frequency * report.step_entropy;

  const auto fill = [&](BudgetComponent& c, const CountTable& t,
                        double bound_rate) {
    c.estimate = plugin_entropy(t);
    c.rate = c.estimate.value / n;
    c.bound_rate = bound_rate;
    c.status = budget_status(c.estimate, n, bound_rate);
  };
  const double alpha = static_cast<double>(pin.alpha);
  fill(report.tau, t_tau, std::log(alpha) / alpha);
  fill(report.pi, t_pi, d * std::log(n * pin.L) / n);
  fill(report.sigma, t_sigma, std::lgamma(d + 1.0) / alpha);
  fill(report.beta, t_beta,
       report.epsilon_hat + 2.0 * alpha * report.step_entropy / n);

  report.sum_rate =
      report.tau.rate + report.pi.rate + report.sigma.rate + report.beta.rate;
  report.sum_rate_std_error =
      std::sqrt(report.tau.estimate.std_error * report.tau.estimate.std_error +
                report.pi.estimate.std_error * report.pi.estimate.std_error +
                report.sigma.estimate.std_error *
                    report.sigma.estimate.std_error +
                report.beta.estimate.std_error *
                    report.beta.estimate.std_error) /
      n;

  // Joining the components can only add entropy up to the sum of the parts;
  // judged on the raw plug-in values with the joint jackknife band.
  report.joint.estimate = plugin_entropy(t_joint);
  report.joint.rate = report.joint.estimate.value / n;
  report.joint.bound_rate = report.sum_rate;
  report.joint.status = check_upper_bound(
      (report.joint.estimate.value - 2.0 * report.joint.estimate.std_error) /
          n,
      report.joint.rate,
      report.sum_rate + 2.0 * report.joint.estimate.std_error / n);

  report.status = report.tau.status;
  report.status = combine(report.status, report.pi.status);
  report.status = combine(report.status, report.sigma.status);
  report.status = combine(report.status, report.beta.status);
  report.status = combine(report.status, report.joint.status);
  return report;
}

// ---------------------------------------------------------------------------
// Candidate-count rate.

void RateParams::validate() const {
  if (n_grid.empty()) throw EntropyError("pindown_rate: empty n grid");
  for (size_t i = 0; i < n_grid.size(); ++i) {
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw EntropyError("pindown_rate: n grid must be ascending");
    }
    pindown::PinParams pin{n_grid[i], alpha, L, M};
    pin.validate();
  }
  if (paths < 1) throw EntropyError("pindown_rate: paths must be >= 1");
  if (horizon_factor < 1) {
    throw EntropyError("pindown_rate: horizon_factor must be >= 1");
  }
  if (threads < 1) throw EntropyError("pindown_rate: threads must be >= 1");
  if (!(min_success >= 0.0 && min_success <= 1.0)) {
    throw EntropyError("pindown_rate: min_success must lie in [0, 1]");
  }
}

RateReport pindown_rate(const walk::MuSpec& mu, const RateParams& params) {
  params.validate();
  RateReport report;
  report.decrease = CheckStatus::pass;
  CheckStatus overall = CheckStatus::pass;

  for (int n : params.n_grid) {
    const pindown::PinParams pin{n, params.alpha, params.L, params.M};

    struct Outcome {
      bool decoded = false;
      double bound = 0.0;
      std::string joint;
    };
    std::vector<Outcome> slots(static_cast<size_t>(params.paths));
    util::parallel_for_index(params.paths, params.threads, [&](int p) {
      const PathRecord rec = make_record(mu, params.seed,
                                         static_cast<std::uint64_t>(p), pin,
                                         params.horizon_factor);
      Outcome& o = slots[static_cast<size_t>(p)];
      o.joint = rec.record.serialize();
      const walk::BilateralPath& path = rec.estimate.path;
      const flags::OrientedFlat& flat = rec.estimate.boundary.flat;
      try {
        const pindown::DecodeResult dec =
            pindown::decode_pin(flat, rec.record, pin);
        const GroupElement w_first =
            rec.record.tau.empty()
                ? GroupElement::identity(path.dim())
                : path.position(rec.record.tau.front());
        const int last = rec.record.tau.empty() ? 0 : rec.record.tau.back();
        const GroupElement tail =
            path.position(last).inverse() * path.position(n);
        bool ok = dec.w_first == w_first && dec.tail == tail;
        flags::FlatProjector proj(flat);
        const lie::LatticePoint truth = lie::round_lattice(
            lie::iota(proj.project(path.position(last)).pi.v));
        for (size_t i = 0; ok && i < truth.x.size(); ++i) {
          const double gap = std::abs(static_cast<double>(
              truth.x[i] - dec.pi_last_estimate.x[i]));
          ok = gap <= dec.error_radius;
        }
        if (ok) {
          const double ball = pindown::measure_log_gamma_ball(path, flat, pin);
          o.bound = pindown::candidate_bound(rec.record, pin, dec.error_radius,
                                             ball);
          o.decoded = true;
        }
      } catch (const pindown::PinDownError&) {
        o.decoded = false;
      }
    });

    CountTable joint;
    std::vector<double> rates;
    rates.reserve(slots.size());
    for (const Outcome& o : slots) {
      joint.add(o.joint);
      if (o.decoded) rates.push_back(o.bound / static_cast<double>(n));
    }
    RateRow row;
    row.n = n;
    row.decode_success_frac =
        static_cast<double>(rates.size()) / static_cast<double>(params.paths);
    if (!rates.empty()) {
      double mean = 0.0;
      for (double r : rates) mean += r;
      mean /= static_cast<double>(rates.size());
      double var = 0.0;
      for (double r : rates) var += (r - mean) * (r - mean);
      row.mean_bound_rate = mean;
      if (rates.size() >= 2) {
        row.bound_rate_std_error = std::sqrt(
            var / (static_cast<double>(rates.size()) *
                   static_cast<double>(rates.size() - 1)));
      }
    }
    row.joint_rate =
        plugin_entropy(joint).value / static_cast<double>(n);
    row.synthesis_rate = row.joint_rate + row.mean_bound_rate;
    if (row.decode_success_frac < params.min_success) {
      overall = CheckStatus::fail;
    }
    report.rows.push_back(row);
  }

  for (size_t i = 1; i < report.rows.size(); ++i) {
    const RateRow& prev = report.rows[i - 1];
    const RateRow& next = report.rows[i];
    report.decrease = combine(
        report.decrease,
        check_strictly_less(
            next.mean_bound_rate - 2.0 * next.bound_rate_std_error,
            next.mean_bound_rate + 2.0 * next.bound_rate_std_error,
            prev.mean_bound_rate - 2.0 * prev.bound_rate_std_error,
            prev.mean_bound_rate + 2.0 * prev.bound_rate_std_error));
  }
  report.status = combine(overall, report.decrease);
  return report;
}

}  // namespace boundarylab::entropy
