#pragma once
// Shannon entropy estimation over canonical-byte atoms: plug-in estimates
// with Miller-Madow correction and jackknife standard errors, exact small-n
// convolution entropies of a step distribution, per-step (asymptotic) entropy
// estimates, and the two record-level reports:
//
//  * budget_verify   measures the entropy rate of each record component
//                    (times / projection / chamber orders / bad windows) and
//                    of the whole record, and checks every rate against its
//                    closed-form budget, plus joint <= sum of parts.
//  * pindown_rate    measures the mean endpoint candidate-count log-bound per
//                    step over a doubling n grid and checks that it strictly
//                    decreases, attaching budget + bound as the synthesis.
//
// Every verdict is a three-way CheckStatus: an assertion passes or fails only
// when the jackknife band clears the threshold, and is reported inconclusive
// otherwise, so undersampled runs can never produce a false pass.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "boundarylab/pindown.hpp"
#include "boundarylab/walk.hpp"

namespace boundarylab::entropy {

class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Plug-in estimation.

/// Multiset of observed atoms keyed by canonical bytes.
struct CountTable {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;

  void add(const std::string& key, std::uint64_t count = 1);
  /// Pointwise sum.  Commutative and associative, so the merge order of
  /// per-worker tables never affects the result.
  void merge(const CountTable& other);
  std::size_t distinct() const { return counts.size(); }
};

struct EntropyEstimate {
  double value = 0.0;         // plug-in estimate, nats
  double miller_madow = 0.0;  // value + (K - 1) / (2 N), K = observed atoms
  double std_error = 0.0;     // jackknife standard error (0 for exact values)
  std::uint64_t samples = 0;  // N (0 marks an exact, non-sampled value)
};

/// -sum (c/N) log(c/N), with the Miller-Madow corrected value and the
/// leave-one-out jackknife standard error attached.  Throws on an empty
/// table.  Never exceeds log(distinct()).
EntropyEstimate plugin_entropy(const CountTable& counts);

/// Exact entropy -sum w log w of the step distribution itself.
double measure_entropy(const walk::MuSpec& mu);

// ---------------------------------------------------------------------------
// Exact convolution entropies.

inline constexpr std::size_t kDefaultMaxAtoms = 10000000;

/// Exact distribution of the n-step position: probability of each group
/// element as an exact rational, keyed by canonical bytes.  The rationals
/// sum to exactly 1 at every step.
struct ConvolutionTable {
  std::map<std::string, walk::Rational> probs;
  int step = 0;
};

/// One further convolution by mu.  Throws EntropyError when the support
/// would exceed max_atoms (advising the sampling estimator instead).
ConvolutionTable convolve_step(const ConvolutionTable& table,
                               const walk::MuSpec& mu, std::size_t max_atoms);

/// Distribution of the n-step position (n >= 0; n = 0 is the point mass at
/// the identity).
ConvolutionTable step_distribution(const walk::MuSpec& mu, int n,
                                   std::size_t max_atoms = kDefaultMaxAtoms);

/// Exact n-step entropy, computed in floating point from exact rational
/// probabilities.  value == miller_madow, std_error == 0, samples == 0.
EntropyEstimate exact_step_entropy(const walk::MuSpec& mu, int n,
                                   std::size_t max_atoms = kDefaultMaxAtoms);

struct AvezReport {
  std::vector<int> n_grid;
  std::vector<double> step_entropy;  // H(n-step distribution) per grid entry
  std::vector<double> rate;          // step_entropy / n, non-increasing
  double slope = 0.0;                // least-squares slope of H against n
};

/// Exact convolution over an ascending positive grid; slope of the
/// least-squares line through (n, H(n)) estimates the per-step limit, and
/// rate gives the non-increasing sequence of upper bounds for it.  A
/// single-entry grid reports slope = H/n.
AvezReport avez_estimate(const walk::MuSpec& mu, const std::vector<int>& n_grid,
                         std::size_t max_atoms = kDefaultMaxAtoms);

// ---------------------------------------------------------------------------
// Verdicts.

enum class CheckStatus { pass, inconclusive, fail };

const char* to_string(CheckStatus s);

/// Worst of the two (fail dominates, then inconclusive).
CheckStatus combine(CheckStatus a, CheckStatus b);

/// Verdict for "estimate <= bound" given a confidence band [lo, hi] around
/// the estimate: pass when hi <= bound, fail when lo > bound, inconclusive
/// when the band straddles the bound.
CheckStatus check_upper_bound(double lo, double hi, double bound);

/// Verdict for "left < right" given bands for both sides: pass when
/// left_hi < right_lo, fail when left_lo >= right_hi, else inconclusive.
CheckStatus check_strictly_less(double left_lo, double left_hi,
                                double right_lo, double right_hi);

// ---------------------------------------------------------------------------
// Record entropy budget.

struct SampleParams {
  pindown::PinParams pin;
  int paths = 0;
  std::uint64_t seed = 0;
  int horizon_factor = 8;  // boundary horizon = horizon_factor * pin.n
  int threads = 1;

  /// Throws unless pin validates, paths >= 1, horizon_factor >= 1,
  /// threads >= 1.
  void validate() const;
};

struct BudgetComponent {
  EntropyEstimate estimate;  // entropy of the component's canonical bytes
  double rate = 0.0;         // estimate.value / n
  double bound_rate = 0.0;   // closed-form budget / n
  CheckStatus status = CheckStatus::inconclusive;
};

struct BudgetReport {
  pindown::PinParams pin;
  int paths = 0;
  int total_attempts = 0;     // sampled paths including transversality retries
  double bad_frequency = 0.0; // bad interior intervals / interior intervals
  double step_entropy = 0.0;  // exact entropy of one increment
  double epsilon_hat = 0.0;   // 3 * bad_frequency * step_entropy
  // Component budgets per step: times log(alpha)/alpha, projection
  // d log(n L)/n, chamber orders log(d!)/alpha, bad windows
  // epsilon_hat + 2 alpha step_entropy / n.  The joint component's bound is
  // the sum of the four measured rates (subadditivity of joining).
  BudgetComponent tau, pi, sigma, beta, joint;
  double sum_rate = 0.0;            // tau + pi + sigma + beta rates
  double sum_rate_std_error = 0.0;  // component errors combined in quadrature
  CheckStatus status = CheckStatus::inconclusive;  // worst of all verdicts
};

/// Encodes a record per path and measures the component and joint entropy
/// rates against their budgets.
BudgetReport budget_verify(const walk::MuSpec& mu, const SampleParams& params);

// ---------------------------------------------------------------------------
// Candidate-count rate.

struct RateParams {
  std::vector<int> n_grid;  // ascending, each validating against alpha
  int alpha = 0;
  double L = 0.0;
  double M = 0.0;
  int paths = 0;
  std::uint64_t seed = 0;
  int horizon_factor = 8;
  int threads = 1;
  double min_success = 0.99;  // required decode success fraction

  void validate() const;
};

struct RateRow {
  int n = 0;
  double mean_bound_rate = 0.0;      // mean candidate_bound / n, decoded paths
  double bound_rate_std_error = 0.0; // standard error of that mean
  double decode_success_frac = 0.0;
  double joint_rate = 0.0;           // plug-in record entropy / n
  double synthesis_rate = 0.0;       // joint_rate + mean_bound_rate
};

struct RateReport {
  std::vector<RateRow> rows;
  /// Strict decrease of mean_bound_rate along the grid, judged with 2x
  /// standard-error bands on both sides of each consecutive pair.
  CheckStatus decrease = CheckStatus::inconclusive;
  /// fail when any row's decode success is below min_success, else decrease.
  CheckStatus status = CheckStatus::inconclusive;
};

/// Decode success requires exact recovery of the position at the first
/// critical time and of the tail, plus the true rounded projection at the
/// last critical time landing within the decoder's error radius.
RateReport pindown_rate(const walk::MuSpec& mu, const RateParams& params);

}  // namespace boundarylab::entropy
