#pragma once
// Interval grid over a walk segment [0, n], critical times (first return of
// each interval to an M-neighborhood of the limiting flat), good/bad interval
// classification, the four-part record (times / summed projection / chamber
// orders / bad-window increments), and the decoder that pins the endpoint
// position down to a candidate set whose log-size candidate_bound reports.
//
// The record is designed so that the decoder, given only the flat and the
// record, recovers the position at the first critical time and the tail
// after the last one exactly, and the flat projection at the last critical
// time up to an explicit error radius.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "boundarylab/flags.hpp"
#include "boundarylab/liegeom.hpp"
#include "boundarylab/walk.hpp"

namespace boundarylab::pindown {

using exact::GroupElement;

class PinDownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PinParams {
  int n = 0;        // segment horizon: times 0..n, increments 1..n
  int alpha = 1;    // interval length
  double L = 0.0;   // step-size bound defining L-good intervals
  double M = 0.0;   // flat-distance threshold defining critical times

  /// Throws unless alpha >= 1, L > 0, M > 0, n >= 2*alpha.
  void validate() const;
};

/// Number of intervals covering times [0, n]: ceil(n/alpha); the last
/// interval absorbs the partial remainder and the endpoint n itself.
int interval_count(int n, int alpha);

/// Inclusive time range [lo, hi] of interval k.
std::pair<int, int> interval_bounds(int n, int alpha, int k);

/// Inclusive increment-index range of the window around interval k (the
/// interval together with both neighbors, clipped to [1, n]).
std::pair<int, int> window_bounds(int n, int alpha, int k);

struct CriticalData {
  /// First time of each interval within distance M of the flat, ascending;
  /// intervals without such a time contribute nothing.
  std::vector<int> critical_times;
  /// Interval k is good when it has a critical time and every increment in
  /// it has radial norm <= L; the first and last intervals are always bad.
  std::vector<bool> good_mask;
  /// Pair index j (0-based, pairing critical_times[j] with [j+1]) is doubly
  /// good when the two times lie in consecutive intervals, both good.
  std::set<int> doubly_good;
};

CriticalData critical_times(const walk::BilateralPath& path,
                            const flags::OrientedFlat& flat,
                            const PinParams& params);

struct PinDownRecord {
  int dim = 0;
  int n = 0;
  int alpha = 0;
  /// Critical times, ascending.
  std::vector<int> tau;
  /// Rounded lattice image of the sum over doubly good pairs j of
  /// proj(w_{t_j}) - proj(w_{t_{j+1}}) (note the descending order; the
  /// decoder negates).
  lie::LatticePoint pi;
  /// For each non-doubly-good pair j: the chamber order (sorting
  /// permutation) of proj(w_{t_{j+1}}) - proj(w_{t_j}).
  std::map<int, lie::WeylElement> sigma;
  /// For each bad interval k: the increments g_i with i in the window of k.
  std::map<int, std::vector<GroupElement>> beta;

  /// Canonical bytes: equal records serialize identically and vice versa.
  std::string serialize() const;
  static PinDownRecord deserialize(const std::string& bytes);

  /// Component byte strings (used as entropy atoms; serialize() is their
  /// concatenation under one header).
  std::string tau_bytes() const;
  std::string pi_bytes() const;
  std::string sigma_bytes() const;
  std::string beta_bytes() const;

  bool operator==(const PinDownRecord& o) const;
  bool operator!=(const PinDownRecord& o) const { return !(*this == o); }
};

PinDownRecord encode_record(const walk::BilateralPath& path,
                            const flags::OrientedFlat& flat,
                            const PinParams& params);
/// Same, reusing an already computed CriticalData for this (path, flat).
PinDownRecord encode_record(const walk::BilateralPath& path,
                            const flags::OrientedFlat& flat,
                            const PinParams& params,
                            const CriticalData& critical);

struct DecodeResult {
  /// Position at the first critical time, reconstructed exactly; identity
  /// when there are no critical times.
  GroupElement w_first;
  /// Lattice estimate of the flat projection at the last critical time.
  lie::LatticePoint pi_last_estimate;
  /// Exact inverse-position-times-endpoint: w_{t_r}^{-1} w_n.
  GroupElement tail;
  /// The true rounded projection at the last critical time lies within this
  /// radius of pi_last_estimate (validated, not assumed).
  double error_radius = 0.0;
};

/// Reconstructs from the flat and the record alone.  Throws on record/params
/// mismatch or missing window coverage (either indicates an encoder bug).
DecodeResult decode_pin(const flags::OrientedFlat& flat,
                        const PinDownRecord& record, const PinParams& params);

/// log of the candidate-count bound for the endpoint position:
/// (d-1) * log(2*error_radius + 1) + log_gamma_ball, where log_gamma_ball is
/// the measured log-count of distinct group elements observed within
/// flat-distance M of a single projection cell (see measure_log_gamma_ball).
double candidate_bound(const PinDownRecord& record, const PinParams& params,
                       double error_radius, double log_gamma_ball);

/// Empirical log Gamma-ball count on one path: elements w_i (0 <= i <= n)
/// within flat-distance M of the flat are grouped by their rounded lattice
/// projection; returns log of the largest group's distinct-element count
/// (log 1 = 0 when nothing is within distance M).
double measure_log_gamma_ball(const walk::BilateralPath& path,
                              const flags::OrientedFlat& flat,
                              const PinParams& params);

struct SweepParams {
  int n = 0;                 // profile horizon (times 0..n)
  int window = 0;            // window length for the hit criterion
  double epsilon = 0.1;      // tolerated miss probability
  int paths = 0;             // sample size
  std::uint64_t seed = 0;    // master seed (path index = 0..paths-1)
  int horizon_factor = 8;    // boundary estimation horizon multiplier
  int max_exponent = 12;     // grid 2^0 .. 2^max_exponent
};

struct SweepResult {
  double M = 0.0;
  /// One (M, hit probability) point per grid value up to the accepted one.
  std::vector<std::pair<double, double>> curve;
};

/// Smallest M on the doubling grid such that the fraction of (path, window)
/// pairs containing a time with dist <= M is at least 1 - epsilon; windows
/// tile [1, n] (a trailing partial window is dropped).  Throws when the grid
/// is exhausted (advising a larger grid).
SweepResult sweep_M(const walk::MuSpec& mu, const SweepParams& params);

}  // namespace boundarylab::pindown
