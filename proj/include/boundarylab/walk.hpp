#pragma once
// Bilateral random-walk engine.
//
// A path stores exact increments g_i for i in [-n_back+1, n_fwd] and exact
// positions w_i for i in [-n_back, n_fwd], with w_0 = e, w_n = w_{n-1} g_n
// for n >= 1 and w_n = w_{n+1} g_{n+1}^{-1} for n <= -1 (so the backward
// sequence is itself a walk driven by the reflected measure).  Increments are
// drawn by inverse-CDF on a counter-based generator, so a draw depends only
// on (seed, increment index): extending either horizon, re-ordering paths
// across workers, or replaying a path never changes earlier increments.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "boundarylab/exactgroup.hpp"
#include "boundarylab/flags.hpp"

namespace boundarylab::walk {

using exact::GroupElement;
using Rational = boost::multiprecision::cpp_rational;

class WalkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the two boundary flags of a sampled path fail transversality;
/// callers resample deterministically and count the rejection.
class NonTransverseError : public WalkError {
 public:
  using WalkError::WalkError;
};

/// Finitely supported step distribution with exact rational weights.
struct MuSpec {
  std::vector<GroupElement> support;
  std::vector<Rational> weights;

  int dim() const { return support.empty() ? 0 : support.front().dim(); }
  size_t atoms() const { return support.size(); }

  /// Validates: non-empty, uniform dimension, weights positive and summing
  /// exactly to 1, support pairwise distinct.
  static MuSpec validated(std::vector<GroupElement> support,
                          std::vector<Rational> weights);
};

/// Step distribution of the inverted steps: support inverted elementwise,
/// weights preserved (atom order follows the input).
MuSpec reflect(const MuSpec& mu);

// ---------------------------------------------------------------------------
// Counter-based randomness.

/// index-th output of a splitmix64 stream with the given seed, computed in
/// O(1) from the counter alone.
std::uint64_t stream_at(std::uint64_t seed, std::uint64_t index);

/// Stream seed for one sampling attempt of one path.  Distinct
/// (master_seed, path_index, attempt) triples get independent streams, and
/// the value does not depend on scheduling, so any worker count reproduces
/// the same paths.
std::uint64_t attempt_seed(std::uint64_t master_seed, std::uint64_t path_index,
                           std::uint64_t attempt);

/// Maps a signed increment index to the generator counter (zigzag: forward
/// indices to even counters, backward to odd).
std::uint64_t increment_counter(long long index);

/// Inverse-CDF sampler over the atoms of a MuSpec.  Thresholds are
/// floor(cumulative * 2^64), computed once in exact rational arithmetic, so
/// the per-atom selection bias is below 2^-64.
class IncrementSampler {
 public:
  explicit IncrementSampler(const MuSpec& mu);

  /// Support index of the atom drawn for the given signed increment index.
  int at(std::uint64_t seed, long long index) const;

 private:
  std::vector<std::uint64_t> thresholds_;  // one per atom except the last
};

// ---------------------------------------------------------------------------
// Paths.

class BilateralPath {
 public:
  BilateralPath(const MuSpec& mu, std::uint64_t seed, int n_fwd, int n_back);

  int n_fwd() const { return n_fwd_; }
  int n_back() const { return n_back_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  /// g_i for i in [-n_back+1, n_fwd].
  const GroupElement& increment(int i) const;
  /// w_i for i in [-n_back, n_fwd].
  const GroupElement& position(int i) const;

 private:
  int n_fwd_ = 0;
  int n_back_ = 0;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<GroupElement> inc_;  // index i stored at i + n_back - 1
  std::vector<GroupElement> pos_;  // index i stored at i + n_back
};

BilateralPath sample_path(const MuSpec& mu, std::uint64_t seed, int n_fwd,
                          int n_back);

/// View of the path re-based at position i: increment(j) is the (i+j)-th
/// increment of the parent and position(m) equals w_i^{-1} w_{i+m} exactly.
class ShiftView {
 public:
  ShiftView(const BilateralPath& path, int offset);

  int offset() const { return offset_; }
  const GroupElement& increment(int j) const;
  GroupElement position(int m) const;

 private:
  const BilateralPath* path_;
  int offset_;
  GroupElement inv_at_offset_;
};

ShiftView shift_increments(const BilateralPath& path, int i);

// ---------------------------------------------------------------------------
// Boundary estimation.

/// Horizon estimate of the two limit flags and the flat they span.
/// horizon_gap is the largest flag movement between the half-horizon and
/// full-horizon estimates on either side (+inf when a half-horizon flag is
/// indeterminate, i.e. no stability evidence); degenerate marks the fallback
/// for walks that have not moved by either horizon, which are treated as
/// centered on the base point with the standard flat.
struct BoundaryData {
  flags::Flag z_fwd;
  flags::Flag z_back;
  flags::OrientedFlat flat;
  double horizon_gap = 0.0;
  bool degenerate = false;
};

/// z_fwd from the position at the forward horizon, z_back from the position
/// at the backward horizon; throws flags::FlagsError when a full-horizon flag
/// is indeterminate (horizon too short) and NonTransverseError when the pair
/// spans no flat.
BoundaryData estimate_boundary(const BilateralPath& path);

/// One path together with its boundary estimate; attempts counts the sampled
/// paths consumed (attempts - 1 were rejected as non-transverse).
struct BoundaryEstimate {
  BilateralPath path;
  BoundaryData boundary;
  int attempts = 1;
};

/// Samples paths at seeds attempt_seed(master_seed, path_index, 0, 1, ...)
/// until the boundary flags are transverse.  Rejections are counted, never
/// hidden; anything other than a transversality failure propagates.
BoundaryEstimate sample_boundary(const MuSpec& mu, std::uint64_t master_seed,
                                 std::uint64_t path_index, int n_fwd,
                                 int n_back, int max_attempts = 64);

// ---------------------------------------------------------------------------
// Diagnostics.

/// For each n in grid: the smallest gap between consecutive entries of the
/// radial part of w_n.  Growth along the grid is the working test that the
/// configuration is contracting; the identity walk yields all zeros.
std::vector<double> contracting_diagnostic(const BilateralPath& path,
                                           const std::vector<int>& grid);

}  // namespace boundarylab::walk
