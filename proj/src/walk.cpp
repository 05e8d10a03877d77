#include "boundarylab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "boundarylab/liegeom.hpp"

namespace boundarylab::walk {

namespace {

using exact::BigInt;

// splitmix64 finalizer; the additive constant is folded into stream_at.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t stream_at(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

std::uint64_t attempt_seed(std::uint64_t master_seed, std::uint64_t path_index,
                           std::uint64_t attempt) {
  return stream_at(stream_at(master_seed, path_index), attempt);
}

std::uint64_t increment_counter(long long index) {
  const auto u = static_cast<std::uint64_t>(index);
  if (index >= 0) return u << 1;
  return ((~u) << 1) | 1ULL;
}

MuSpec MuSpec::validated(std::vector<GroupElement> support,
                         std::vector<Rational> weights) {
  if (support.empty()) throw WalkError("step distribution has empty support");
  if (support.size() != weights.size()) {
    throw WalkError("support and weight counts differ");
  }
  const int d = support.front().dim();
  if (d < 2) throw WalkError("step distribution needs dim >= 2");
  std::set<std::string> keys;
  Rational total(0);
  for (size_t k = 0; k < support.size(); ++k) {
    if (support[k].dim() != d) {
      throw WalkError("support atoms have mixed dimensions");
    }
    if (!(weights[k] > 0)) throw WalkError("weights must be positive");
    total += weights[k];
    if (!keys.insert(support[k].canonical_key()).second) {
      throw WalkError("support atoms must be pairwise distinct");
    }
  }
  if (total != 1) throw WalkError("weights must sum exactly to 1");
  MuSpec mu;
  mu.support = std::move(support);
  mu.weights = std::move(weights);
  return mu;
}

MuSpec reflect(const MuSpec& mu) {
  std::vector<GroupElement> inv;
  inv.reserve(mu.support.size());
  for (const GroupElement& g : mu.support) inv.push_back(g.inverse());
  return MuSpec::validated(std::move(inv), mu.weights);
}

IncrementSampler::IncrementSampler(const MuSpec& mu) {
  if (mu.support.empty()) throw WalkError("sampler needs a nonempty support");
  const BigInt one_shifted = BigInt(1) << 64;
  Rational cumulative(0);
  for (size_t k = 0; k + 1 < mu.weights.size(); ++k) {
    cumulative += mu.weights[k];
    const BigInt t = (boost::multiprecision::numerator(cumulative) << 64) /
                     boost::multiprecision::denominator(cumulative);
    if (t >= one_shifted) throw WalkError("cumulative weight exceeds 1");
    thresholds_.push_back(t.convert_to<std::uint64_t>());
  }
}

int IncrementSampler::at(std::uint64_t seed, long long index) const {
  const std::uint64_t u = stream_at(seed, increment_counter(index));
  for (size_t k = 0; k < thresholds_.size(); ++k) {
    if (u < thresholds_[k]) return static_cast<int>(k);
  }
  return static_cast<int>(thresholds_.size());
}

BilateralPath::BilateralPath(const MuSpec& mu, std::uint64_t seed, int n_fwd,
                             int n_back)
    : n_fwd_(n_fwd), n_back_(n_back), dim_(mu.dim()), seed_(seed) {
  if (n_fwd < 0 || n_back < 0) throw WalkError("horizons must be >= 0");
  if (mu.support.empty()) throw WalkError("empty step distribution");
  const IncrementSampler sampler(mu);
  std::vector<GroupElement> inv_support;
  if (n_back > 0) {
    inv_support.reserve(mu.support.size());
    for (const GroupElement& g : mu.support) inv_support.push_back(g.inverse());
  }

  inc_.reserve(static_cast<size_t>(n_fwd) + n_back);
  std::vector<int> atom(static_cast<size_t>(n_fwd) + n_back, 0);
  for (int i = -n_back + 1; i <= n_fwd; ++i) {
    const int a = sampler.at(seed, i);
    atom[static_cast<size_t>(i + n_back - 1)] = a;
    inc_.push_back(mu.support[static_cast<size_t>(a)]);
  }

  pos_.reserve(static_cast<size_t>(n_fwd) + n_back + 1);
  pos_.push_back(GroupElement::identity(dim_));
  for (int n = 1; n <= n_fwd; ++n) {
    pos_.push_back(pos_.back() * inc_[static_cast<size_t>(n + n_back - 1)]);
  }
  if (n_back > 0) {
    std::vector<GroupElement> back;
    back.reserve(n_back);
    GroupElement w = GroupElement::identity(dim_);
    for (int n = -1; n >= -n_back; --n) {
      w = w * inv_support[static_cast<size_t>(atom[static_cast<size_t>(
              n + n_back)])];  // g_{n+1}^{-1}
      back.push_back(w);
    }
    pos_.insert(pos_.begin(), back.rbegin(), back.rend());
  }
}

const GroupElement& BilateralPath::increment(int i) const {
  if (i < -n_back_ + 1 || i > n_fwd_) {
    throw WalkError("increment index out of stored range");
  }
  return inc_[static_cast<size_t>(i + n_back_ - 1)];
}

const GroupElement& BilateralPath::position(int i) const {
  if (i < -n_back_ || i > n_fwd_) {
    throw WalkError("position index out of stored range");
  }
  return pos_[static_cast<size_t>(i + n_back_)];
}

BilateralPath sample_path(const MuSpec& mu, std::uint64_t seed, int n_fwd,
                          int n_back) {
  return BilateralPath(mu, seed, n_fwd, n_back);
}

ShiftView::ShiftView(const BilateralPath& path, int offset)
    : path_(&path),
      offset_(offset),
      inv_at_offset_(path.position(offset).inverse()) {}

const GroupElement& ShiftView::increment(int j) const {
  return path_->increment(offset_ + j);
}

GroupElement ShiftView::position(int m) const {
  return inv_at_offset_ * path_->position(offset_ + m);
}

ShiftView shift_increments(const BilateralPath& path, int i) {
  return ShiftView(path, i);
}

BoundaryData estimate_boundary(const BilateralPath& path) {
  const int d = path.dim();
  if (path.n_fwd() < 1) throw WalkError("forward horizon too short");
  const GroupElement& w_fwd = path.position(path.n_fwd());
  const GroupElement& w_back = path.position(-path.n_back());

  if (w_fwd.is_identity() && w_back.is_identity()) {
    return BoundaryData{flags::Flag::standard_up(d), flags::Flag::standard_down(d),
                        flags::OrientedFlat::identity(d), 0.0, true};
  }
  if (path.n_back() < 1) throw WalkError("backward horizon required");

  const flags::Flag z_fwd = flags::forward_flag(w_fwd);
  const flags::Flag z_back = flags::forward_flag(w_back);
  if (!flags::is_transverse(z_fwd, z_back)) {
    throw NonTransverseError("boundary flags are not transverse");
  }
  flags::OrientedFlat flat = flags::flat_from_flags(z_fwd, z_back);

  const double inf = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  const int half_fwd = path.n_fwd() / 2;
  if (half_fwd >= 1) {
    try {
      gap = std::max(
          gap, flags::flag_distance(z_fwd,
                                    flags::forward_flag(path.position(half_fwd))));
    } catch (const flags::FlagsError&) {
      gap = inf;  // half-horizon flag indeterminate: no stability evidence
    }
  } else {
    gap = inf;
  }
  const int half_back = path.n_back() / 2;
  if (half_back >= 1) {
    try {
      gap = std::max(gap,
                     flags::flag_distance(
                         z_back, flags::forward_flag(path.position(-half_back))));
    } catch (const flags::FlagsError&) {
      gap = inf;
    }
  } else {
    gap = inf;
  }
  return BoundaryData{z_fwd, z_back, std::move(flat), gap, false};
}

BoundaryEstimate sample_boundary(const MuSpec& mu, std::uint64_t master_seed,
                                 std::uint64_t path_index, int n_fwd,
                                 int n_back, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::uint64_t seed =
        attempt_seed(master_seed, path_index, static_cast<std::uint64_t>(attempt));
    BilateralPath path = sample_path(mu, seed, n_fwd, n_back);
    try {
      BoundaryData boundary = estimate_boundary(path);
      return BoundaryEstimate{std::move(path), std::move(boundary), attempt + 1};
    } catch (const NonTransverseError&) {
      continue;
    }
  }
  throw WalkError("boundary flags stayed non-transverse after " +
                  std::to_string(max_attempts) + " attempts");
}

std::vector<double> contracting_diagnostic(const BilateralPath& path,
                                           const std::vector<int>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (int n : grid) {
    const lie::RadialVector r = lie::radial(path.position(n));
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < r.v.size(); ++i) {
      gap = std::min(gap, r.v[i] - r.v[i + 1]);
    }
    out.push_back(gap);
  }
  return out;
}

}  // namespace boundarylab::walk
