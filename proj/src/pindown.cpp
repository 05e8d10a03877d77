#include "boundarylab/pindown.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace boundarylab::pindown {

namespace {

using exact::append_varint;
using exact::read_varint;

constexpr char kRecordVersion = 1;

std::uint64_t zigzag(long long v) {
  return (static_cast<std::uint64_t>(v) << 1) ^
         static_cast<std::uint64_t>(v >> 63);
}

long long unzigzag(std::uint64_t u) {
  return static_cast<long long>(u >> 1) ^ -static_cast<long long>(u & 1);
}

int interval_of(int n, int alpha, int t) {
  return std::min(t / alpha, interval_count(n, alpha) - 1);
}

}  // namespace

void PinParams::validate() const {
  if (alpha < 1) throw PinDownError("pin params: alpha must be >= 1");
  if (!(L > 0.0)) throw PinDownError("pin params: L must be positive");
  if (!(M > 0.0)) throw PinDownError("pin params: M must be positive");
  if (n < 2 * alpha) throw PinDownError("pin params: n must be >= 2*alpha");
}

int interval_count(int n, int alpha) { return (n + alpha - 1) / alpha; }

std::pair<int, int> interval_bounds(int n, int alpha, int k) {
  const int count = interval_count(n, alpha);
  if (k < 0 || k >= count) throw PinDownError("interval index out of range");
  const int lo = k * alpha;
  const int hi = (k == count - 1) ? n : (k + 1) * alpha - 1;
  return {lo, hi};
}

std::pair<int, int> window_bounds(int n, int alpha, int k) {
  const int count = interval_count(n, alpha);
  if (k < 0 || k >= count) throw PinDownError("window index out of range");
  const int lo = std::max(1, (k - 1) * alpha);
  const int hi = (k + 1 <= count - 1) ? interval_bounds(n, alpha, k + 1).second : n;
  return {lo, hi};
}

CriticalData critical_times(const walk::BilateralPath& path,
                            const flags::OrientedFlat& flat,
                            const PinParams& params) {
  params.validate();
  if (path.dim() != flat.dim())
    throw PinDownError("critical_times: path/flat dimension mismatch");
  if (path.n_fwd() < params.n)
    throw PinDownError("critical_times: path horizon shorter than n");

  const int count = interval_count(params.n, params.alpha);
  CriticalData out;
  out.good_mask.assign(static_cast<size_t>(count), false);
  std::vector<int> interval_of_time;  // parallel to critical_times

  flags::FlatProjector proj(flat);
  for (int k = 0; k < count; ++k) {
    const auto [lo, hi] = interval_bounds(params.n, params.alpha, k);
    int hit = -1;
    for (int i = lo; i <= hi; ++i) {
      if (proj.within(path.position(i), params.M)) {
        hit = i;
        break;
      }
    }
    if (hit >= 0) {
      out.critical_times.push_back(hit);
      interval_of_time.push_back(k);
    }
    if (k == 0 || k == count - 1) continue;  // endpoints stay bad
    bool steps_ok = true;
    for (int i = lo; i <= hi && steps_ok; ++i)
      steps_ok = lie::radial(path.increment(i + 1)).norm() <= params.L;
    out.good_mask[static_cast<size_t>(k)] = steps_ok && hit >= 0;
  }

  for (size_t j = 0; j + 1 < out.critical_times.size(); ++j) {
    const int a = interval_of_time[j];
    const int b = interval_of_time[j + 1];
    if (b == a + 1 && out.good_mask[static_cast<size_t>(a)] &&
        out.good_mask[static_cast<size_t>(b)])
      out.doubly_good.insert(static_cast<int>(j));
  }
  return out;
}

PinDownRecord encode_record(const walk::BilateralPath& path,
                            const flags::OrientedFlat& flat,
                            const PinParams& params) {
  return encode_record(path, flat, params, critical_times(path, flat, params));
}

PinDownRecord encode_record(const walk::BilateralPath& path,
                            const flags::OrientedFlat& flat,
                            const PinParams& params,
                            const CriticalData& critical) {
  params.validate();
  const int d = path.dim();
  if (static_cast<int>(critical.good_mask.size()) !=
      interval_count(params.n, params.alpha))
    throw PinDownError("encode: critical data does not match params");
  PinDownRecord rec;
  rec.dim = d;
  rec.n = params.n;
  rec.alpha = params.alpha;
  rec.tau = critical.critical_times;

  flags::FlatProjector proj(flat);
  const size_t r = rec.tau.size();
  std::vector<Eigen::VectorXd> pis(r);
  for (size_t j = 0; j < r; ++j)
    pis[j] = proj.project(path.position(rec.tau[j])).pi.v;

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (size_t j = 0; j + 1 < r; ++j) {
    if (critical.doubly_good.count(static_cast<int>(j))) {
      acc += pis[j] - pis[j + 1];
    } else {
      rec.sigma[static_cast<int>(j)] = lie::weyl_sort(pis[j + 1] - pis[j]).first;
    }
  }
  rec.pi = lie::round_lattice(lie::iota(acc));

  const int count = interval_count(params.n, params.alpha);
  for (int k = 0; k < count; ++k) {
    if (critical.good_mask[static_cast<size_t>(k)]) continue;
    const auto [lo, hi] = window_bounds(params.n, params.alpha, k);
    std::vector<GroupElement> inc;
    inc.reserve(static_cast<size_t>(hi - lo + 1));
    for (int i = lo; i <= hi; ++i) inc.push_back(path.increment(i));
    rec.beta.emplace(k, std::move(inc));
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string PinDownRecord::tau_bytes() const {
  std::string out;
  append_varint(out, tau.size());
  int prev = 0;
  bool first = true;
  for (int t : tau) {
    append_varint(out, static_cast<std::uint64_t>(first ? t : t - prev));
    prev = t;
    first = false;
  }
  return out;
}

std::string PinDownRecord::pi_bytes() const {
  std::string out;
  append_varint(out, pi.x.size());
  for (long long c : pi.x) append_varint(out, zigzag(c));
  return out;
}

std::string PinDownRecord::sigma_bytes() const {
  std::string out;
  append_varint(out, sigma.size());
  for (const auto& [j, w] : sigma) {
    append_varint(out, static_cast<std::uint64_t>(j));
    append_varint(out, w.perm().size());
    for (int p : w.perm()) append_varint(out, static_cast<std::uint64_t>(p));
  }
  return out;
}

std::string PinDownRecord::beta_bytes() const {
  std::string out;
  append_varint(out, beta.size());
  for (const auto& [k, inc] : beta) {
    append_varint(out, static_cast<std::uint64_t>(k));
    append_varint(out, inc.size());
    for (const GroupElement& g : inc) {
      const std::string key = g.canonical_key();
      append_varint(out, key.size());
      out += key;
    }
  }
  return out;
}

std::string PinDownRecord::serialize() const {
  std::string out;
  out.push_back(kRecordVersion);
  append_varint(out, static_cast<std::uint64_t>(dim));
  append_varint(out, static_cast<std::uint64_t>(n));
  append_varint(out, static_cast<std::uint64_t>(alpha));
  out += tau_bytes();
  out += pi_bytes();
  out += sigma_bytes();
  out += beta_bytes();
  return out;
}

PinDownRecord PinDownRecord::deserialize(const std::string& bytes) {
  try {
    size_t pos = 0;
    if (bytes.empty() || bytes[0] != kRecordVersion)
      throw PinDownError("record bytes: unsupported version");
    pos = 1;
    PinDownRecord rec;
    rec.dim = static_cast<int>(read_varint(bytes, pos));
    rec.n = static_cast<int>(read_varint(bytes, pos));
    rec.alpha = static_cast<int>(read_varint(bytes, pos));
    if (rec.dim < 2) throw PinDownError("record bytes: dimension below 2");

    const size_t r = read_varint(bytes, pos);
    long long prev = 0;
    for (size_t j = 0; j < r; ++j) {
      const long long delta = static_cast<long long>(read_varint(bytes, pos));
      const long long t = (j == 0) ? delta : prev + delta;
      if (j > 0 && delta == 0)
        throw PinDownError("record bytes: critical times not increasing");
      rec.tau.push_back(static_cast<int>(t));
      prev = t;
    }

    const size_t pd = read_varint(bytes, pos);
    for (size_t i = 0; i < pd; ++i)
      rec.pi.x.push_back(unzigzag(read_varint(bytes, pos)));

    const size_t ns = read_varint(bytes, pos);
    for (size_t i = 0; i < ns; ++i) {
      const int j = static_cast<int>(read_varint(bytes, pos));
      const size_t pn = read_varint(bytes, pos);
      std::vector<int> perm(pn);
      for (size_t q = 0; q < pn; ++q)
        perm[q] = static_cast<int>(read_varint(bytes, pos));
      rec.sigma.emplace(j, lie::WeylElement(std::move(perm)));
    }

    const size_t nb = read_varint(bytes, pos);
    for (size_t i = 0; i < nb; ++i) {
      const int k = static_cast<int>(read_varint(bytes, pos));
      const size_t m = read_varint(bytes, pos);
      std::vector<GroupElement> inc;
      inc.reserve(m);
      for (size_t q = 0; q < m; ++q) {
        const size_t len = read_varint(bytes, pos);
        if (pos + len > bytes.size())
          throw PinDownError("record bytes: truncated element key");
        inc.push_back(GroupElement::from_canonical_key(bytes.substr(pos, len)));
        pos += len;
      }
      rec.beta.emplace(k, std::move(inc));
    }

    if (pos != bytes.size())
      throw PinDownError("record bytes: trailing data");
    return rec;
  } catch (const exact::ExactGroupError& e) {
    throw PinDownError(std::string("record bytes: ") + e.what());
  }
}

bool PinDownRecord::operator==(const PinDownRecord& o) const {
  return dim == o.dim && n == o.n && alpha == o.alpha && tau == o.tau &&
         pi == o.pi && sigma == o.sigma && beta == o.beta;
}

// ---------------------------------------------------------------------------
// Decoding.

namespace {

/// Increment pool reconstructed from the beta windows, with overlap
/// consistency enforced.
class IncrementPool {
 public:
  IncrementPool(const PinDownRecord& rec, const PinParams& params, int d) {
    const int count = interval_count(params.n, params.alpha);
    for (const auto& [k, inc] : rec.beta) {
      if (k < 0 || k >= count)
        throw PinDownError("decode: window index out of range");
      const auto [lo, hi] = window_bounds(params.n, params.alpha, k);
      if (static_cast<int>(inc.size()) != hi - lo + 1)
        throw PinDownError("decode: window length mismatch");
      for (size_t q = 0; q < inc.size(); ++q) {
        if (inc[q].dim() != d)
          throw PinDownError("decode: element dimension mismatch");
        const int i = lo + static_cast<int>(q);
        auto [it, fresh] = by_index_.emplace(i, inc[q]);
        if (!fresh && !(it->second == inc[q]))
          throw PinDownError("decode: overlapping windows disagree");
      }
    }
  }

  /// Product g_a ... g_b (identity when a > b); throws on a gap.
  GroupElement product(int a, int b, int d) const {
    GroupElement w = GroupElement::identity(d);
    for (int i = a; i <= b; ++i) {
      auto it = by_index_.find(i);
      if (it == by_index_.end())
        throw PinDownError("decode: window coverage is missing increment " +
                           std::to_string(i) + " (encoder bug)");
      w = w * it->second;
    }
    return w;
  }

 private:
  std::map<int, GroupElement> by_index_;
};

}  // namespace

DecodeResult decode_pin(const flags::OrientedFlat& flat,
                        const PinDownRecord& record, const PinParams& params) {
  params.validate();
  const int d = record.dim;
  if (d != flat.dim() || record.n != params.n || record.alpha != params.alpha)
    throw PinDownError("decode: record/params mismatch");
  const int r = static_cast<int>(record.tau.size());
  for (int j = 0; j < r; ++j) {
    if (record.tau[j] < 0 || record.tau[j] > record.n ||
        (j > 0 && record.tau[j] <= record.tau[j - 1]))
      throw PinDownError("decode: malformed critical times");
  }
  if (static_cast<int>(record.pi.x.size()) != d - 1)
    throw PinDownError("decode: lattice component has wrong dimension");
  for (const auto& [j, w] : record.sigma) {
    if (j < 0 || j + 1 >= r)
      throw PinDownError("decode: chamber-order index out of range");
    if (w.dim() != d)
      throw PinDownError("decode: chamber-order dimension mismatch");
  }

  const IncrementPool pool(record, params, d);
  flags::FlatProjector proj(flat);
  DecodeResult res{GroupElement::identity(d), lie::LatticePoint{},
                   GroupElement::identity(d), 0.0};

  if (r == 0) {
    const bool pi_zero =
        std::all_of(record.pi.x.begin(), record.pi.x.end(),
                    [](long long c) { return c == 0; });
    if (!pi_zero || !record.sigma.empty())
      throw PinDownError("decode: no critical times but nonempty components");
    res.tail = pool.product(1, record.n, d);
    res.pi_last_estimate =
        lie::round_lattice(lie::iota(proj.project(res.w_first).pi.v));
    res.error_radius = static_cast<double>(d + 1);
    return res;
  }

  res.w_first = pool.product(1, record.tau.front(), d);
  Eigen::VectorXd est = proj.project(res.w_first).pi.v;
  est -= lie::iota_inv(d, lie::lattice_to_iota(record.pi));
  for (const auto& [j, w] : record.sigma) {
    const GroupElement span =
        pool.product(record.tau[static_cast<size_t>(j)] + 1,
                     record.tau[static_cast<size_t>(j) + 1], d);
    est += w.inverse().apply(lie::radial(span).v);
  }
  res.pi_last_estimate = lie::round_lattice(lie::iota(est));
  res.tail = pool.product(record.tau.back() + 1, record.n, d);
  res.error_radius = static_cast<double>(d + 1) +
                     (4.0 * params.M + 1.0) *
                         static_cast<double>(record.sigma.size());
  return res;
}

double candidate_bound(const PinDownRecord& record, const PinParams& params,
                       double error_radius, double log_gamma_ball) {
  params.validate();
  if (!(error_radius >= 0.0))
    throw PinDownError("candidate_bound: negative error radius");
  if (!(log_gamma_ball >= 0.0))
    throw PinDownError("candidate_bound: negative log gamma ball");
  return static_cast<double>(record.dim - 1) *
             std::log(2.0 * error_radius + 1.0) +
         log_gamma_ball;
}

double measure_log_gamma_ball(const walk::BilateralPath& path,
                              const flags::OrientedFlat& flat,
                              const PinParams& params) {
  params.validate();
  if (path.dim() != flat.dim())
    throw PinDownError("gamma ball: path/flat dimension mismatch");
  if (path.n_fwd() < params.n)
    throw PinDownError("gamma ball: path horizon shorter than n");
  flags::FlatProjector proj(flat);
  std::map<std::vector<long long>, std::set<std::string>> cells;
  size_t largest = 1;
  for (int i = 0; i <= params.n; ++i) {
    const flags::ProjectionResult res = proj.project(path.position(i));
    if (res.distance > params.M) continue;
    auto& cell = cells[lie::round_lattice(lie::iota(res.pi.v)).x];
    cell.insert(path.position(i).canonical_key());
    largest = std::max(largest, cell.size());
  }
  return std::log(static_cast<double>(largest));
}

SweepResult sweep_M(const walk::MuSpec& mu, const SweepParams& params) {
  if (params.n < 1) throw PinDownError("sweep: n must be >= 1");
  if (params.window < 1 || params.window > params.n)
    throw PinDownError("sweep: window must lie in [1, n]");
  if (params.paths < 1) throw PinDownError("sweep: needs at least one path");
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
    throw PinDownError("sweep: epsilon must lie in (0, 1)");
  if (params.horizon_factor < 1)
    throw PinDownError("sweep: horizon factor must be >= 1");
  if (params.max_exponent < 0)
    throw PinDownError("sweep: negative grid exponent");

  // Minimum distance to the flat within each tiled window [s, s+window-1],
  // s = 1, 1+window, ...; one entry per (path, window) pair.
  std::vector<double> window_minima;
  const int horizon = params.horizon_factor * params.n;
  for (int p = 0; p < params.paths; ++p) {
    const walk::BoundaryEstimate est = walk::sample_boundary(
        mu, params.seed, static_cast<std::uint64_t>(p), horizon, horizon);
    flags::FlatProjector proj(est.boundary.flat);
    std::vector<double> profile(static_cast<size_t>(params.n) + 1);
    for (int i = 0; i <= params.n; ++i)
      profile[static_cast<size_t>(i)] =
          proj.project(est.path.position(i)).distance;
    for (int s = 1; s + params.window - 1 <= params.n; s += params.window) {
      double lo = profile[static_cast<size_t>(s)];
      for (int i = s + 1; i < s + params.window; ++i)
        lo = std::min(lo, profile[static_cast<size_t>(i)]);
      window_minima.push_back(lo);
    }
  }

  SweepResult out;
  for (int e = 0; e <= params.max_exponent; ++e) {
    const double M = std::ldexp(1.0, e);
    size_t hits = 0;
    for (double lo : window_minima) hits += (lo <= M) ? 1 : 0;
    const double frac =
        static_cast<double>(hits) / static_cast<double>(window_minima.size());
    out.curve.emplace_back(M, frac);
    if (frac >= 1.0 - params.epsilon) {
      out.M = M;
      return out;
    }
  }
  throw PinDownError(
      "sweep: grid exhausted without reaching the target hit probability; "
      "raise max_exponent or loosen epsilon");
}

}  // namespace boundarylab::pindown
