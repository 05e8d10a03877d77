#include "boundarylab/pindown.hpp"

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "boundarylab/exactgroup.hpp"
#include "boundarylab/flags.hpp"
#include "boundarylab/liegeom.hpp"
#include "boundarylab/walk.hpp"
#include "doctest.h"

namespace ex = boundarylab::exact;
namespace lie = boundarylab::lie;
namespace flg = boundarylab::flags;
namespace wk = boundarylab::walk;
namespace pd = boundarylab::pindown;

namespace {

ex::GroupElement ge2(long long a, long long b, long long c, long long d) {
  return ex::GroupElement(
      2, {ex::BigInt(a), ex::BigInt(b), ex::BigInt(c), ex::BigInt(d)});
}

// Free subgroup generators and their inverses, uniform weights.  Every atom
// has the same radial norm sqrt(2)*log(1+sqrt(2)) ~ 1.2465.
wk::MuSpec pingpong_mu() {
  std::vector<ex::GroupElement> sup = {ge2(1, 2, 0, 1), ge2(1, -2, 0, 1),
                                       ge2(1, 0, 2, 1), ge2(1, 0, -2, 1)};
  std::vector<wk::Rational> w(4, wk::Rational(1, 4));
  return wk::MuSpec::validated(sup, w);
}

double pingpong_step_norm() {
  return lie::radial(ge2(1, 2, 0, 1)).norm();
}

wk::MuSpec delta_mu(const ex::GroupElement& g) {
  return wk::MuSpec::validated({g}, {wk::Rational(1)});
}

// Deterministic hyperbolic step whose powers stay on one flat.
ex::GroupElement hyperbolic2() { return ge2(2, 1, 1, 1); }

ex::GroupElement hyperbolic3() {
  return ex::GroupElement(3, {ex::BigInt(2), ex::BigInt(1), ex::BigInt(0),
                              ex::BigInt(1), ex::BigInt(1), ex::BigInt(0),
                              ex::BigInt(0), ex::BigInt(0), ex::BigInt(1)});
}

// Mirrors the decoder's increment pool so tests can compose products from
// the record alone.
ex::GroupElement record_product(const pd::PinDownRecord& rec,
                                const pd::PinParams& par, int a, int b) {
  std::map<int, ex::GroupElement> pool;
  for (const auto& [k, inc] : rec.beta) {
    const auto [lo, hi] = pd::window_bounds(par.n, par.alpha, k);
    REQUIRE(static_cast<int>(inc.size()) == hi - lo + 1);
    for (size_t q = 0; q < inc.size(); ++q)
      pool.emplace(lo + static_cast<int>(q), inc[q]);
  }
  ex::GroupElement w = ex::GroupElement::identity(rec.dim);
  for (int i = a; i <= b; ++i) {
    REQUIRE(pool.count(i) == 1);
    w = w * pool.at(i);
  }
  return w;
}

lie::LatticePoint true_rounded_projection(const flg::OrientedFlat& flat,
                                          const ex::GroupElement& x) {
  return lie::round_lattice(lie::iota(flg::project_to_flat(flat, x).pi.v));
}

double lattice_gap(const lie::LatticePoint& a, const lie::LatticePoint& b) {
  return (lie::lattice_to_iota(a) - lie::lattice_to_iota(b)).norm();
}

}  // namespace

TEST_CASE("pin params are validated") {
  pd::PinParams ok{120, 20, 1.25, 32.0};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((pd::PinParams{120, 0, 1.0, 1.0}.validate()), pd::PinDownError);
  CHECK_THROWS_AS((pd::PinParams{120, 20, 0.0, 1.0}.validate()), pd::PinDownError);
  CHECK_THROWS_AS((pd::PinParams{120, 20, 1.0, 0.0}.validate()), pd::PinDownError);
  CHECK_THROWS_AS((pd::PinParams{39, 20, 1.0, 1.0}.validate()), pd::PinDownError);
}

TEST_CASE("interval grid covers [0, n] with the remainder merged into the last") {
  CHECK(pd::interval_count(400, 40) == 10);
  CHECK(pd::interval_bounds(400, 40, 0) == std::pair<int, int>{0, 39});
  CHECK(pd::interval_bounds(400, 40, 8) == std::pair<int, int>{320, 359});
  CHECK(pd::interval_bounds(400, 40, 9) == std::pair<int, int>{360, 400});

  CHECK(pd::interval_count(441, 40) == 12);
  CHECK(pd::interval_bounds(441, 40, 10) == std::pair<int, int>{400, 439});
  CHECK(pd::interval_bounds(441, 40, 11) == std::pair<int, int>{440, 441});

  CHECK(pd::interval_count(14, 4) == 4);
  CHECK(pd::interval_bounds(14, 4, 3) == std::pair<int, int>{12, 14});

  // Every time 0..n lies in exactly one interval.
  for (int t = 0; t <= 441; ++t) {
    int owners = 0;
    for (int k = 0; k < pd::interval_count(441, 40); ++k) {
      const auto [lo, hi] = pd::interval_bounds(441, 40, k);
      owners += (lo <= t && t <= hi) ? 1 : 0;
    }
    CHECK(owners == 1);
  }
  CHECK_THROWS_AS(pd::interval_bounds(400, 40, 10), pd::PinDownError);
}

TEST_CASE("windows span an interval with both neighbors, clipped to [1, n]") {
  CHECK(pd::window_bounds(400, 40, 0) == std::pair<int, int>{1, 79});
  CHECK(pd::window_bounds(400, 40, 1) == std::pair<int, int>{1, 119});
  CHECK(pd::window_bounds(400, 40, 5) == std::pair<int, int>{160, 279});
  CHECK(pd::window_bounds(400, 40, 8) == std::pair<int, int>{280, 400});
  CHECK(pd::window_bounds(400, 40, 9) == std::pair<int, int>{320, 400});

  // n = 2*alpha: both windows cover all of [1, n].
  CHECK(pd::window_bounds(8, 4, 0) == std::pair<int, int>{1, 8});
  CHECK(pd::window_bounds(8, 4, 1) == std::pair<int, int>{1, 8});
}

TEST_CASE("huge thresholds make every interior interval good with first-index critical times") {
  const wk::MuSpec mu = pingpong_mu();
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 77u, 0u, 960, 960);
  const pd::PinParams par{120, 20, 100.0, 1e6};
  const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);

  CHECK(cd.critical_times == std::vector<int>{0, 20, 40, 60, 80, 100});
  REQUIRE(cd.good_mask.size() == 6);
  CHECK_FALSE(cd.good_mask[0]);
  CHECK(cd.good_mask[1]);
  CHECK(cd.good_mask[2]);
  CHECK(cd.good_mask[3]);
  CHECK(cd.good_mask[4]);
  CHECK_FALSE(cd.good_mask[5]);
  CHECK(cd.doubly_good == std::set<int>{1, 2, 3});

  // Only the pairs touching the forced-bad endpoint intervals carry a
  // chamber order; bad windows are exactly the two endpoint windows.
  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par, cd);
  std::vector<int> sigma_keys;
  for (const auto& [j, w] : rec.sigma) sigma_keys.push_back(j);
  CHECK(sigma_keys == std::vector<int>{0, 4});
  std::vector<int> beta_keys;
  for (const auto& [k, inc] : rec.beta) beta_keys.push_back(k);
  CHECK(beta_keys == std::vector<int>{0, 5});

  // Window contents are literal path increments.
  for (const auto& [k, inc] : rec.beta) {
    const auto [lo, hi] = pd::window_bounds(par.n, par.alpha, k);
    for (size_t q = 0; q < inc.size(); ++q)
      CHECK(inc[q] == est.path.increment(lo + static_cast<int>(q)));
  }
}

TEST_CASE("threshold below any achievable distance leaves no critical times and reconstructs w_n exactly") {
  const wk::MuSpec mu = pingpong_mu();
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 77u, 1u, 960, 960);
  const pd::PinParams par{120, 20, 100.0, 1e-15};
  const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);

  CHECK(cd.critical_times.empty());
  for (bool g : cd.good_mask) CHECK_FALSE(g);
  CHECK(cd.doubly_good.empty());

  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par, cd);
  CHECK(rec.tau.empty());
  CHECK(rec.sigma.empty());
  for (long long c : rec.pi.x) CHECK(c == 0);
  CHECK(rec.beta.size() == 6);  // every interval is bad

  const pd::DecodeResult dec = pd::decode_pin(est.boundary.flat, rec, par);
  CHECK(dec.w_first.is_identity());
  CHECK(dec.tail == est.path.position(120));
  CHECK(dec.error_radius == doctest::Approx(3.0));
}

TEST_CASE("tiny step bound makes every interval bad while critical times survive") {
  const wk::MuSpec mu = pingpong_mu();
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 77u, 2u, 960, 960);
  REQUIRE(pingpong_step_norm() > 0.1);
  const pd::PinParams par{120, 20, 0.1, 1e6};
  const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);

  CHECK(cd.critical_times == std::vector<int>{0, 20, 40, 60, 80, 100});
  for (bool g : cd.good_mask) CHECK_FALSE(g);
  CHECK(cd.doubly_good.empty());

  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par, cd);
  CHECK(rec.sigma.size() == 5);  // every consecutive pair
  CHECK(rec.beta.size() == 6);   // every window, jointly covering [1, n]
  for (long long c : rec.pi.x) CHECK(c == 0);

  // The record pins the endpoint completely: compose first position, the
  // per-pair spans, and the tail, all from record contents.
  const pd::DecodeResult dec = pd::decode_pin(est.boundary.flat, rec, par);
  CHECK(dec.w_first == est.path.position(rec.tau.front()));
  ex::GroupElement w = dec.w_first;
  for (size_t j = 0; j + 1 < rec.tau.size(); ++j)
    w = w * record_product(rec, par, rec.tau[j] + 1, rec.tau[j + 1]);
  w = w * dec.tail;
  CHECK(w == est.path.position(120));
}

TEST_CASE("deterministic hyperbolic walk stays within threshold one of its own flat") {
  const wk::MuSpec mu = delta_mu(hyperbolic2());
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 5u, 0u, 112, 112);
  REQUIRE_FALSE(est.boundary.degenerate);

  const pd::PinParams par{14, 4, 3.0, 1.0};
  const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);
  CHECK(cd.critical_times == std::vector<int>{0, 4, 8, 12});
  REQUIRE(cd.good_mask.size() == 4);
  CHECK_FALSE(cd.good_mask[0]);
  CHECK(cd.good_mask[1]);
  CHECK(cd.good_mask[2]);
  CHECK_FALSE(cd.good_mask[3]);
  CHECK(cd.doubly_good == std::set<int>{1});

  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par, cd);
  const pd::DecodeResult dec = pd::decode_pin(est.boundary.flat, rec, par);

  CHECK(dec.w_first.is_identity());  // first critical time is 0
  CHECK(dec.tail == hyperbolic2() * hyperbolic2());
  CHECK(dec.error_radius == doctest::Approx(3.0 + 5.0 * 2.0));

  const lie::LatticePoint truth =
      true_rounded_projection(est.boundary.flat, est.path.position(12));
  CHECK(lattice_gap(dec.pi_last_estimate, truth) <= dec.error_radius);
  // On-flat deterministic motion: the estimate is much tighter than the
  // worst-case radius.
  CHECK(lattice_gap(dec.pi_last_estimate, truth) <= 4.0);
}

TEST_CASE("pin-down works in rank two") {
  const wk::MuSpec mu = delta_mu(hyperbolic3());
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 6u, 0u, 112, 112);
  REQUIRE_FALSE(est.boundary.degenerate);

  const pd::PinParams par{14, 4, 3.0, 1.0};
  const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);
  CHECK(cd.critical_times == std::vector<int>{0, 4, 8, 12});
  CHECK(cd.doubly_good == std::set<int>{1});

  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par, cd);
  CHECK(rec.dim == 3);
  CHECK(rec.pi.x.size() == 2);
  const pd::DecodeResult dec = pd::decode_pin(est.boundary.flat, rec, par);
  CHECK(dec.tail == hyperbolic3() * hyperbolic3());
  const lie::LatticePoint truth =
      true_rounded_projection(est.boundary.flat, est.path.position(12));
  CHECK(lattice_gap(dec.pi_last_estimate, truth) <= dec.error_radius);

  const std::string bytes = rec.serialize();
  CHECK(pd::PinDownRecord::deserialize(bytes) == rec);
}

TEST_CASE("identity walk qualifies at any threshold") {
  const wk::MuSpec mu = delta_mu(ex::GroupElement::identity(2));
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 9u, 0u, 64, 64);
  REQUIRE(est.boundary.degenerate);

  const pd::PinParams par{8, 4, 1e-9, 1e-12};
  const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);
  CHECK(cd.critical_times == std::vector<int>{0, 4});
  CHECK(cd.doubly_good.empty());  // both intervals are forced bad

  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par, cd);
  const pd::DecodeResult dec = pd::decode_pin(est.boundary.flat, rec, par);
  CHECK(dec.w_first.is_identity());
  CHECK(dec.tail.is_identity());
  for (long long c : dec.pi_last_estimate.x) CHECK(c == 0);

  CHECK(pd::measure_log_gamma_ball(est.path, est.boundary.flat, par) == 0.0);
}

TEST_CASE("records are deterministic and serialization is canonical") {
  const wk::MuSpec mu = pingpong_mu();
  const pd::PinParams par{120, 20, 1.25, 32.0};

  const wk::BoundaryEstimate a = wk::sample_boundary(mu, 101u, 0u, 960, 960);
  const pd::PinDownRecord ra1 = pd::encode_record(a.path, a.boundary.flat, par);
  const pd::PinDownRecord ra2 = pd::encode_record(a.path, a.boundary.flat, par);
  CHECK(ra1 == ra2);
  CHECK(ra1.serialize() == ra2.serialize());

  const wk::BoundaryEstimate b = wk::sample_boundary(mu, 101u, 1u, 960, 960);
  const pd::PinDownRecord rb = pd::encode_record(b.path, b.boundary.flat, par);
  REQUIRE(ra1 != rb);
  CHECK(ra1.serialize() != rb.serialize());

  // Round trip, component concatenation, and malformed input.
  const std::string bytes = ra1.serialize();
  CHECK(pd::PinDownRecord::deserialize(bytes) == ra1);
  CHECK(bytes.size() > ra1.tau_bytes().size() + ra1.pi_bytes().size() +
                           ra1.sigma_bytes().size());
  CHECK_THROWS_AS(pd::PinDownRecord::deserialize(bytes.substr(0, bytes.size() - 3)),
                  pd::PinDownError);
  std::string wrong_version = bytes;
  wrong_version[0] = 9;
  CHECK_THROWS_AS(pd::PinDownRecord::deserialize(wrong_version), pd::PinDownError);
  CHECK_THROWS_AS(pd::PinDownRecord::deserialize(std::string()), pd::PinDownError);
}

TEST_CASE("projection increments telescope and doubly good pairs obey the step bound") {
  const wk::MuSpec mu = pingpong_mu();
  const pd::PinParams par{120, 20, 1.25, 32.0};
  REQUIRE(pingpong_step_norm() <= par.L);

  int doubly_good_seen = 0;
  for (std::uint64_t p = 0; p < 6; ++p) {
    const wk::BoundaryEstimate est = wk::sample_boundary(mu, 303u, p, 960, 960);
    const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);
    const size_t r = cd.critical_times.size();
    if (r < 2) continue;

    flg::FlatProjector proj(est.boundary.flat);
    std::vector<Eigen::VectorXd> pis(r);
    for (size_t j = 0; j < r; ++j)
      pis[j] = proj.project(est.path.position(cd.critical_times[j])).pi.v;

    Eigen::VectorXd total = Eigen::VectorXd::Zero(2);
    for (size_t j = 0; j + 1 < r; ++j) total += pis[j + 1] - pis[j];
    CHECK((total - (pis[r - 1] - pis[0])).norm() <= 1e-6);

    for (int j : cd.doubly_good) {
      ++doubly_good_seen;
      const auto ju = static_cast<size_t>(j);
      CHECK((pis[ju + 1] - pis[ju]).norm() <= 2.0 * par.alpha * par.L + 1e-6);
      CHECK(lie::dist(est.path.position(cd.critical_times[ju]),
                      est.path.position(cd.critical_times[ju + 1])) <=
            2.0 * par.alpha * par.L + 1e-6);
    }
  }
  CHECK(doubly_good_seen > 0);
}

TEST_CASE("chamber-ordered exact spans approximate projection increments within 4M plus one") {
  const wk::MuSpec mu = pingpong_mu();
  const pd::PinParams par{120, 20, 1.25, 32.0};

  int pairs_seen = 0;
  for (std::uint64_t p = 0; p < 4; ++p) {
    const wk::BoundaryEstimate est = wk::sample_boundary(mu, 404u, p, 960, 960);
    const pd::CriticalData cd = pd::critical_times(est.path, est.boundary.flat, par);
    const pd::PinDownRecord rec =
        pd::encode_record(est.path, est.boundary.flat, par, cd);

    flg::FlatProjector proj(est.boundary.flat);
    for (const auto& [j, sigma] : rec.sigma) {
      ++pairs_seen;
      const int ta = rec.tau[static_cast<size_t>(j)];
      const int tb = rec.tau[static_cast<size_t>(j) + 1];
      const Eigen::VectorXd v_true =
          proj.project(est.path.position(tb)).pi.v -
          proj.project(est.path.position(ta)).pi.v;
      const ex::GroupElement span =
          est.path.position(ta).inverse() * est.path.position(tb);
      const Eigen::VectorXd v_hat = sigma.inverse().apply(lie::radial(span).v);
      CHECK((v_hat - v_true).norm() <= 4.0 * par.M + 1.0);
    }
  }
  CHECK(pairs_seen > 0);
}

TEST_CASE("decoded estimates land within the error radius across a path batch") {
  const wk::MuSpec mu = pingpong_mu();
  const pd::PinParams par{120, 20, 1.25, 32.0};

  int decoded = 0;
  for (std::uint64_t p = 0; p < 20; ++p) {
    const wk::BoundaryEstimate est = wk::sample_boundary(mu, 505u, p, 960, 960);
    const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par);
    const pd::DecodeResult dec = pd::decode_pin(est.boundary.flat, rec, par);
    if (rec.tau.empty()) continue;
    ++decoded;

    CHECK(dec.w_first == est.path.position(rec.tau.front()));
    CHECK(dec.tail ==
          est.path.position(rec.tau.back()).inverse() * est.path.position(par.n));
    CHECK(dec.error_radius ==
          doctest::Approx(3.0 + (4.0 * par.M + 1.0) *
                                    static_cast<double>(rec.sigma.size())));

    const lie::LatticePoint truth = true_rounded_projection(
        est.boundary.flat, est.path.position(rec.tau.back()));
    CHECK(lattice_gap(dec.pi_last_estimate, truth) <= dec.error_radius);
  }
  CHECK(decoded == 20);
}

TEST_CASE("candidate bound follows the radius formula and the observed ball") {
  pd::PinDownRecord rec;
  rec.dim = 2;
  rec.n = 120;
  rec.alpha = 20;
  const pd::PinParams par{120, 20, 1.25, 32.0};
  CHECK(pd::candidate_bound(rec, par, 3.0, 1.5) ==
        doctest::Approx(std::log(7.0) + 1.5));
  rec.dim = 4;
  CHECK(pd::candidate_bound(rec, par, 10.0, 0.0) ==
        doctest::Approx(3.0 * std::log(21.0)));
  CHECK_THROWS_AS(pd::candidate_bound(rec, par, -1.0, 0.0), pd::PinDownError);
  CHECK_THROWS_AS(pd::candidate_bound(rec, par, 1.0, -0.5), pd::PinDownError);

  const wk::MuSpec mu = pingpong_mu();
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 606u, 0u, 960, 960);
  const double lgb = pd::measure_log_gamma_ball(est.path, est.boundary.flat, par);
  CHECK(lgb >= 0.0);
  CHECK(lgb <= std::log(static_cast<double>(par.n + 1)));
}

TEST_CASE("decoder rejects mismatched or tampered records") {
  const wk::MuSpec mu = pingpong_mu();
  const wk::BoundaryEstimate est = wk::sample_boundary(mu, 707u, 0u, 960, 960);
  const pd::PinParams par{120, 20, 1.25, 1e-15};
  const pd::PinDownRecord rec = pd::encode_record(est.path, est.boundary.flat, par);
  REQUIRE(rec.tau.empty());

  pd::PinParams other = par;
  other.n = 100;
  CHECK_THROWS_AS(pd::decode_pin(est.boundary.flat, rec, other), pd::PinDownError);

  // Adjacent windows overlap, so a single missing window is still covered;
  // removing three consecutive ones opens a real gap.
  pd::PinDownRecord gap = rec;
  gap.beta.erase(2);
  gap.beta.erase(3);
  gap.beta.erase(4);
  CHECK_THROWS_AS(pd::decode_pin(est.boundary.flat, gap, par), pd::PinDownError);

  pd::PinDownRecord inconsistent = rec;
  inconsistent.sigma.emplace(0, lie::WeylElement::identity(2));
  CHECK_THROWS_AS(pd::decode_pin(est.boundary.flat, inconsistent, par),
                  pd::PinDownError);
}

TEST_CASE("threshold sweep returns the smallest adequate grid value") {
  const wk::MuSpec mu = pingpong_mu();
  pd::SweepParams sp;
  sp.n = 120;
  sp.window = 30;
  sp.epsilon = 0.1;
  sp.paths = 10;
  sp.seed = 808u;

  const pd::SweepResult res = pd::sweep_M(mu, sp);
  CHECK(res.M >= 1.0);
  CHECK(res.M <= 4096.0);
  REQUIRE_FALSE(res.curve.empty());
  CHECK(res.curve.back().first == res.M);
  CHECK(res.curve.back().second >= 0.9);
  for (size_t i = 0; i + 1 < res.curve.size(); ++i) {
    CHECK(res.curve[i].second < 0.9);                          // minimality
    CHECK(res.curve[i].second <= res.curve[i + 1].second);     // monotone hits
  }
  const pd::SweepResult res2 = pd::sweep_M(mu, sp);
  CHECK(res2.M == res.M);
  CHECK(res2.curve == res.curve);

  // A walk that stays at distance ~0 accepts the smallest grid value.
  pd::SweepParams tiny;
  tiny.n = 14;
  tiny.window = 7;
  tiny.epsilon = 0.1;
  tiny.paths = 3;
  tiny.seed = 909u;
  const pd::SweepResult flat_res = pd::sweep_M(delta_mu(hyperbolic2()), tiny);
  CHECK(flat_res.M == 1.0);

  // An unreachable target exhausts the grid.
  pd::SweepParams exhausted;
  exhausted.n = 120;
  exhausted.window = 30;
  exhausted.epsilon = 0.1;
  exhausted.paths = 2;
  exhausted.seed = 808u;
  exhausted.max_exponent = 2;  // grid tops out at 4, far below the profile
  CHECK_THROWS_AS(pd::sweep_M(mu, exhausted), pd::PinDownError);
}

TEST_CASE("sweep parameters are validated") {
  const wk::MuSpec mu = pingpong_mu();
  pd::SweepParams sp;
  sp.n = 20;
  sp.window = 10;
  sp.paths = 1;
  sp.seed = 1u;
  pd::SweepParams bad = sp;
  bad.window = 0;
  CHECK_THROWS_AS(pd::sweep_M(mu, bad), pd::PinDownError);
  bad = sp;
  bad.window = 21;
  CHECK_THROWS_AS(pd::sweep_M(mu, bad), pd::PinDownError);
  bad = sp;
  bad.paths = 0;
  CHECK_THROWS_AS(pd::sweep_M(mu, bad), pd::PinDownError);
  bad = sp;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(pd::sweep_M(mu, bad), pd::PinDownError);
  bad = sp;
  bad.horizon_factor = 0;
  CHECK_THROWS_AS(pd::sweep_M(mu, bad), pd::PinDownError);
}
