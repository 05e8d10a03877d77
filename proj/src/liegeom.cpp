#include "boundarylab/liegeom.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include <Eigen/SVD>

namespace boundarylab::lie {

namespace {

constexpr int kMaxDim = 12;
constexpr double kSignTol = 1e-9;

double log2_constant() { return std::log(2.0); }

}  // namespace

WeylElement::WeylElement(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<bool> seen(perm_.size(), false);
  for (int p : perm_) {
    if (p < 0 || p >= static_cast<int>(perm_.size()) || seen[static_cast<size_t>(p)]) {
      throw LieGeomError("invalid permutation");
    }
    seen[static_cast<size_t>(p)] = true;
  }
}

WeylElement WeylElement::identity(int d) {
  std::vector<int> p(static_cast<size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  return WeylElement(std::move(p));
}

Eigen::VectorXd WeylElement::apply(const Eigen::VectorXd& v) const {
  if (v.size() != static_cast<Eigen::Index>(perm_.size())) {
    throw LieGeomError("permutation/vector size mismatch");
  }
  Eigen::VectorXd out(v.size());
  for (size_t k = 0; k < perm_.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[perm_[k]];
  return out;
}

WeylElement WeylElement::inverse() const {
  std::vector<int> q(perm_.size());
  for (size_t k = 0; k < perm_.size(); ++k) q[static_cast<size_t>(perm_[k])] = static_cast<int>(k);
  return WeylElement(std::move(q));
}

std::pair<WeylElement, Eigen::VectorXd> weyl_sort(const Eigen::VectorXd& v) {
  std::vector<int> idx(static_cast<size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  WeylElement w(std::move(idx));
  return {w, w.apply(v)};
}

const Eigen::MatrixXd& helmert_basis(int d) {
  if (d < 1 || d > kMaxDim) throw LieGeomError("dimension out of range");
  static const std::vector<Eigen::MatrixXd> cache = [] {
    std::vector<Eigen::MatrixXd> c(kMaxDim + 1);
    for (int dd = 1; dd <= kMaxDim; ++dd) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dd, dd - 1);
      for (int k = 1; k < dd; ++k) {
        const double s = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
        for (int i = 0; i < k; ++i) h(i, k - 1) = s;
        h(k, k - 1) = -s * k;
      }
      c[static_cast<size_t>(dd)] = h;
    }
    return c;
  }();
  return cache[static_cast<size_t>(d)];
}

Eigen::VectorXd iota(const Eigen::VectorXd& v) {
  return helmert_basis(static_cast<int>(v.size())).transpose() * v;
}

Eigen::VectorXd iota_inv(int d, const Eigen::VectorXd& y) {
  if (y.size() != d - 1) throw LieGeomError("iota coordinate size mismatch");
  Eigen::VectorXd v = helmert_basis(d) * y;
  v.array() -= v.mean();  // re-center: exact zero sum despite fp noise
  return v;
}

LatticePoint round_lattice(const Eigen::VectorXd& y) {
  LatticePoint p;
  p.x.resize(static_cast<size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // nearest integer, half-integer ties toward -infinity
    p.x[static_cast<size_t>(i)] = static_cast<long long>(std::ceil(y[i] - 0.5));
  }
  return p;
}

Eigen::VectorXd lattice_to_iota(const LatticePoint& p) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(p.x.size()));
  for (size_t i = 0; i < p.x.size(); ++i) y[static_cast<Eigen::Index>(i)] = static_cast<double>(p.x[i]);
  return y;
}

// ---------------------------------------------------------------------------

const std::vector<std::vector<int>>& subset_table(int d, int k) {
  if (d < 1 || d > kMaxDim || k < 1 || k > d) throw LieGeomError("bad subset parameters");
  static std::vector<std::vector<int>> cache[kMaxDim + 1][kMaxDim + 1];
  static std::once_flag once;
  std::call_once(once, [] {
    for (int dd = 1; dd <= kMaxDim; ++dd) {
      for (int kk = 1; kk <= dd; ++kk) {
        std::vector<std::vector<int>> subs;
        std::vector<int> cur(static_cast<size_t>(kk));
        std::iota(cur.begin(), cur.end(), 0);
        while (true) {
          subs.push_back(cur);
          int i = kk - 1;
          while (i >= 0 && cur[static_cast<size_t>(i)] == dd - kk + i) --i;
          if (i < 0) break;
          ++cur[static_cast<size_t>(i)];
          for (int j = i + 1; j < kk; ++j) cur[static_cast<size_t>(j)] = cur[static_cast<size_t>(j - 1)] + 1;
        }
        cache[dd][kk] = std::move(subs);
      }
    }
  });
  return cache[d][k];
}

namespace {

using exact::BigInt;

// Shared-exponent extraction with the same convention as GroupElement::to_scaled.
ScaledMatrix scaled_from_bigints(int n, const std::vector<BigInt>& entries) {
  BigInt max_abs(0);
  for (const BigInt& x : entries) {
    BigInt a = boost::multiprecision::abs(x);
    if (a > max_abs) max_abs = a;
  }
  if (max_abs == 0) throw LieGeomError("zero compound matrix");
  std::int64_t e = static_cast<std::int64_t>(boost::multiprecision::msb(max_abs)) + 1;
  if ((BigInt(1) << static_cast<unsigned>(e - 1)) == max_abs) e -= 1;
  ScaledMatrix out;
  out.mantissa.resize(n, n);
  out.exponent = e;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const BigInt& x = entries[static_cast<size_t>(i) * n + j];
      if (x == 0) {
        out.mantissa(i, j) = 0.0;
        continue;
      }
      const bool neg = x < 0;
      BigInt mag = neg ? BigInt(-x) : x;
      const std::int64_t bits = static_cast<std::int64_t>(boost::multiprecision::msb(mag)) + 1;
      std::int64_t shift = bits > 62 ? bits - 62 : 0;
      if (shift > 0) mag >>= static_cast<unsigned>(shift);
      double m = mag.convert_to<double>();
      if (neg) m = -m;
      out.mantissa(i, j) = std::ldexp(m, static_cast<int>(shift - e));
    }
  }
  return out;
}

double double_minor_det(const Eigen::MatrixXd& m, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  const int k = static_cast<int>(rows.size());
  if (k == 1) return m(rows[0], cols[0]);
  if (k == 2) {
    return m(rows[0], cols[0]) * m(rows[1], cols[1]) - m(rows[0], cols[1]) * m(rows[1], cols[0]);
  }
  Eigen::MatrixXd sub(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) sub(i, j) = m(rows[static_cast<size_t>(i)], cols[static_cast<size_t>(j)]);
  }
  return sub.determinant();
}

}  // namespace

CompoundSet compounds_of(const GroupElement& g) {
  const int d = g.dim();
  CompoundSet out;
  out.dim = d;
  out.log_det = 0.0;  // det is exactly +1
  out.comp.reserve(static_cast<size_t>(d - 1));
  out.comp.push_back(g.to_scaled());
  for (int k = 2; k <= d - 1; ++k) {
    const auto& subs = subset_table(d, k);
    const int n = static_cast<int>(subs.size());
    std::vector<BigInt> minors(static_cast<size_t>(n) * n);
    std::vector<BigInt> sub(static_cast<size_t>(k) * k);
    for (int si = 0; si < n; ++si) {
      for (int sj = 0; sj < n; ++sj) {
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) {
            sub[static_cast<size_t>(i) * k + j] = g.at(subs[static_cast<size_t>(si)][static_cast<size_t>(i)],
                                                       subs[static_cast<size_t>(sj)][static_cast<size_t>(j)]);
          }
        }
        minors[static_cast<size_t>(si) * n + sj] = exact::exact_det(k, sub);
      }
    }
    out.comp.push_back(scaled_from_bigints(n, minors));
  }
  return out;
}

CompoundSet compounds_of_scaled(const ScaledMatrix& g) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(g.mantissa);
  double log_abs_det = 0.0;
  for (Eigen::Index i = 0; i < g.mantissa.rows(); ++i) {
    log_abs_det += std::log(std::abs(lu.matrixLU()(i, i)));
  }
  log_abs_det += static_cast<double>(g.dim()) * static_cast<double>(g.exponent) * log2_constant();
  return compounds_of_scaled(g, log_abs_det);
}

CompoundSet compounds_of_scaled(const ScaledMatrix& g, double log_det) {
  const int d = g.dim();
  CompoundSet out;
  out.dim = d;
  out.log_det = log_det;
  out.comp.reserve(static_cast<size_t>(d - 1));
  ScaledMatrix first = g;
  first.normalize();
  out.comp.push_back(std::move(first));
  for (int k = 2; k <= d - 1; ++k) {
    const auto& subs = subset_table(d, k);
    const int n = static_cast<int>(subs.size());
    ScaledMatrix c;
    c.mantissa.resize(n, n);
    c.exponent = static_cast<std::int64_t>(k) * g.exponent;
    for (int si = 0; si < n; ++si) {
      for (int sj = 0; sj < n; ++sj) {
        c.mantissa(si, sj) = double_minor_det(g.mantissa, subs[static_cast<size_t>(si)], subs[static_cast<size_t>(sj)]);
      }
    }
    c.normalize();
    out.comp.push_back(std::move(c));
  }
  return out;
}

CompoundSet compound_multiply(const CompoundSet& a, const CompoundSet& b) {
  if (a.dim != b.dim) throw LieGeomError("compound dimension mismatch");
  CompoundSet out;
  out.dim = a.dim;
  out.log_det = a.log_det + b.log_det;
  out.comp.reserve(a.comp.size());
  for (size_t k = 0; k < a.comp.size(); ++k) {
    out.comp.push_back(ScaledMatrix::multiply(a.comp[k], b.comp[k]));
  }
  return out;
}

double log_sigma_max(const ScaledMatrix& m) {
  const Eigen::MatrixXd& a = m.mantissa;
  double s = 0.0;
  if (a.rows() == 1) {
    s = std::abs(a(0, 0));
  } else if (a.rows() == 2) {
    const double q = a.squaredNorm();
    const double dt = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double disc = std::max(0.0, q * q - 4.0 * dt * dt);
    s = std::sqrt(0.5 * (q + std::sqrt(disc)));
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    s = svd.singularValues()(0);
  }
  if (!(s > 0.0)) throw LieGeomError("zero matrix has no spectral norm");
  return std::log(s) + static_cast<double>(m.exponent) * log2_constant();
}

RadialVector radial_from_compounds(const CompoundSet& c) {
  const int d = c.dim;
  Eigen::VectorXd r(d);
  double prev = 0.0;
  for (int k = 1; k <= d - 1; ++k) {
    const double s = log_sigma_max(c.comp[static_cast<size_t>(k - 1)]);
    r[k - 1] = s - prev;
    prev = s;
  }
  r[d - 1] = c.log_det - prev;
  // Adjacent compound norms are each ~1e-12 accurate, so any inversion beyond
  // noise level indicates a corrupted log_det or non-SL input.
  for (int k = 1; k < d; ++k) {
    if (r[k] > r[k - 1] + 1e-6) throw LieGeomError("radial entries out of order beyond tolerance");
  }
  std::sort(r.data(), r.data() + d, std::greater<double>());
  r.array() -= r.mean();
  return RadialVector{std::move(r)};
}

RadialVector radial(const ScaledMatrix& g) { return radial_from_compounds(compounds_of_scaled(g)); }

RadialVector radial(const GroupElement& g) { return radial_from_compounds(compounds_of(g)); }

// ---------------------------------------------------------------------------

namespace {

int sign_of_first_entry(const Eigen::VectorXd& col) {
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (std::abs(col[i]) > kSignTol) return col[i] > 0 ? 1 : -1;
  }
  return 1;
}

PolarDecomposition polar_impl(const ScaledMatrix& g, const CompoundSet& compounds) {
  const int d = g.dim();
  // Exactly-orthogonal inputs have a fully degenerate singular spectrum; the
  // SVD basis is then arbitrary, so take the canonical branch (g, 0, id).
  if (g.exponent >= -2 && g.exponent <= 2) {
    const Eigen::MatrixXd v = g.mantissa * std::ldexp(1.0, static_cast<int>(g.exponent));
    if ((v.transpose() * v - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-11) {
      PolarDecomposition out;
      out.k1 = v;
      out.r.v = Eigen::VectorXd::Zero(d);
      out.k2 = Eigen::MatrixXd::Identity(d, d);
      out.log_scale = 0.0;
      return out;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.mantissa, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  if (u.determinant() < 0 && v.determinant() < 0) {
    u.col(d - 1) *= -1.0;  // flip the pair on the smallest singular direction
    v.col(d - 1) *= -1.0;
  }
  for (int i = 0; i < d; ++i) {
    if (sign_of_first_entry(v.col(i)) < 0) {
      v.col(i) *= -1.0;
      u.col(i) *= -1.0;
    }
  }
  PolarDecomposition out;
  out.k1 = std::move(u);
  out.k2 = v.transpose();
  out.r = radial_from_compounds(compounds);  // accurate at any condition number
  out.log_scale = compounds.log_det / static_cast<double>(d);
  return out;
}

}  // namespace

PolarDecomposition polar_decompose(const ScaledMatrix& g) {
  return polar_impl(g, compounds_of_scaled(g));
}

PolarDecomposition polar_decompose(const GroupElement& g) {
  return polar_impl(g.to_scaled(), compounds_of(g));
}

RadialVector generalized_distance(const GroupElement& x, const GroupElement& y) {
  return radial(x.inverse() * y);
}

double dist(const GroupElement& x, const GroupElement& y) {
  return generalized_distance(x, y).norm();
}

}  // namespace boundarylab::lie
