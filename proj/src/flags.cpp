#include "boundarylab/flags.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boundarylab::flags {

namespace {

using exact::BigInt;

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kInvLn2 = 1.4426950408889634074;
constexpr double kOrthoTol = 1e-9;
constexpr double kGapTol = 1e-10;
constexpr double kTransverseTol = 1e-8;
constexpr double kDetTol = 1e-9;
constexpr double kConditionRefine = 1e6;
constexpr double kSimplexTol = 1e-8;
constexpr int kMaxIterations = 10000;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Objective value standing in for "singular, do not go there"; keeps the
// simplex ordering total if a compound degenerates to exact zero.
constexpr double kSingularPenalty = 1e300;

void check_orthonormal(const Eigen::MatrixXd& frame) {
  if (frame.rows() != frame.cols() || frame.rows() < 2) {
    throw FlagsError("flag frame must be square with dim >= 2");
  }
  const Eigen::MatrixXd gram = frame.transpose() * frame;
  const double err =
      (gram - Eigen::MatrixXd::Identity(frame.rows(), frame.cols())).norm();
  if (!(err <= kOrthoTol)) {
    throw FlagsError("flag frame is not orthonormal");
  }
}

// First entry of clearly nonzero magnitude decides the column sign.
void fix_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > 1e-12) {
        if (m(i, j) < 0) m.col(j) = -m.col(j);
        break;
      }
    }
  }
}

Eigen::MatrixXd projector_onto_leading(const Eigen::MatrixXd& frame, int i) {
  const Eigen::MatrixXd q = frame.leftCols(i);
  return q * q.transpose();
}

// ---- exact arithmetic over doubles read as rationals ----------------------

// Integer image of a double matrix: entry (i,j) = a[i*n+j] * 2^e, exact.
struct IntMatrix {
  int n = 0;
  std::vector<BigInt> a;
  std::int64_t e = 0;
};

IntMatrix int_matrix_of(const Eigen::MatrixXd& m, std::int64_t extra_e) {
  const int n = static_cast<int>(m.rows());
  IntMatrix out;
  out.n = n;
  out.a.assign(static_cast<size_t>(n) * n, BigInt(0));
  std::int64_t emin = 0;
  bool any = false;
  std::vector<std::pair<std::int64_t, std::int64_t>> parts(
      static_cast<size_t>(n) * n, {0, 0});  // (mantissa53, exponent)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (v == 0.0) continue;
      if (!std::isfinite(v)) throw FlagsError("non-finite matrix entry");
      int ex = 0;
      const double f = std::frexp(v, &ex);
      const auto m53 = static_cast<std::int64_t>(std::ldexp(f, 53));
      const std::int64_t ee = static_cast<std::int64_t>(ex) - 53 + extra_e;
      parts[static_cast<size_t>(i) * n + j] = {m53, ee};
      if (!any || ee < emin) emin = ee;
      any = true;
    }
  }
  out.e = any ? emin : extra_e;
  for (size_t idx = 0; idx < parts.size(); ++idx) {
    if (parts[idx].first == 0) continue;
    BigInt v(parts[idx].first);
    out.a[idx] = v << static_cast<unsigned>(parts[idx].second - out.e);
  }
  return out;
}

// log2 |x| for x != 0, accurate to ~1 ulp of the result.
double precise_log2(const BigInt& x) {
  BigInt ax = x < 0 ? BigInt(-x) : x;
  const auto bits = static_cast<std::int64_t>(boost::multiprecision::msb(ax)) + 1;
  if (bits <= 53) return std::log2(ax.convert_to<double>());
  const BigInt top = ax >> static_cast<unsigned>(bits - 53);
  return std::log2(top.convert_to<double>()) + static_cast<double>(bits - 53);
}

ExactCompound compound_minors(const IntMatrix& b, int k) {
  const auto& table = lie::subset_table(b.n, k);
  const int rows = static_cast<int>(table.size());
  ExactCompound out;
  out.e = static_cast<std::int64_t>(k) * b.e;
  out.a.assign(static_cast<size_t>(rows) * rows, BigInt(0));
  std::vector<BigInt> sub(static_cast<size_t>(k) * k);
  for (int s = 0; s < rows; ++s) {
    for (int t = 0; t < rows; ++t) {
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          sub[static_cast<size_t>(i) * k + j] =
              b.a[static_cast<size_t>(table[s][i]) * b.n + table[t][j]];
        }
      }
      out.a[static_cast<size_t>(s) * rows + t] = exact::exact_det(k, sub);
    }
  }
  return out;
}

std::vector<BigInt> adjugate_int(const IntMatrix& b) {
  const int n = b.n;
  std::vector<BigInt> adj(static_cast<size_t>(n) * n);
  std::vector<BigInt> sub(static_cast<size_t>(n - 1) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int r = 0;
      for (int ii = 0; ii < n; ++ii) {
        if (ii == i) continue;
        int c = 0;
        for (int jj = 0; jj < n; ++jj) {
          if (jj == j) continue;
          sub[static_cast<size_t>(r) * (n - 1) + c] =
              b.a[static_cast<size_t>(ii) * n + jj];
          ++c;
        }
        ++r;
      }
      BigInt cof = exact::exact_det(n - 1, sub);
      if (((i + j) & 1) != 0) cof = -cof;
      adj[static_cast<size_t>(j) * n + i] = cof;  // transposed cofactors
    }
  }
  return adj;
}

ExactCompound exact_compound_product(const ExactCompound& a,
                                     const ExactCompound& b, int rows) {
  ExactCompound out;
  out.e = a.e + b.e;
  out.a.assign(static_cast<size_t>(rows) * rows, BigInt(0));
  for (int s = 0; s < rows; ++s) {
    for (int t = 0; t < rows; ++t) {
      BigInt acc(0);
      for (int r = 0; r < rows; ++r) {
        acc += a.a[static_cast<size_t>(s) * rows + r] *
               b.a[static_cast<size_t>(r) * rows + t];
      }
      out.a[static_cast<size_t>(s) * rows + t] = std::move(acc);
    }
  }
  return out;
}

ExactCompoundSet exact_compounds_of(const IntMatrix& b) {
  ExactCompoundSet out;
  out.dim = b.n;
  for (int k = 1; k < b.n; ++k) out.comp.push_back(compound_minors(b, k));
  const BigInt det = exact::exact_det(b.n, b.a);
  if (det == 0) throw FlagsError("exact_compounds: singular matrix");
  out.log_det =
      (precise_log2(det) + static_cast<double>(b.n) * static_cast<double>(b.e)) *
      kLn2;
  return out;
}

struct NmOut {
  Eigen::VectorXd x;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;
  bool hit_threshold = false;
};

// Nelder-Mead with standard coefficients; stops when the simplex diameter
// falls below kSimplexTol, or as soon as any evaluation reaches
// `early_below` (used for threshold queries; -inf disables it).
template <typename F>
NmOut nelder_mead(const F& f, const Eigen::VectorXd& x0, double step,
                  double early_below) {
  const int n = static_cast<int>(x0.size());
  NmOut out;
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  xs.reserve(n + 1);
  fs.reserve(n + 1);

  const auto eval = [&](const Eigen::VectorXd& x) {
    ++out.evals;
    return f(x);
  };

  xs.push_back(x0);
  fs.push_back(eval(x0));
  if (fs.back() <= early_below) {
    out.x = xs.back();
    out.fx = fs.back();
    out.hit_threshold = true;
    return out;
  }
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = x0;
    x[i] += step;
    xs.push_back(x);
    fs.push_back(eval(x));
    if (fs.back() <= early_below) {
      out.x = xs.back();
      out.fx = fs.back();
      out.hit_threshold = true;
      return out;
    }
  }

  std::vector<int> order(n + 1);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return fs[a] < fs[b]; });

    double diameter = 0.0;
    for (int a = 0; a <= n; ++a) {
      for (int b = a + 1; b <= n; ++b) {
        diameter = std::max(diameter, (xs[a] - xs[b]).norm());
      }
    }
    if (diameter < kSimplexTol) {
      out.x = xs[order[0]];
      out.fx = fs[order[0]];
      out.converged = true;
      return out;
    }

    const int best = order[0];
    const int worst = order[n];
    const int second_worst = order[n - 1];

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= n;

    const auto accept = [&](const Eigen::VectorXd& x, double fx) {
      xs[worst] = x;
      fs[worst] = fx;
    };

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = eval(xr);
    if (fr <= early_below) {
      out.x = xr;
      out.fx = fr;
      out.hit_threshold = true;
      return out;
    }
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = eval(xe);
      if (fe <= early_below) {
        out.x = xe;
        out.fx = fe;
        out.hit_threshold = true;
        return out;
      }
      accept(fe < fr ? xe : xr, std::min(fe, fr));
      continue;
    }
    if (fr < fs[second_worst]) {
      accept(xr, fr);
      continue;
    }
    const bool outside = fr < fs[worst];
    Eigen::VectorXd xc;
    if (outside) {
      xc = centroid + 0.5 * (xr - centroid);
    } else {
      xc = centroid - 0.5 * (centroid - xs[worst]);
    }
    const double fc = eval(xc);
    if (fc <= early_below) {
      out.x = xc;
      out.fx = fc;
      out.hit_threshold = true;
      return out;
    }
    if (fc < (outside ? fr : fs[worst])) {
      accept(xc, fc);
      continue;
    }
    for (int i = 0; i <= n; ++i) {  // shrink toward the best vertex
      if (i == best) continue;
      xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
      fs[i] = eval(xs[i]);
      if (fs[i] <= early_below) {
        out.x = xs[i];
        out.fx = fs[i];
        out.hit_threshold = true;
        return out;
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  out.x = xs[best];
  out.fx = fs[best];
  return out;
}

ProjectionResult run_minimize(const FlatObjective& obj,
                              const Eigen::VectorXd& start, double step) {
  const auto f = [&](const Eigen::VectorXd& y) { return obj.at_iota(y); };
  const NmOut nm = nelder_mead(
      f, start, step, -std::numeric_limits<double>::infinity());
  if (!nm.converged) {
    throw FlagsError("flat projection did not converge (ill-conditioned "
                     "flat basis?)");
  }
  ProjectionResult res;
  res.pi.v = lie::iota_inv(obj.dim(), nm.x);
  res.distance = nm.fx;
  res.evals = nm.evals;
  return res;
}

double initial_step(double f0, bool warm) {
  if (warm) return 0.5;
  return std::min(1e3, std::max(1.0, 0.5 * f0));
}

// ---- flags from exact compounds --------------------------------------------

// Scale-normalized double image of one exact compound (max |entry| in
// [1/2, 1]); log2_scale receives the log2 of the factor taken out.  Rounding
// exact minors, instead of taking minors of rounded entries, keeps the
// sub-dominant directions meaningful at any singular value spread.
Eigen::MatrixXd compound_mantissa(const ExactCompound& c, int rows,
                                  double* log2_scale) {
  std::vector<double> l2(c.a.size(), kNegInf);
  double gmax = kNegInf;
  for (size_t idx = 0; idx < c.a.size(); ++idx) {
    if (c.a[idx] == 0) continue;
    l2[idx] = precise_log2(c.a[idx]);
    gmax = std::max(gmax, l2[idx]);
  }
  if (gmax == kNegInf) throw FlagsError("forward_flag: compound is zero");
  Eigen::MatrixXd m(rows, rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < rows; ++j) {
      const size_t idx = static_cast<size_t>(i) * rows + j;
      if (c.a[idx] == 0) {
        m(i, j) = 0.0;
      } else {
        const double mag = std::exp2(l2[idx] - gmax);
        m(i, j) = c.a[idx] < 0 ? -mag : mag;
      }
    }
  }
  *log2_scale = gmax + static_cast<double>(c.e);
  return m;
}

int subset_index(const std::vector<std::vector<int>>& table,
                 const std::vector<int>& subset) {
  for (size_t s = 0; s < table.size(); ++s) {
    if (table[s] == subset) return static_cast<int>(s);
  }
  throw FlagsError("forward_flag: subset lookup failed");
}

// V_k is read off the top singular direction p of L^k g: contracting p with
// each (k-1)-subset T yields x^(T) with x^(T)_i = (-1)^{#{t in T: t > i}} *
// p_{T u {i}} for i not in T, a vector of V_k whenever p is decomposable.
Eigen::MatrixXd contraction_span(int d, int k, const Eigen::VectorXd& p) {
  const auto& table_k = lie::subset_table(d, k);
  const auto& table_prev = lie::subset_table(d, k - 1);
  Eigen::MatrixXd x =
      Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(table_prev.size()));
  for (size_t t = 0; t < table_prev.size(); ++t) {
    const std::vector<int>& sub = table_prev[t];
    for (int i = 0; i < d; ++i) {
      if (std::find(sub.begin(), sub.end(), i) != sub.end()) continue;
      std::vector<int> with = sub;
      with.insert(std::upper_bound(with.begin(), with.end(), i), i);
      const auto above =
          std::count_if(sub.begin(), sub.end(), [i](int u) { return u > i; });
      x(i, static_cast<Eigen::Index>(t)) =
          (above % 2 ? -1.0 : 1.0) * p[subset_index(table_k, with)];
    }
  }
  return x;
}

// Each V_k is the span encoded by the top left singular vector of the k-th
// exterior power; the top direction of a scale-normalized mantissa is always
// within double resolution, unlike the sub-dominant directions of the matrix
// itself once the singular value spread passes ~1e15.
Flag flag_from_exact_compounds(const ExactCompoundSet& ec) {
  const int d = ec.dim;
  if (d < 2) throw FlagsError("forward_flag needs dim >= 2");

  std::vector<Eigen::VectorXd> top(static_cast<size_t>(d));
  std::vector<double> s(static_cast<size_t>(d) + 1, 0.0);  // log2 sigma_1..k
  for (int k = 1; k <= d - 1; ++k) {
    const int rows = static_cast<int>(lie::subset_table(d, k).size());
    double log2_scale = 0.0;
    const Eigen::MatrixXd m =
        compound_mantissa(ec.comp[static_cast<size_t>(k) - 1], rows, &log2_scale);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
    s[static_cast<size_t>(k)] = std::log2(svd.singularValues()(0)) + log2_scale;
    top[static_cast<size_t>(k)] = svd.matrixU().col(0);
  }
  s[static_cast<size_t>(d)] = ec.log_det * kInvLn2;

  // log sigma_k - log sigma_{k+1} = (2 s_k - s_{k-1} - s_{k+1}) ln 2.
  for (int k = 1; k <= d - 1; ++k) {
    const double delta = (2.0 * s[static_cast<size_t>(k)] -
                          s[static_cast<size_t>(k) - 1] -
                          s[static_cast<size_t>(k) + 1]) *
                         kLn2;
    if (!(delta >= kGapTol)) {
      throw FlagsError("indeterminate flag: singular value gap below 1e-10");
    }
  }

  Eigen::MatrixXd frame(d, d);
  for (int k = 1; k <= d - 1; ++k) {
    Eigen::MatrixXd x;
    if (k == 1) {
      x = top[1];
    } else {
      x = contraction_span(d, k, top[static_cast<size_t>(k)]);
      const Eigen::MatrixXd lead = frame.leftCols(k - 1);
      x -= lead * (lead.transpose() * x);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> xsvd(x, Eigen::ComputeFullU);
    if (!(xsvd.singularValues()(0) > 1e-6)) {
      throw FlagsError("forward_flag: flag reconstruction lost rank");
    }
    frame.col(k - 1) = xsvd.matrixU().col(0);
  }
  {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame.leftCols(d - 1));
    frame.col(d - 1) = Eigen::MatrixXd(qr.householderQ()).col(d - 1);
  }

  // Polish orthonormality without moving directions.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  fix_column_signs(q);
  return Flag{q};
}

}  // namespace

Flag Flag::standard_up(int d) {
  return Flag{Eigen::MatrixXd::Identity(d, d)};
}

Flag Flag::standard_down(int d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) m(d - 1 - i, i) = 1.0;
  return Flag{m};
}

Flag make_flag(const Eigen::MatrixXd& frame) {
  check_orthonormal(frame);
  return Flag{frame};
}

Flag forward_flag(const ScaledMatrix& g) {
  return flag_from_exact_compounds(exact_compounds(g));
}

Flag forward_flag(const GroupElement& g) {
  // Straight from the exact entries: even the 2^-40 rounding of to_scaled()
  // would erase sub-dominant directions at large spreads.
  return flag_from_exact_compounds(exact_compounds(g));
}

double flag_distance(const Flag& a, const Flag& b) {
  if (a.dim() != b.dim()) throw FlagsError("flag_distance: dim mismatch");
  const int d = a.dim();
  double best = 0.0;
  for (int i = 1; i < d; ++i) {
    const Eigen::MatrixXd diff =
        projector_onto_leading(a.frame, i) - projector_onto_leading(b.frame, i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff,
                                                      Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

bool is_transverse(const Flag& a, const Flag& b) {
  if (a.dim() != b.dim()) throw FlagsError("is_transverse: dim mismatch");
  const int d = a.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 1; i < d; ++i) {
    m.leftCols(i) = a.frame.leftCols(i);
    m.rightCols(d - i) = b.frame.leftCols(d - i);
    if (!(std::abs(m.determinant()) > kTransverseTol)) return false;
  }
  return true;
}

Flag transform_flag(const ScaledMatrix& g, const Flag& b) {
  const Eigen::MatrixXd product = g.mantissa * b.frame;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(product);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return Flag{q};
}

Flag transform_flag(const GroupElement& g, const Flag& b) {
  return transform_flag(g.to_scaled(), b);
}

OrientedFlat::OrientedFlat(const Eigen::MatrixXd& basis_in) : basis(basis_in) {
  if (basis.rows() != basis.cols() || basis.rows() < 2) {
    throw FlagsError("flat basis must be square with dim >= 2");
  }
  const double det = basis.determinant();
  if (!(std::abs(det - 1.0) <= kDetTol)) {
    throw FlagsError("flat basis determinant must be +1");
  }
  inverse_basis = basis.inverse();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  const double smin = svd.singularValues().minCoeff();
  const double condition =
      smin > 0 ? svd.singularValues().maxCoeff() / smin
               : std::numeric_limits<double>::infinity();
  if (condition > kConditionRefine && std::isfinite(condition)) {
    // The inverse is consumed as a left factor, so Newton steps target the
    // left residual X*A - I (the right residual can be kappa times smaller
    // while the left one is useless).
    const Eigen::MatrixXd id =
        Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
    Eigen::MatrixXd best = inverse_basis;
    double best_residual = (best * basis - id).norm();
    for (int pass = 0; pass < 3; ++pass) {
      inverse_basis = (2.0 * id - inverse_basis * basis) * inverse_basis;
      const double residual = (inverse_basis * basis - id).norm();
      if (residual < best_residual) {
        best = inverse_basis;
        best_residual = residual;
      }
    }
    inverse_basis = best;
  }
}

OrientedFlat OrientedFlat::identity(int d) {
  return OrientedFlat(Eigen::MatrixXd::Identity(d, d));
}

OrientedFlat flat_from_flags(const Flag& b_plus, const Flag& b_minus) {
  if (!is_transverse(b_plus, b_minus)) {
    throw FlagsError("flat_from_flags: flags are not transverse");
  }
  const int d = b_plus.dim();
  Eigen::MatrixXd basis(d, d);
  Eigen::MatrixXd stack(d - 1, d);
  for (int i = 1; i <= d; ++i) {
    // Orthogonal complement of V_i(b_plus): trailing d-i frame columns.
    // Orthogonal complement of W_{d-i+1}(b_minus): trailing i-1 columns.
    int row = 0;
    for (int c = i; c < d; ++c) stack.row(row++) = b_plus.frame.col(c);
    for (int c = d - i + 1; c < d; ++c) stack.row(row++) = b_minus.frame.col(c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack, Eigen::ComputeFullV);
    basis.col(i - 1) = svd.matrixV().col(d - 1);
    // Deterministic sign: largest-magnitude entry positive.
    Eigen::Index argmax = 0;
    basis.col(i - 1).cwiseAbs().maxCoeff(&argmax);
    if (basis(argmax, i - 1) < 0) basis.col(i - 1) = -basis.col(i - 1);
  }
  const double det = basis.determinant();
  if (!(std::abs(det) > 0.0)) {
    throw FlagsError("flat_from_flags: degenerate line configuration");
  }
  basis *= std::pow(std::abs(det), -1.0 / d);
  if (det < 0) basis.col(d - 1) = -basis.col(d - 1);
  return OrientedFlat(basis);
}

ExactCompoundSet exact_compounds(const GroupElement& g) {
  IntMatrix b;
  b.n = g.dim();
  b.e = 0;
  b.a.reserve(static_cast<size_t>(b.n) * b.n);
  for (int i = 0; i < b.n; ++i) {
    for (int j = 0; j < b.n; ++j) b.a.push_back(g.at(i, j));
  }
  ExactCompoundSet out = exact_compounds_of(b);
  out.log_det = 0.0;  // det is +1 by construction
  return out;
}

ExactCompoundSet exact_compounds(const ScaledMatrix& m) {
  return exact_compounds_of(int_matrix_of(m.mantissa, m.exponent));
}

FlatPoint point_on_flat(const OrientedFlat& f, const Eigen::VectorXd& v) {
  if (v.size() != f.dim()) {
    throw FlagsError("point_on_flat: dimension mismatch");
  }
  FlatPoint p;
  p.base = exact_compounds(ScaledMatrix(f.basis, 0));
  p.cartan = v;
  p.cartan.array() -= p.cartan.mean();
  return p;
}

FlatPoint translated_point(const GroupElement& h, const FlatPoint& p) {
  const ExactCompoundSet hc = exact_compounds(h);
  if (hc.dim != p.base.dim) {
    throw FlagsError("translated_point: dimension mismatch");
  }
  FlatPoint out;
  out.base.dim = p.base.dim;
  out.base.log_det = hc.log_det + p.base.log_det;
  for (size_t k = 0; k < p.base.comp.size(); ++k) {
    const int rows = static_cast<int>(
        lie::subset_table(p.base.dim, static_cast<int>(k) + 1).size());
    out.base.comp.push_back(
        exact_compound_product(hc.comp[k], p.base.comp[k], rows));
  }
  out.cartan = p.cartan;
  return out;
}

FlatObjective::FlatObjective(const OrientedFlat& f, const GroupElement& x) {
  init(f, FlatPoint{exact_compounds(x), Eigen::VectorXd::Zero(f.dim())});
}

FlatObjective::FlatObjective(const OrientedFlat& f, const ScaledMatrix& x) {
  init(f, FlatPoint{exact_compounds(x), Eigen::VectorXd::Zero(f.dim())});
}

FlatObjective::FlatObjective(const OrientedFlat& f, const FlatPoint& x) {
  init(f, x);
}

void FlatObjective::init(const OrientedFlat& f, const FlatPoint& x) {
  d_ = f.dim();
  if (x.base.dim != d_ || x.cartan.size() != d_) {
    throw FlagsError("objective: dimension mismatch");
  }
  Eigen::VectorXd cartan = x.cartan;
  cartan.array() -= cartan.mean();

  const IntMatrix b = int_matrix_of(f.basis, 0);
  const BigInt det = exact::exact_det(b.n, b.a);
  if (det <= 0) throw FlagsError("objective: flat basis is not oriented");
  const double log2_det =
      precise_log2(det) + static_cast<double>(d_) * static_cast<double>(b.e);
  IntMatrix adj;
  adj.n = d_;
  adj.e = static_cast<std::int64_t>(d_ - 1) * b.e;
  adj.a = adjugate_int(b);

  for (int k = 1; k < d_; ++k) {
    const auto& table = lie::subset_table(d_, k);
    const int rows = static_cast<int>(table.size());
    const ExactCompound inv_k = compound_minors(adj, k);
    const ExactCompound prod =
        exact_compound_product(inv_k, x.base.comp[k - 1], rows);
    LogMat lm;
    lm.log2mag.resize(rows, rows);
    lm.sign.resize(rows, rows);
    for (int t = 0; t < rows; ++t) {
      double weight = 0.0;
      for (int idx : table[t]) weight += cartan[idx];
      const double col_shift = weight * kInvLn2 - k * log2_det;
      for (int s = 0; s < rows; ++s) {
        const BigInt& mval = prod.a[static_cast<size_t>(s) * rows + t];
        if (mval == 0) {
          lm.sign(s, t) = 0.0;
          lm.log2mag(s, t) = kNegInf;
          continue;
        }
        lm.sign(s, t) = mval < 0 ? -1.0 : 1.0;
        lm.log2mag(s, t) =
            precise_log2(mval) + static_cast<double>(prod.e) + col_shift;
      }
    }
    p_.push_back(std::move(lm));
  }
  log_det_ = -log2_det * kLn2 + x.base.log_det;
}

double FlatObjective::at_cartan(const Eigen::VectorXd& v) const {
  if (v.size() != d_) throw FlagsError("at_cartan: dimension mismatch");
  Eigen::VectorXd vc = v;
  vc.array() -= vc.mean();

  Eigen::VectorXd r(d_);
  double s_prev = 0.0;
  for (int k = 1; k < d_; ++k) {
    const auto& table = lie::subset_table(d_, k);
    const int rows = static_cast<int>(table.size());
    const LogMat& lm = p_[k - 1];
    Eigen::VectorXd t(rows);
    for (int j = 0; j < rows; ++j) {
      double sum = 0.0;
      for (int idx : table[j]) sum += vc[idx];
      t[j] = -sum * kInvLn2;
    }
    double gmax = kNegInf;
    for (int s = 0; s < rows; ++s) {
      for (int c = 0; c < rows; ++c) {
        if (lm.sign(s, c) != 0.0) {
          gmax = std::max(gmax, lm.log2mag(s, c) + t[s]);
        }
      }
    }
    if (!std::isfinite(gmax)) return kSingularPenalty;
    Eigen::MatrixXd m(rows, rows);
    for (int s = 0; s < rows; ++s) {
      for (int c = 0; c < rows; ++c) {
        m(s, c) = lm.sign(s, c) == 0.0
                      ? 0.0
                      : lm.sign(s, c) * std::exp2(lm.log2mag(s, c) + t[s] - gmax);
      }
    }
    const double s_k = lie::log_sigma_max(ScaledMatrix(m, 0)) + gmax * kLn2;
    r[k - 1] = s_k - s_prev;
    s_prev = s_k;
  }
  r[d_ - 1] = log_det_ - s_prev;
  r.array() -= r.mean();
  return r.norm();
}

double FlatObjective::at_iota(const Eigen::VectorXd& y) const {
  return at_cartan(lie::iota_inv(d_, y));
}

FlatProjector::FlatProjector(const OrientedFlat& f) : flat_(f) {}

ProjectionResult FlatProjector::minimize(const FlatObjective& obj) {
  const Eigen::VectorXd start =
      has_warm_ ? warm_ : Eigen::VectorXd::Zero(obj.dim() - 1).eval();
  const double f0 = obj.at_iota(start);
  ProjectionResult res = run_minimize(obj, start, initial_step(f0, has_warm_));
  warm_ = lie::iota(res.pi.v);
  has_warm_ = true;
  return res;
}

bool FlatProjector::threshold_query(const FlatObjective& obj,
                                    double threshold) {
  const Eigen::VectorXd start =
      has_warm_ ? warm_ : Eigen::VectorXd::Zero(obj.dim() - 1).eval();
  const double f0 = obj.at_iota(start);
  if (f0 <= threshold) return true;
  const auto f = [&](const Eigen::VectorXd& y) { return obj.at_iota(y); };
  const NmOut nm =
      nelder_mead(f, start, initial_step(f0, has_warm_), threshold);
  if (nm.hit_threshold) {
    warm_ = nm.x;
    has_warm_ = true;
    return true;
  }
  if (!nm.converged) {
    throw FlagsError("flat projection did not converge (ill-conditioned "
                     "flat basis?)");
  }
  warm_ = nm.x;
  has_warm_ = true;
  return false;
}

ProjectionResult FlatProjector::project(const GroupElement& x) {
  return minimize(FlatObjective(flat_, x));
}

ProjectionResult FlatProjector::project(const ScaledMatrix& x) {
  return minimize(FlatObjective(flat_, x));
}

ProjectionResult FlatProjector::project(const FlatPoint& x) {
  return minimize(FlatObjective(flat_, x));
}

bool FlatProjector::within(const GroupElement& x, double threshold) {
  return threshold_query(FlatObjective(flat_, x), threshold);
}

bool FlatProjector::within(const FlatPoint& x, double threshold) {
  return threshold_query(FlatObjective(flat_, x), threshold);
}

void FlatProjector::reset_warm_start() {
  has_warm_ = false;
  warm_.resize(0);
}

namespace {

ProjectionResult best_of_two_starts(const FlatObjective& obj) {
  const int n = obj.dim() - 1;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const double f0 = obj.at_iota(zero);
  ProjectionResult a = run_minimize(obj, zero, initial_step(f0, false));
  const Eigen::VectorXd offset =
      Eigen::VectorXd::Constant(n, std::max(1.0, 0.5 * f0));
  ProjectionResult b = run_minimize(obj, offset, initial_step(f0, false));
  return a.distance <= b.distance ? a : b;
}

}  // namespace

ProjectionResult project_to_flat(const OrientedFlat& f, const GroupElement& x) {
  return best_of_two_starts(FlatObjective(f, x));
}

ProjectionResult project_to_flat(const OrientedFlat& f, const ScaledMatrix& x) {
  return best_of_two_starts(FlatObjective(f, x));
}

double dist_to_flat(const OrientedFlat& f, const GroupElement& x) {
  return project_to_flat(f, x).distance;
}

}  // namespace boundarylab::flags
