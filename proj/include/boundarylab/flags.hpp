#pragma once

/**
 * @file
 * @brief Full flags, transversality, flag pairs to oriented flats, and
 *        closest-point projection onto flats.
 *
 * A full flag is stored as an orthonormal frame whose first i columns span
 * the i-dimensional subspace V_i.  A transverse pair (b_plus, b_minus)
 * determines the oriented flat through the lines E_i = V_i(b_plus) cap
 * W_{d-i+1}(b_minus); its basis matrix has det +1 and column i spanning E_i.
 *
 * Projection onto a flat minimizes v -> dist(basis * exp(v) * o, x * o) over
 * the zero-sum vectors v.  The objective is evaluated through compound
 * matrices so that it stays accurate for points with singular value spreads
 * far beyond double range; see FlatObjective.
 */

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "boundarylab/exactgroup.hpp"
#include "boundarylab/liegeom.hpp"

namespace boundarylab::flags {

using exact::GroupElement;
using exact::ScaledMatrix;

class FlagsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orthonormal frame; V_i = span of the first i columns.
struct Flag {
  Eigen::MatrixXd frame;

  int dim() const { return static_cast<int>(frame.rows()); }

  /// Standard flag: frame = identity.
  static Flag standard_up(int d);
  /// Opposite standard flag: frame = column-reversed identity.
  static Flag standard_down(int d);
};

/// Validates ||frame^T frame - I|| <= 1e-9 and wraps the matrix.
Flag make_flag(const Eigen::MatrixXd& frame);

/// Flag of left singular subspaces, singular values sorted decreasing, each
/// column's first nonzero entry made positive.  V_k is recovered from the
/// top singular direction of the exact k-th exterior power, so the flag
/// stays accurate at singular value spreads far beyond double range (where
/// an SVD of the double matrix would return noise for the sub-dominant
/// columns).  Throws FlagsError when two consecutive log singular values
/// coincide within 1e-10 (the flag is then indeterminate) or the matrix is
/// exactly singular.  Scale invariant.
Flag forward_flag(const ScaledMatrix& g);
Flag forward_flag(const GroupElement& g);

/// max over i = 1..d-1 of the operator-norm distance between the orthogonal
/// projectors onto V_i(a) and V_i(b).  A metric bounded by 1.
double flag_distance(const Flag& a, const Flag& b);

/// True iff span(first i columns of a) and span(first d-i columns of b)
/// are complementary for every i, tested as |det| > 1e-8 on the juxtaposed
/// unit columns.
bool is_transverse(const Flag& a, const Flag& b);

/// Image flag: V_i -> g V_i, frame re-orthonormalized by QR.
Flag transform_flag(const ScaledMatrix& g, const Flag& b);
Flag transform_flag(const GroupElement& g, const Flag& b);

/// Basis with det +1; column i spans the line E_i of the flat.  The inverse
/// is cached at construction and polished by Newton steps when the basis
/// condition number exceeds 1e6 (nearly tangent flag pairs).
struct OrientedFlat {
  Eigen::MatrixXd basis;
  Eigen::MatrixXd inverse_basis;

  explicit OrientedFlat(const Eigen::MatrixXd& basis_in);

  int dim() const { return static_cast<int>(basis.rows()); }

  static OrientedFlat identity(int d);
};

/// E_i = V_i(b_plus) cap W_{d-i+1}(b_minus), each computed as the 1-dim
/// nullspace of the stacked orthogonal complements.  Columns are unit
/// length with their largest-magnitude entry positive, then the basis is
/// scaled to det +1 (last column flipped if the determinant is negative).
/// Throws FlagsError unless is_transverse(b_plus, b_minus).
OrientedFlat flat_from_flags(const Flag& b_plus, const Flag& b_minus);

struct ProjectionResult {
  lie::CartanCoord pi;  ///< zero-sum minimizer
  double distance = 0.0;
  int evals = 0;
};

/// One compound in exact form: entry (i,j) = a[i*rows+j] * 2^e.
struct ExactCompound {
  std::vector<exact::BigInt> a;
  std::int64_t e = 0;
};

/// Compounds L^k (k = 1..d-1) with exact rational entries.  Doubles are
/// exact rationals, so both group elements and float matrices convert
/// losslessly; products of these sets stay exact.
struct ExactCompoundSet {
  int dim = 0;
  std::vector<ExactCompound> comp;  // comp[k-1]
  double log_det = 0.0;             // log |det|
};

ExactCompoundSet exact_compounds(const GroupElement& g);
ExactCompoundSet exact_compounds(const ScaledMatrix& m);

/// The point base * exp(cartan) * o.  Keeping the Cartan part symbolic
/// instead of multiplied in lets tests and callers place points with
/// singular value spreads far beyond double range.
struct FlatPoint {
  ExactCompoundSet base;
  Eigen::VectorXd cartan;
};

/// basis * exp(v) * o on the given flat; v is re-centered to zero sum.
FlatPoint point_on_flat(const OrientedFlat& f, const Eigen::VectorXd& v);

/// h * p (left translation by a group element; exact).
FlatPoint translated_point(const GroupElement& h, const FlatPoint& p);

/// Distance from a fixed point x.o to sliding points basis * exp(v) * o of a
/// fixed flat, as a function of v.  The products L^k(basis^-1) L^k(x) are
/// accumulated exactly (basis^-1 = adjugate/det over the basis doubles read
/// as rationals) and stored entrywise as sign and log2 magnitude, so the
/// function evaluated is the exact distance function of the stored flat.  A
/// float product here would instead bury small true entries under
/// cancellation noise that the Cartan row rescaling then amplifies into
/// phantom singular values.  One evaluation adds the row weights
/// -sum_{i in S} v_i in log2, rebuilds the dominant-entry-normalized matrix,
/// and reads the log singular value sums off sigma_max.  Convex.
class FlatObjective {
 public:
  FlatObjective(const OrientedFlat& f, const GroupElement& x);
  FlatObjective(const OrientedFlat& f, const ScaledMatrix& x);
  FlatObjective(const OrientedFlat& f, const FlatPoint& x);

  int dim() const { return d_; }

  /// f(v); v is re-centered to zero sum.
  double at_cartan(const Eigen::VectorXd& v) const;
  /// f(iota_inv(y)) for y in R^{d-1}.
  double at_iota(const Eigen::VectorXd& y) const;

 private:
  struct LogMat {
    Eigen::MatrixXd log2mag;  // -inf marks an exact zero
    Eigen::MatrixXd sign;     // -1, 0, +1
  };

  void init(const OrientedFlat& f, const FlatPoint& x);

  int d_ = 0;
  std::vector<LogMat> p_;  // P_k, k = 1..d-1
  double log_det_ = 0.0;
};

/// Closest-point projection onto one flat, with a warm start shared across
/// queries (per-path state; not thread safe).  Minimization is Nelder-Mead
/// over iota coordinates: convergence at simplex diameter < 1e-8, at most
/// 1e4 iterations (FlagsError beyond that).  The objective is convex, so
/// the minimizer is unique.
class FlatProjector {
 public:
  explicit FlatProjector(const OrientedFlat& f);

  const OrientedFlat& flat() const { return flat_; }

  ProjectionResult project(const GroupElement& x);
  ProjectionResult project(const ScaledMatrix& x);
  ProjectionResult project(const FlatPoint& x);

  /// True iff min f <= threshold.  Cheap path: the warm-start value is
  /// tested first; otherwise Nelder-Mead runs with an early exit as soon as
  /// any evaluation reaches the threshold.
  bool within(const GroupElement& x, double threshold);
  bool within(const FlatPoint& x, double threshold);

  void reset_warm_start();

 private:
  ProjectionResult minimize(const FlatObjective& obj);
  bool threshold_query(const FlatObjective& obj, double threshold);

  OrientedFlat flat_;
  Eigen::VectorXd warm_;  // iota coordinates of the last minimizer
  bool has_warm_ = false;
};

/// One-shot projection: two independent starts, best result returned.
ProjectionResult project_to_flat(const OrientedFlat& f, const GroupElement& x);
ProjectionResult project_to_flat(const OrientedFlat& f, const ScaledMatrix& x);

double dist_to_flat(const OrientedFlat& f, const GroupElement& x);

}  // namespace boundarylab::flags
