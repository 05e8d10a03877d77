#pragma once
// Cartan-level geometry for SL(d,R)/SO(d): radial parts (sorted log singular
// values), polar decompositions, the generalized distance vector, the Weyl
// group as permutations, and the isometric chart iota from the zero-sum
// hyperplane onto R^(d-1) with its rounding to the integer lattice.
//
// Radial parts are computed from exterior powers: log(s_1...s_k) = log ||L^k g||
// (Cauchy-Binet), with each compound tracked as (mantissa, exponent).  The
// minors are exact integers whenever the input is a GroupElement, so every
// log singular value carries ~1e-12 absolute error at any word length, far
// beyond what a single double-precision SVD of an ill-conditioned matrix can
// deliver.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "boundarylab/exactgroup.hpp"

namespace boundarylab::lie {

using exact::GroupElement;
using exact::ScaledMatrix;

class LieGeomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted (non-increasing), zero-sum vector of log singular values.
struct RadialVector {
  Eigen::VectorXd v;
  double norm() const { return v.norm(); }
};

/// Zero-sum vector in the Cartan subalgebra (not necessarily sorted).
struct CartanCoord {
  Eigen::VectorXd v;
};

/// Point of the integer lattice in iota coordinates (d-1 entries).
struct LatticePoint {
  std::vector<long long> x;
  bool operator==(const LatticePoint& o) const { return x == o.x; }
};

/// Permutation w with (w.apply(v))[k] = v[perm[k]]; weyl_sort returns the w
/// sorting v into non-increasing order.
class WeylElement {
 public:
  WeylElement() = default;
  explicit WeylElement(std::vector<int> perm);

  static WeylElement identity(int d);

  int dim() const { return static_cast<int>(perm_.size()); }
  const std::vector<int>& perm() const { return perm_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  WeylElement inverse() const;

  bool operator==(const WeylElement& o) const { return perm_ == o.perm_; }

 private:
  std::vector<int> perm_;
};

/// Stable descending sort: ties keep the smaller original index first.
/// Returns (w, sorted) with w.apply(v) == sorted.
std::pair<WeylElement, Eigen::VectorXd> weyl_sort(const Eigen::VectorXd& v);

/// Orthonormal basis of the zero-sum hyperplane (Helmert columns), fixed once
/// per dimension and shared bit-for-bit by encoder and decoder.
const Eigen::MatrixXd& helmert_basis(int d);

/// Isometry from the zero-sum hyperplane onto R^(d-1) and its inverse.
Eigen::VectorXd iota(const Eigen::VectorXd& zero_sum_v);
Eigen::VectorXd iota_inv(int d, const Eigen::VectorXd& y);

/// Nearest lattice point in iota coordinates; half-integer ties round toward
/// minus infinity.
LatticePoint round_lattice(const Eigen::VectorXd& iota_coords);
Eigen::VectorXd lattice_to_iota(const LatticePoint& p);

// ---------------------------------------------------------------------------
// Exterior-power machinery.

/// Lexicographically ordered k-subsets of {0..d-1}; cached per (d, k).
const std::vector<std::vector<int>>& subset_table(int d, int k);

/// Compounds comp[k-1] = L^k g for k = 1..d-1, plus log|det g| (the d-th
/// compound).  log_det is exactly 0 for group elements.
struct CompoundSet {
  int dim = 0;
  std::vector<ScaledMatrix> comp;
  double log_det = 0.0;
};

CompoundSet compounds_of(const GroupElement& g);
/// Double-precision minors; pass log_det when the caller knows it exactly
/// (e.g. 0 for SL inputs), otherwise it is taken from an LU factorization.
CompoundSet compounds_of_scaled(const ScaledMatrix& g);
CompoundSet compounds_of_scaled(const ScaledMatrix& g, double log_det);
CompoundSet compound_multiply(const CompoundSet& a, const CompoundSet& b);

/// log of the top singular value (spectral norm), exponent included.
double log_sigma_max(const ScaledMatrix& m);

/// Radial part assembled from compound norms; entries are clamped into
/// non-increasing order (fp noise at ties) and re-centered to zero sum.
RadialVector radial_from_compounds(const CompoundSet& c);

RadialVector radial(const ScaledMatrix& g);
RadialVector radial(const GroupElement& g);

// ---------------------------------------------------------------------------
// Polar decomposition and the generalized distance.

/// g = k1 * exp(r) * k2 * e^(log_scale); log_scale is 0 for det +1 inputs.
struct PolarDecomposition {
  Eigen::MatrixXd k1;
  RadialVector r;
  Eigen::MatrixXd k2;
  double log_scale = 0.0;
};

PolarDecomposition polar_decompose(const ScaledMatrix& g);
PolarDecomposition polar_decompose(const GroupElement& g);

/// D(x.o, y.o) = r(x^-1 y), computed through the exact product.
RadialVector generalized_distance(const GroupElement& x, const GroupElement& y);

/// dist(x.o, y.o) = ||D(x.o, y.o)||_2.
double dist(const GroupElement& x, const GroupElement& y);

}  // namespace boundarylab::lie
