#pragma once
// Exact integer matrix arithmetic for discrete subgroups of SL(d,R).
//
// GroupElement holds a d x d integer matrix with determinant exactly +1;
// products and inverses stay exact at any word length.  ScaledMatrix is the
// floating-point snapshot (mantissa, binary exponent) used by all downstream
// numerics, so no magnitude limit is ever imposed by IEEE range.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace boundarylab::exact {

using BigInt = boost::multiprecision::cpp_int;

/// Raised on malformed input (wrong determinant, dimension mismatch, bad key bytes).
class ExactGroupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// value = mantissa * 2^exponent; after normalize() the largest |entry| of the
/// mantissa lies in [1/2, 1].
struct ScaledMatrix {
  Eigen::MatrixXd mantissa;
  std::int64_t exponent = 0;

  ScaledMatrix() = default;
  ScaledMatrix(Eigen::MatrixXd m, std::int64_t e) : mantissa(std::move(m)), exponent(e) {}

  int dim() const { return static_cast<int>(mantissa.rows()); }

  /// Rescales so that max |entry| is in [1/2, 1].  All-zero matrices are rejected.
  void normalize();

  /// Product of two scaled matrices, renormalized.
  static ScaledMatrix multiply(const ScaledMatrix& a, const ScaledMatrix& b);

  /// Reconstructed plain double value; overflows to +-inf when the exponent
  /// exceeds IEEE range (callers that care must stay in scaled form).
  Eigen::MatrixXd value() const;
};

/// Exact determinant of a row-major integer matrix (fraction-free elimination).
BigInt exact_det(int dim, const std::vector<BigInt>& row_major);

class GroupElement {
 public:
  /// Validates det == +1 exactly; entries are row-major, size dim*dim.
  GroupElement(int dim, std::vector<BigInt> row_major);

  static GroupElement identity(int dim);

  int dim() const { return dim_; }
  const BigInt& at(int i, int j) const { return entries_[static_cast<size_t>(i) * dim_ + j]; }
  const std::vector<BigInt>& entries() const { return entries_; }

  GroupElement multiply(const GroupElement& rhs) const;
  GroupElement operator*(const GroupElement& rhs) const { return multiply(rhs); }

  /// Exact inverse via the adjugate (det is +1, so no division).
  GroupElement inverse() const;

  /// Mantissa/exponent snapshot; each entry is rounded separately, so the
  /// entrywise relative error is below 2^-40 regardless of word length.
  ScaledMatrix to_scaled() const;

  /// Injective serialization: dim byte, then row-major entries, each as a
  /// varint length prefix plus minimal big-endian two's-complement bytes.
  std::string canonical_key() const;

  /// Inverse of canonical_key (validates structure and determinant).
  static GroupElement from_canonical_key(const std::string& key);

  bool operator==(const GroupElement& rhs) const {
    return dim_ == rhs.dim_ && entries_ == rhs.entries_;
  }
  bool operator!=(const GroupElement& rhs) const { return !(*this == rhs); }

  bool is_identity() const;

 private:
  GroupElement() = default;  // used by factory paths that validate separately

  int dim_ = 0;
  std::vector<BigInt> entries_;
};

/// Minimal big-endian two's-complement encoding of one integer (shared by
/// canonical_key and the record serializer).
std::string twos_complement_bytes(const BigInt& x);
BigInt from_twos_complement_bytes(const std::string& bytes);

/// Unsigned LEB128 helpers used by every byte-level serializer in the project.
void append_varint(std::string& out, std::uint64_t v);
std::uint64_t read_varint(const std::string& in, size_t& pos);

}  // namespace boundarylab::exact
