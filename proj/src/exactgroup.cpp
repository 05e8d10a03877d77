#include "boundarylab/exactgroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boundarylab::exact {

namespace {

// Bit length of |x| (0 for x == 0).
std::int64_t bit_length(const BigInt& x) {
  if (x == 0) return 0;
  return static_cast<std::int64_t>(boost::multiprecision::msb(boost::multiprecision::abs(x))) + 1;
}

// x * 2^-e as a double, extracting at most 62 high bits so the conversion is
// accurate to ~2^-52 relative even when x has thousands of bits.
double scaled_to_double(const BigInt& x, std::int64_t e) {
  if (x == 0) return 0.0;
  const bool neg = x < 0;
  BigInt mag = neg ? BigInt(-x) : x;
  const std::int64_t bits = bit_length(mag);
  std::int64_t shift = bits - 62;
  if (shift > 0) {
    mag >>= static_cast<unsigned>(shift);
  } else {
    shift = 0;
  }
  double m = mag.convert_to<double>();
  if (neg) m = -m;
  const std::int64_t ex = shift - e;
  if (ex > std::numeric_limits<int>::max() || ex < std::numeric_limits<int>::min()) {
    throw ExactGroupError("scaled conversion exponent out of range");
  }
  return std::ldexp(m, static_cast<int>(ex));
}

}  // namespace

void ScaledMatrix::normalize() {
  const double m = mantissa.cwiseAbs().maxCoeff();
  if (m == 0.0 || !std::isfinite(m)) {
    throw ExactGroupError("cannot normalize zero or non-finite matrix");
  }
  int e = 0;
  const double f = std::frexp(m, &e);  // m = f * 2^e, f in [1/2, 1)
  (void)f;
  // After scaling by 2^-(e-?) the max entry should land in [1/2, 1]; frexp
  // puts it in [1/2, 1) except when m is an exact power of two times 1/2.
  if (std::ldexp(1.0, e - 1) == m) e -= 1;  // keep exact powers of two at 1.0
  mantissa *= std::ldexp(1.0, -e);
  exponent += e;
}

ScaledMatrix ScaledMatrix::multiply(const ScaledMatrix& a, const ScaledMatrix& b) {
  if (a.dim() != b.dim()) throw ExactGroupError("dimension mismatch in scaled multiply");
  ScaledMatrix out(a.mantissa * b.mantissa, a.exponent + b.exponent);
  out.normalize();
  return out;
}

Eigen::MatrixXd ScaledMatrix::value() const {
  if (exponent > 1000 || exponent < -1000) {
    throw ExactGroupError("scaled value exceeds IEEE double range; stay in scaled form");
  }
  return mantissa * std::ldexp(1.0, static_cast<int>(exponent));
}

BigInt exact_det(int dim, const std::vector<BigInt>& row_major) {
  if (dim <= 0 || row_major.size() != static_cast<size_t>(dim) * dim) {
    throw ExactGroupError("bad matrix shape");
  }
  if (dim == 1) return row_major[0];
  if (dim == 2) return row_major[0] * row_major[3] - row_major[1] * row_major[2];
  // Bareiss fraction-free elimination; every division below is exact.
  std::vector<BigInt> a = row_major;
  auto at = [&](int i, int j) -> BigInt& { return a[static_cast<size_t>(i) * dim + j]; };
  BigInt prev(1);
  int sign = 1;
  for (int k = 0; k < dim - 1; ++k) {
    if (at(k, k) == 0) {
      int p = -1;
      for (int i = k + 1; i < dim; ++i) {
        if (at(i, k) != 0) { p = i; break; }
      }
      if (p < 0) return BigInt(0);
      for (int j = 0; j < dim; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (int i = k + 1; i < dim; ++i) {
      for (int j = k + 1; j < dim; ++j) {
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
      }
      at(i, k) = 0;
    }
    prev = at(k, k);
  }
  BigInt d = at(dim - 1, dim - 1);
  return sign > 0 ? d : BigInt(-d);
}

GroupElement::GroupElement(int dim, std::vector<BigInt> row_major) {
  if (dim < 1 || dim > 16) throw ExactGroupError("unsupported dimension");
  if (row_major.size() != static_cast<size_t>(dim) * dim) {
    throw ExactGroupError("entry count does not match dimension");
  }
  if (exact_det(dim, row_major) != 1) {
    throw ExactGroupError("determinant must be exactly +1");
  }
  dim_ = dim;
  entries_ = std::move(row_major);
}

GroupElement GroupElement::identity(int dim) {
  std::vector<BigInt> e(static_cast<size_t>(dim) * dim, BigInt(0));
  for (int i = 0; i < dim; ++i) e[static_cast<size_t>(i) * dim + i] = 1;
  return GroupElement(dim, std::move(e));
}

GroupElement GroupElement::multiply(const GroupElement& rhs) const {
  if (dim_ != rhs.dim_) throw ExactGroupError("dimension mismatch in multiply");
  GroupElement out;
  out.dim_ = dim_;
  out.entries_.assign(static_cast<size_t>(dim_) * dim_, BigInt(0));
  for (int i = 0; i < dim_; ++i) {
    for (int k = 0; k < dim_; ++k) {
      const BigInt& aik = at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < dim_; ++j) {
        out.entries_[static_cast<size_t>(i) * dim_ + j] += aik * rhs.at(k, j);
      }
    }
  }
  return out;  // closure: det stays +1, no re-validation needed
}

GroupElement GroupElement::inverse() const {
  // adjugate transpose; with det == +1 the adjugate IS the inverse.
  GroupElement out;
  out.dim_ = dim_;
  out.entries_.assign(static_cast<size_t>(dim_) * dim_, BigInt(0));
  if (dim_ == 1) {
    out.entries_[0] = 1;
    return out;
  }
  std::vector<BigInt> minor(static_cast<size_t>(dim_ - 1) * (dim_ - 1));
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      int r = 0;
      for (int ii = 0; ii < dim_; ++ii) {
        if (ii == j) continue;  // building cofactor C_ji for inverse entry (i,j)
        int c = 0;
        for (int jj = 0; jj < dim_; ++jj) {
          if (jj == i) continue;
          minor[static_cast<size_t>(r) * (dim_ - 1) + c] = at(ii, jj);
          ++c;
        }
        ++r;
      }
      BigInt cof = exact_det(dim_ - 1, minor);
      if (((i + j) & 1) != 0) cof = -cof;
      out.entries_[static_cast<size_t>(i) * dim_ + j] = std::move(cof);
    }
  }
  return out;
}

ScaledMatrix GroupElement::to_scaled() const {
  BigInt max_abs(0);
  for (const BigInt& x : entries_) {
    BigInt a = boost::multiprecision::abs(x);
    if (a > max_abs) max_abs = a;
  }
  if (max_abs == 0) throw ExactGroupError("zero matrix cannot be scaled");
  // Smallest e with max_abs <= 2^e, so the max mantissa entry is in [1/2, 1].
  std::int64_t e = bit_length(max_abs);
  if ((BigInt(1) << static_cast<unsigned>(e - 1)) == max_abs) e -= 1;
  ScaledMatrix out;
  out.mantissa.resize(dim_, dim_);
  out.exponent = e;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      out.mantissa(i, j) = scaled_to_double(at(i, j), e);
    }
  }
  return out;
}

std::string twos_complement_bytes(const BigInt& x) {
  if (x == 0) return std::string(1, '\0');
  std::vector<std::uint8_t> mag;
  BigInt a = boost::multiprecision::abs(x);
  boost::multiprecision::export_bits(a, std::back_inserter(mag), 8);  // big-endian
  std::string out;
  if (x > 0) {
    if (mag[0] & 0x80u) out.push_back('\0');
    out.append(mag.begin(), mag.end());
    return out;
  }
  // c = 2^(8m) - mag over the magnitude's byte width, widened with 0xff if
  // the sign bit would read as positive
  std::vector<std::uint8_t> c(mag.size());
  int carry = 0;
  for (size_t i = mag.size(); i-- > 0;) {
    int v = -static_cast<int>(mag[i]) - carry;
    carry = 0;
    while (v < 0) { v += 0x100; carry = 1; }
    c[i] = static_cast<std::uint8_t>(v);
  }
  if (!(c[0] & 0x80u)) out.push_back('\xff');
  out.append(c.begin(), c.end());
  return out;
}

BigInt from_twos_complement_bytes(const std::string& bytes) {
  if (bytes.empty()) throw ExactGroupError("empty integer encoding");
  const bool neg = (static_cast<std::uint8_t>(bytes[0]) & 0x80u) != 0;
  BigInt v(0);
  for (char ch : bytes) {
    v <<= 8;
    v += static_cast<std::uint8_t>(ch);
  }
  if (neg) v -= BigInt(1) << static_cast<unsigned>(8 * bytes.size());
  return v;
}

void append_varint(std::string& out, std::uint64_t v) {
  while (v >= 0x80u) {
    out.push_back(static_cast<char>((v & 0x7fu) | 0x80u));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

std::uint64_t read_varint(const std::string& in, size_t& pos) {
  std::uint64_t v = 0;
  int shift = 0;
  while (true) {
    if (pos >= in.size() || shift > 63) throw ExactGroupError("truncated varint");
    const std::uint8_t b = static_cast<std::uint8_t>(in[pos++]);
    v |= static_cast<std::uint64_t>(b & 0x7fu) << shift;
    if ((b & 0x80u) == 0) break;
    shift += 7;
  }
  return v;
}

std::string GroupElement::canonical_key() const {
  std::string out;
  out.push_back(static_cast<char>(dim_));
  for (const BigInt& x : entries_) {
    const std::string b = twos_complement_bytes(x);
    append_varint(out, b.size());
    out += b;
  }
  return out;
}

GroupElement GroupElement::from_canonical_key(const std::string& key) {
  if (key.empty()) throw ExactGroupError("empty canonical key");
  const int dim = static_cast<std::uint8_t>(key[0]);
  size_t pos = 1;
  std::vector<BigInt> entries;
  entries.reserve(static_cast<size_t>(dim) * dim);
  for (int k = 0; k < dim * dim; ++k) {
    const std::uint64_t len = read_varint(key, pos);
    if (pos + len > key.size()) throw ExactGroupError("truncated canonical key");
    entries.push_back(from_twos_complement_bytes(key.substr(pos, len)));
    pos += len;
  }
  if (pos != key.size()) throw ExactGroupError("trailing bytes in canonical key");
  return GroupElement(dim, std::move(entries));
}

bool GroupElement::is_identity() const {
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      if (at(i, j) != (i == j ? 1 : 0)) return false;
    }
  }
  return true;
}

}  // namespace boundarylab::exact
