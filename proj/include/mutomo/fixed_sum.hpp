#pragma once

#include <cmath>

namespace mutomo {

__extension__ typedef __int128 int128_t;

/// Fixed-point accumulator with 2^-64 resolution.
///
/// Tallies are summed as integers so that addition is exactly associative and
/// commutative: partial results can be merged in any order, across any number
/// of workers, and still produce bit-identical totals.
class FixedSum {
 public:
  constexpr FixedSum() = default;

  static FixedSum from_double(double value) {
    FixedSum s;
    s.raw_ = static_cast<int128_t>(std::nearbyint(std::ldexp(value, kFractionBits)));
    return s;
  }

  FixedSum& operator+=(const FixedSum& o) {
    raw_ += o.raw_;
    return *this;
  }
  FixedSum operator+(const FixedSum& o) const {
    FixedSum s = *this;
    s += o;
    return s;
  }
  FixedSum& add(double value) { return *this += from_double(value); }

  double value() const { return std::ldexp(static_cast<double>(raw_), -kFractionBits); }
  bool is_zero() const { return raw_ == 0; }
  bool positive() const { return raw_ > 0; }
  int128_t raw() const { return raw_; }

  bool operator==(const FixedSum&) const = default;

  /// Quotient of two sums computed without the common scale factor.
  static double ratio(const FixedSum& num, const FixedSum& den) {
    return static_cast<double>(num.raw_) / static_cast<double>(den.raw_);
  }

 private:
  static constexpr int kFractionBits = 64;
  int128_t raw_ = 0;
};

}  // namespace mutomo
