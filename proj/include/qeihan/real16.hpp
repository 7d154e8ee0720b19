// IEEE 754 binary16 value type kept as its raw bit pattern so that bit-field
// manipulations (sign / exponent / fraction) match what the hardware sees.
#pragma once

#include <cstdint>

namespace qeihan {

class Real16 {
 public:
  static constexpr int kFractionBits = 10;
  static constexpr int kExpBias = 15;
  static constexpr double kMaxValue = 65504.0;

  constexpr Real16() = default;

  static constexpr Real16 from_bits(uint16_t b) {
    Real16 r;
    r.bits_ = b;
    return r;
  }

  // Round-to-nearest-even conversion; values beyond the finite range become inf.
  static Real16 from_double(double v);
  // Same conversion but clamps to +-65504 instead of producing inf.
  static Real16 from_double_saturate(double v);

  double to_double() const;  // exact

  constexpr uint16_t bits() const { return bits_; }
  constexpr bool sign() const { return (bits_ >> 15) != 0; }
  constexpr int raw_exponent() const { return (bits_ >> 10) & 0x1f; }
  constexpr int fraction() const { return bits_ & 0x3ff; }
  // Unbiased exponent of a normal value (raw - 15).
  constexpr int unbiased_exponent() const { return raw_exponent() - kExpBias; }

  constexpr bool is_zero() const { return (bits_ & 0x7fff) == 0; }
  constexpr bool is_subnormal() const { return raw_exponent() == 0 && fraction() != 0; }
  constexpr bool is_inf() const { return raw_exponent() == 0x1f && fraction() == 0; }
  constexpr bool is_nan() const { return raw_exponent() == 0x1f && fraction() != 0; }
  constexpr bool is_finite() const { return raw_exponent() != 0x1f; }

  friend constexpr bool operator==(Real16 a, Real16 b) { return a.bits_ == b.bits_; }

 private:
  uint16_t bits_ = 0;
};

}  // namespace qeihan
