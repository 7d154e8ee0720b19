// Weight and activation quantizers: INT8 uniform quantization for weights,
// base-2 logarithmic quantization for activations (software reference and
// comparator-based hardware path), plus output de-quantization.
#pragma once

#include <cstdint>

#include "qeihan/real16.hpp"

namespace qeihan {

enum class Sign : uint8_t { Pos, Neg };

struct LogQuantParams {
  int exp_bits = 4;

  constexpr int min_exp() const { return -(1 << (exp_bits - 1)); }
  constexpr int max_exp() const { return (1 << (exp_bits - 1)) - 1; }
};

// Sign + small-integer exponent form of one activation. A pruned activation
// (exact zero, or exponent clipped to min_exp) is canonically {zero, Pos, min}.
struct QuantActivation {
  bool is_zero = true;
  Sign sign = Sign::Pos;
  int exp = -8;

  friend bool operator==(const QuantActivation& a, const QuantActivation& b) {
    if (a.is_zero || b.is_zero) return a.is_zero == b.is_zero;
    return a.sign == b.sign && a.exp == b.exp;
  }
};

struct QuantWeight {
  int8_t value = 0;
};

// Round-to-nearest(r/s) - z, saturated to the int8 range.
QuantWeight uniform_quantize(double r, double s, int z);

// Software reference of the LOG2 quantizer: round-half-up of log2|x|, clipped
// to [min_exp, max_exp]; min_exp doubles as the pruned-to-zero encoding.
QuantActivation log2_quantize_ref(double x, LogQuantParams p = {});

// Smallest 10-bit fraction f such that 1 + f/1024 >= sqrt(2). The comparator
// must use this value (not the rounded-to-nearest encoding of sqrt(2), 424)
// or m = 1 + 424/1024 would be classified on the wrong side of the half-way
// point.
inline constexpr int kSqrt2FractionThreshold = 425;

// Comparator implementation of round-half-up(log2|x|) over normal binary16
// inputs: unbiased exponent plus one when the fraction is >= sqrt(2)'s
// threshold. Throws ZeroOrSubnormal when fed a flushed-away input.
int round_log2_hw(Real16 x);

// Hardware LOG2 quantizer: flushes zeros/subnormals, then clips the comparator
// result. Agrees with log2_quantize_ref on every finite binary16 input.
QuantActivation log2_quantize_hw(Real16 x, LogQuantParams p = {});

// SFU de-quantization of a 16-bit integer partial output back to binary16,
// saturating at the largest finite value.
Real16 dequantize_output(int16_t acc, double s_w);

}  // namespace qeihan
