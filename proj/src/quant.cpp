#include "qeihan/quant.hpp"

#include <cmath>

#include "qeihan/errors.hpp"

namespace qeihan {

QuantWeight uniform_quantize(double r, double s, int z) {
  if (!std::isfinite(r)) fail(Err::NonFiniteValue, "uniform_quantize input");
  if (!(s > 0.0) || !std::isfinite(s)) fail(Err::BadConfig, "scale must be positive");
  double q = std::nearbyint(r / s) - z;
  if (q < -128.0) q = -128.0;
  if (q > 127.0) q = 127.0;
  return QuantWeight{static_cast<int8_t>(q)};
}

namespace {

QuantActivation pruned_zero(const LogQuantParams& p) {
  return QuantActivation{true, Sign::Pos, p.min_exp()};
}

QuantActivation clip_to_activation(double x, int rounded, const LogQuantParams& p) {
  int e = rounded;
  if (e <= p.min_exp()) return pruned_zero(p);  // min doubles as the zero encoding
  if (e > p.max_exp()) e = p.max_exp();
  return QuantActivation{false, x < 0 ? Sign::Neg : Sign::Pos, e};
}

}  // namespace

QuantActivation log2_quantize_ref(double x, LogQuantParams p) {
  if (!std::isfinite(x)) fail(Err::NonFiniteValue, "log2_quantize_ref input");
  if (x == 0.0) return pruned_zero(p);
  // Round half up. A tie would need |x| to be an exact odd power of sqrt(2),
  // which no binary16 value is, so the convention is unobservable there.
  int rounded = static_cast<int>(std::floor(std::log2(std::fabs(x)) + 0.5));
  return clip_to_activation(x, rounded, p);
}

int round_log2_hw(Real16 x) {
  if (!x.is_finite()) fail(Err::NonFiniteValue, "round_log2_hw input");
  if (x.is_zero() || x.is_subnormal())
    fail(Err::ZeroOrSubnormal, "caller must flush zeros and subnormals");
  return x.unbiased_exponent() + (x.fraction() >= kSqrt2FractionThreshold ? 1 : 0);
}

QuantActivation log2_quantize_hw(Real16 x, LogQuantParams p) {
  if (!x.is_finite()) fail(Err::NonFiniteValue, "log2_quantize_hw input");
  // Subnormals always land at or below the clip minimum, so flushing them is
  // indistinguishable from quantizing them.
  if (x.is_zero() || x.is_subnormal()) return pruned_zero(p);
  return clip_to_activation(x.sign() ? -1.0 : 1.0, round_log2_hw(x), p);
}

Real16 dequantize_output(int16_t acc, double s_w) {
  return Real16::from_double_saturate(static_cast<double>(acc) * s_w);
}

}  // namespace qeihan
