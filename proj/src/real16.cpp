#include "qeihan/real16.hpp"

#include <cmath>
#include <limits>

namespace qeihan {

namespace {

// Round-to-nearest-even double -> binary16, split out so the saturating
// variant can post-process overflow.
uint16_t convert(double v) {
  if (std::isnan(v)) return 0x7e00;
  uint16_t sign = std::signbit(v) ? 0x8000 : 0;
  double a = std::fabs(v);
  if (a == 0.0) return sign;
  if (std::isinf(v)) return sign | 0x7c00;

  int e;
  std::frexp(a, &e);  // a = m * 2^e, m in [0.5, 1)
  int unbiased = e - 1;

  if (unbiased >= -14) {
    // Normal range: quantize the significand to 10 fraction bits.
    double scaled = std::ldexp(a, 10 - unbiased);  // in [1024, 2048)
    long q = std::lround(std::nearbyint(scaled));  // ties-to-even via nearbyint
    if (q == 2048) {
      q = 1024;
      ++unbiased;
    }
    if (unbiased > 15) return sign | 0x7c00;  // overflow
    return static_cast<uint16_t>(sign | ((unbiased + 15) << 10) | (q - 1024));
  }

  // Subnormal range: value = q * 2^-24 with q in [0, 1024].
  double scaled = std::ldexp(a, 24);
  long q = std::lround(std::nearbyint(scaled));
  if (q >= 1024) return sign | 0x0400;  // rounds up to the smallest normal
  return static_cast<uint16_t>(sign | q);
}

}  // namespace

Real16 Real16::from_double(double v) { return from_bits(convert(v)); }

Real16 Real16::from_double_saturate(double v) {
  if (std::isnan(v)) return from_bits(0x7e00);
  uint16_t b = convert(v);
  if ((b & 0x7fff) == 0x7c00) b = (b & 0x8000) | 0x7bff;  // +-65504
  return from_bits(b);
}

double Real16::to_double() const {
  int e = raw_exponent();
  int f = fraction();
  double mag;
  if (e == 0) {
    mag = std::ldexp(static_cast<double>(f), -24);
  } else if (e == 0x1f) {
    if (f != 0) return std::nan("");
    mag = std::numeric_limits<double>::infinity();
  } else {
    mag = std::ldexp(static_cast<double>(1024 + f), e - 15 - 10);
  }
  return sign() ? -mag : mag;
}

}  // namespace qeihan
