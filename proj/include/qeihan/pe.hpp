// Functional model of one processing element: buffer configuration, the
// decode-and-shift unit, the saturating ADD array, and the SFU.
#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "qeihan/mem3d.hpp"
#include "qeihan/model.hpp"
#include "qeihan/quant.hpp"

namespace qeihan {

struct PEConfig {
  int ib_bytes = 64;
  int ob_bytes = 2048;
  int wb_bytes = 64;
  int num_adders = 16;  // d
  bool double_buffered = true;

  int ib_half_bytes() const { return double_buffered ? ib_bytes / 2 : ib_bytes; }
  int ob_half_bytes() const { return double_buffered ? ob_bytes / 2 : ob_bytes; }

  void validate(const MemGeometry& g) const;  // throws BadConfig
};

// Reassembles a fetched MSB slice into the already-shifted 16-bit product
// term: sign-extension of the slice IS the arithmetic right shift for
// negative exponents; non-negative exponents shift the full weight left.
int16_t decode_and_shift(WeightSlice slice, int exp);

struct PartialOutput {
  int16_t value = 0;
};

struct AccumFlags {
  bool saturated = false;
};

// out +- shifted according to the activation sign, saturating at int16 bounds.
PartialOutput accumulate(PartialOutput out, int16_t shifted, Sign act_sign, AccumFlags& flags);

// 256-entry LUT over the top 8 bits of the binary16 representation.
struct LutTable {
  std::array<uint16_t, 256> values{};
  Real16 lookup(Real16 x) const { return Real16::from_bits(values[x.bits() >> 8]); }
};

const LutTable& lut_table(const std::string& id);  // "sigmoid" | "tanh"

// De-quantizes final partials and applies the layer's activation function and
// optional max pooling. `outs` is laid out [oc][y][x] row-major.
Tensor sfu_apply(std::span<const int16_t> outs, const LayerDescriptor& layer, double s_w);

// Activation + pooling half of the SFU, for callers that de-quantize
// differently (the uniform-quantization baseline).
Tensor apply_activation_pool(const Tensor& values, const LayerDescriptor& layer);

}  // namespace qeihan
