#include "qeihan/pe.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "qeihan/errors.hpp"

namespace qeihan {

void PEConfig::validate(const MemGeometry& g) const {
  if (ib_bytes <= 0 || ob_bytes <= 0 || wb_bytes <= 0 || num_adders <= 0)
    fail(Err::BadConfig, "PE fields must be positive");
  // Worst case resident data: all 8 bits of M weights.
  if (wb_bytes < g.bus_bits) fail(Err::BadConfig, "wb_bytes must hold 8 bit-planes of M weights");
}

int16_t decode_and_shift(WeightSlice slice, int exp) {
  if (exp < -7 || exp > 7) fail(Err::SliceLengthMismatch, "exponent outside [-7, 7]");
  int k = exp < 0 ? -exp : 0;
  if (slice.nbits != 8 - k) fail(Err::SliceLengthMismatch, "slice width does not match exponent");
  if (exp >= 0) {
    int16_t w = static_cast<int16_t>(static_cast<int8_t>(slice.bits));
    return static_cast<int16_t>(w << exp);
  }
  // Sign-extending the MSB slice is the arithmetic right shift of the full
  // weight: the discarded low bits were never fetched.
  int8_t aligned = static_cast<int8_t>(static_cast<uint8_t>(slice.bits << k));
  return static_cast<int16_t>(aligned >> k);
}

PartialOutput accumulate(PartialOutput out, int16_t shifted, Sign act_sign, AccumFlags& flags) {
  int32_t s = static_cast<int32_t>(out.value) +
              (act_sign == Sign::Pos ? static_cast<int32_t>(shifted) : -static_cast<int32_t>(shifted));
  if (s > 32767) {
    s = 32767;
    flags.saturated = true;
  } else if (s < -32768) {
    s = -32768;
    flags.saturated = true;
  }
  return PartialOutput{static_cast<int16_t>(s)};
}

namespace {

LutTable build_table(double (*fn)(double)) {
  LutTable t;
  for (int idx = 0; idx < 256; ++idx) {
    // Bucket representative: midpoint of the 256 binary16 values sharing the
    // top 8 bits.
    Real16 rep = Real16::from_bits(static_cast<uint16_t>((idx << 8) | 0x80));
    double x = rep.to_double();
    double y = std::isnan(x) ? x : fn(x);
    t.values[static_cast<size_t>(idx)] = Real16::from_double_saturate(y).bits();
  }
  return t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

const LutTable& lut_table(const std::string& id) {
  static const LutTable sigmoid_table = build_table(&sigmoid);
  static const LutTable tanh_table = build_table(&std::tanh);
  if (id == "sigmoid") return sigmoid_table;
  if (id == "tanh") return tanh_table;
  fail(Err::UnknownTableId, "no LUT named '" + id + "'");
}

namespace {

Real16 apply_activation(Real16 v, const LayerDescriptor& layer) {
  switch (layer.act) {
    case ActKind::None:
      return v;
    case ActKind::ReLU:
      return v.sign() ? Real16::from_bits(0) : v;
    case ActKind::Lut:
      return lut_table(layer.lut_table).lookup(v);
  }
  return v;
}

}  // namespace

Tensor apply_activation_pool(const Tensor& values, const LayerDescriptor& layer) {
  if (values.kind != ElemKind::Real16 || values.count() != static_cast<uint64_t>(layer.out_elems()))
    fail(Err::DimsMismatch, "activation input does not match the layer output");

  const int oh = layer.out_h(), ow = layer.out_w();
  std::vector<uint16_t> activated(values.f16.size());
  for (size_t i = 0; i < activated.size(); ++i)
    activated[i] = apply_activation(Real16::from_bits(values.f16[i]), layer).bits();

  if (!layer.pool) {
    Tensor t = layer.kind == LayerKind::FC
                   ? Tensor::real16({static_cast<uint32_t>(layer.out_channels)})
                   : Tensor::real16({static_cast<uint32_t>(layer.out_channels),
                                     static_cast<uint32_t>(oh), static_cast<uint32_t>(ow)});
    t.f16 = std::move(activated);
    return t;
  }

  const int ps = layer.pool->size;
  const int ph = oh / ps, pw = ow / ps;
  Tensor t = Tensor::real16({static_cast<uint32_t>(layer.out_channels), static_cast<uint32_t>(ph),
                             static_cast<uint32_t>(pw)});
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        Real16 best;
        bool first = true;
        for (int dy = 0; dy < ps; ++dy) {
          for (int dx = 0; dx < ps; ++dx) {
            size_t idx = (static_cast<size_t>(oc) * oh + (y * ps + dy)) * ow + (x * ps + dx);
            Real16 v = Real16::from_bits(activated[idx]);
            if (first || v.to_double() > best.to_double()) best = v;
            first = false;
          }
        }
        t.f16[(static_cast<size_t>(oc) * ph + y) * pw + x] = best.bits();
      }
    }
  }
  return t;
}

Tensor sfu_apply(std::span<const int16_t> outs, const LayerDescriptor& layer, double s_w) {
  if (outs.size() != static_cast<size_t>(layer.out_elems()))
    fail(Err::DimsMismatch, "sfu_apply: partial-output length does not match the layer");

  Tensor pre = layer.kind == LayerKind::FC
                   ? Tensor::real16({static_cast<uint32_t>(layer.out_channels)})
                   : Tensor::real16({static_cast<uint32_t>(layer.out_channels),
                                     static_cast<uint32_t>(layer.out_h()),
                                     static_cast<uint32_t>(layer.out_w())});
  for (size_t i = 0; i < outs.size(); ++i) pre.f16[i] = dequantize_output(outs[i], s_w).bits();
  return apply_activation_pool(pre, layer);
}

}  // namespace qeihan
