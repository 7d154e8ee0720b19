#include "qeihan/analysis.hpp"

#include "qeihan/errors.hpp"

namespace qeihan {

ExpHistogram histogram(std::span<const QuantActivation> acts) {
  ExpHistogram h;
  for (const auto& a : acts) h.add(a);
  return h;
}

double negative_fraction(const ExpHistogram& h) {
  uint64_t nonzero = h.nonzero_total();
  if (nonzero == 0) fail(Err::EmptyHistogram, "no non-pruned activations");
  uint64_t neg = 0;
  for (int e = ExpHistogram::kMinExp; e < 0; ++e) neg += h.at(e);
  return static_cast<double>(neg) / static_cast<double>(nonzero);
}

SavingsRatio savings_ratio(const ExpHistogram& h, int weight_bits) {
  uint64_t nonzero = h.nonzero_total();
  if (nonzero == 0) fail(Err::EmptyHistogram, "no non-pruned activations");
  SavingsRatio r;
  // exp = min is pruned upstream, so |exp| <= weight_bits - 1 here.
  for (int e = ExpHistogram::kMinExp; e < 0; ++e)
    r.skipped_bits += h.at(e) * static_cast<uint64_t>(-e);
  r.full_bits = static_cast<uint64_t>(weight_bits) * nonzero;
  return r;
}

double estimated_memory_savings(const ExpHistogram& h, int weight_bits) {
  return savings_ratio(h, weight_bits).value();
}

}  // namespace qeihan
