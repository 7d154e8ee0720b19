// Exponent histograms over quantized activation streams and the estimated
// memory-savings metric derived from them.
#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "qeihan/quant.hpp"

namespace qeihan {

struct ExpHistogram {
  static constexpr int kMinExp = -8;
  static constexpr int kMaxExp = 7;

  std::array<uint64_t, 16> exp_counts{};  // index = exp - kMinExp
  uint64_t zero_count = 0;

  void add(const QuantActivation& a) {
    if (a.is_zero) {
      ++zero_count;
    } else {
      ++exp_counts[static_cast<size_t>(a.exp - kMinExp)];
    }
  }

  uint64_t at(int exp) const { return exp_counts[static_cast<size_t>(exp - kMinExp)]; }
  uint64_t nonzero_total() const {
    uint64_t t = 0;
    for (uint64_t c : exp_counts) t += c;
    return t;
  }
  uint64_t total() const { return nonzero_total() + zero_count; }

  ExpHistogram& operator+=(const ExpHistogram& o) {
    for (size_t i = 0; i < exp_counts.size(); ++i) exp_counts[i] += o.exp_counts[i];
    zero_count += o.zero_count;
    return *this;
  }
};

ExpHistogram histogram(std::span<const QuantActivation> acts);

// Fraction of non-pruned activations with a negative exponent.
double negative_fraction(const ExpHistogram& h);

// Exact rational form of the savings metric: skipped weight bits over the
// full-width bit budget of the non-pruned activations.
struct SavingsRatio {
  uint64_t skipped_bits = 0;
  uint64_t full_bits = 0;

  double value() const { return full_bits == 0 ? 0.0 : static_cast<double>(skipped_bits) / static_cast<double>(full_bits); }
};

SavingsRatio savings_ratio(const ExpHistogram& h, int weight_bits = 8);

// Fraction of weight bits never fetched relative to a full-width fetch,
// normalized over non-pruned activations.
double estimated_memory_savings(const ExpHistogram& h, int weight_bits = 8);

}  // namespace qeihan
