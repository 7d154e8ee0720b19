// Workload model: layer descriptors, tensors on disk, network descriptors and
// the synthetic activation generator used to drive the simulated machines.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qeihan/real16.hpp"

namespace qeihan {

enum class LayerKind : uint8_t { FC, Conv };
enum class ActKind : uint8_t { None, ReLU, Lut };

struct Pooling {
  int size = 2;  // non-overlapping max pooling window
};

struct LayerDescriptor {
  std::string name;
  LayerKind kind = LayerKind::FC;
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 1, kernel_w = 1;
  int in_h = 1, in_w = 1;
  int stride = 1;
  int padding = 0;
  ActKind act = ActKind::None;
  std::string lut_table;  // valid when act == Lut
  std::optional<Pooling> pool;

  int out_h() const { return (in_h + 2 * padding - kernel_h) / stride + 1; }
  int out_w() const { return (in_w + 2 * padding - kernel_w) / stride + 1; }
  int final_h() const { return pool ? out_h() / pool->size : out_h(); }
  int final_w() const { return pool ? out_w() / pool->size : out_w(); }
  int64_t in_elems() const { return int64_t{in_channels} * in_h * in_w; }
  int64_t out_elems() const { return int64_t{out_channels} * out_h() * out_w(); }
  int64_t final_elems() const { return int64_t{out_channels} * final_h() * final_w(); }

  void validate() const;  // throws ShapeError
};

enum class ElemKind : uint8_t { Real16 = 0, Int8 = 1, Int16 = 2 };

struct Tensor {
  std::vector<uint32_t> dims;
  ElemKind kind = ElemKind::Real16;
  std::vector<uint16_t> f16;  // raw binary16 bit patterns
  std::vector<int8_t> i8;
  std::vector<int16_t> i16;

  static Tensor real16(std::vector<uint32_t> dims);
  static Tensor int8(std::vector<uint32_t> dims);
  static Tensor int16(std::vector<uint32_t> dims);

  uint64_t count() const {
    uint64_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
  Real16 at_f16(size_t i) const { return Real16::from_bits(f16[i]); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims == b.dims && a.kind == b.kind && a.f16 == b.f16 && a.i8 == b.i8 &&
           a.i16 == b.i16;
  }
};

struct LayerQuant {
  double scale = 1.0;
  int offset = 0;
};

struct NetworkDescriptor {
  std::string name;
  std::vector<LayerDescriptor> layers;
  std::map<std::string, std::string> weight_files;  // layer name -> path
  std::map<std::string, LayerQuant> quant;
};

// Loads and validates a JSON network descriptor. Weight paths are resolved
// relative to the descriptor file; with check_weight_files every referenced
// file must exist.
NetworkDescriptor load_network(const std::string& path, bool check_weight_files = true);

Tensor load_tensor(const std::string& path);
Tensor load_tensor(const std::string& path, const std::vector<uint32_t>& expected_dims);
void store_tensor(const Tensor& t, const std::string& path);

// Mass per LOG2 exponent bin plus an explicit zero (pruned) bin.
struct Distribution {
  std::array<double, 16> exp_mass{};  // index = exp + 8
  double zero_mass = 0.0;

  double total() const {
    double t = zero_mass;
    for (double m : exp_mass) t += m;
    return t;
  }
  static Distribution single(int exp) {
    Distribution d;
    d.exp_mass[static_cast<size_t>(exp + 8)] = 1.0;
    return d;
  }
};

Distribution load_distribution(const std::string& path);

// Deterministic quota sampler: allocates bin counts proportionally (largest
// remainder), draws each value uniformly from the real interval that rounds
// to its target exponent, and shuffles the stream. Bin counts after LOG2
// quantization match the requested proportions to within one count.
Tensor synth_activations(const Distribution& dist, uint64_t count, uint64_t seed);

}  // namespace qeihan
