#include "qeihan/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qeihan/errors.hpp"
#include "qeihan/quant.hpp"

namespace qeihan {

namespace fs = std::filesystem;
using nlohmann::json;

void LayerDescriptor::validate() const {
  auto positive = [&](int v, const char* what) {
    if (v <= 0) fail(Err::ShapeError, name + ": " + what + std::string(" must be positive"));
  };
  positive(in_channels, "in_channels");
  positive(out_channels, "out_channels");
  positive(kernel_h, "kernel_h");
  positive(kernel_w, "kernel_w");
  positive(in_h, "in_h");
  positive(in_w, "in_w");
  positive(stride, "stride");
  if (padding < 0) fail(Err::ShapeError, name + ": padding must be non-negative");

  if (kind == LayerKind::FC) {
    if (kernel_h != 1 || kernel_w != 1 || in_h != 1 || in_w != 1 || stride != 1 || padding != 0)
      fail(Err::ShapeError, name + ": FC layers require 1x1 kernel and input, stride 1, padding 0");
  }
  int span_h = in_h + 2 * padding - kernel_h;
  int span_w = in_w + 2 * padding - kernel_w;
  if (span_h < 0 || span_w < 0 || span_h % stride != 0 || span_w % stride != 0)
    fail(Err::ShapeError, name + ": output spatial dims are not positive integers");
  if (pool) {
    if (pool->size <= 0) fail(Err::ShapeError, name + ": pool size must be positive");
    if (out_h() % pool->size != 0 || out_w() % pool->size != 0)
      fail(Err::ShapeError, name + ": pool size does not divide the output dims");
  }
  if (act == ActKind::Lut && lut_table.empty())
    fail(Err::ShapeError, name + ": LUT activation needs a table id");
}

Tensor Tensor::real16(std::vector<uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.kind = ElemKind::Real16;
  t.f16.resize(t.count());
  return t;
}

Tensor Tensor::int8(std::vector<uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.kind = ElemKind::Int8;
  t.i8.resize(t.count());
  return t;
}

Tensor Tensor::int16(std::vector<uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.kind = ElemKind::Int16;
  t.i16.resize(t.count());
  return t;
}

// ---------------------------------------------------------------------------
// Tensor files: "QHT1", u8 elem_kind, u8 ndims, u32 dims[ndims], payload (LE).

namespace {

constexpr char kMagic[4] = {'Q', 'H', 'T', '1'};

template <typename T>
void put_le(std::string& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

void store_tensor(const Tensor& t, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(t.kind));
  out.push_back(static_cast<char>(t.dims.size()));
  for (uint32_t d : t.dims) put_le(out, d);
  switch (t.kind) {
    case ElemKind::Real16:
      for (uint16_t v : t.f16) put_le(out, v);
      break;
    case ElemKind::Int8:
      for (int8_t v : t.i8) out.push_back(static_cast<char>(v));
      break;
    case ElemKind::Int16:
      for (int16_t v : t.i16) put_le(out, static_cast<uint16_t>(v));
      break;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(Err::IoError, "cannot open for write: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(Err::IoError, "write failed: " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open: " + path);
  std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  if (raw.size() < 6 || std::memcmp(p, kMagic, 4) != 0)
    fail(Err::ParseError, "bad tensor magic: " + path);
  uint8_t kind_byte = p[4];
  if (kind_byte > 2) fail(Err::ParseError, "bad elem kind: " + path);
  uint8_t ndims = p[5];
  size_t off = 6;
  if (raw.size() < off + 4ull * ndims) fail(Err::ParseError, "truncated dims: " + path);
  Tensor t;
  t.kind = static_cast<ElemKind>(kind_byte);
  uint64_t n = 1;
  for (int i = 0; i < ndims; ++i) {
    uint32_t d = get_u32_le(p + off);
    off += 4;
    if (d == 0) fail(Err::ParseError, "zero dim: " + path);
    t.dims.push_back(d);
    n *= d;
  }
  size_t elem_size = t.kind == ElemKind::Int8 ? 1 : 2;
  if (raw.size() != off + n * elem_size)
    fail(Err::ParseError, "payload length does not match dims: " + path);
  switch (t.kind) {
    case ElemKind::Real16:
      t.f16.resize(n);
      for (uint64_t i = 0; i < n; ++i) {
        uint16_t v = static_cast<uint16_t>(p[off + 2 * i]) |
                     (static_cast<uint16_t>(p[off + 2 * i + 1]) << 8);
        if (!Real16::from_bits(v).is_finite())
          fail(Err::NonFiniteValue, "NaN/Inf binary16 payload: " + path);
        t.f16[i] = v;
      }
      break;
    case ElemKind::Int8:
      t.i8.resize(n);
      std::memcpy(t.i8.data(), p + off, n);
      break;
    case ElemKind::Int16:
      t.i16.resize(n);
      for (uint64_t i = 0; i < n; ++i) {
        uint16_t v = static_cast<uint16_t>(p[off + 2 * i]) |
                     (static_cast<uint16_t>(p[off + 2 * i + 1]) << 8);
        t.i16[i] = static_cast<int16_t>(v);
      }
      break;
  }
  return t;
}

Tensor load_tensor(const std::string& path, const std::vector<uint32_t>& expected_dims) {
  Tensor t = load_tensor(path);
  if (t.dims != expected_dims) {
    std::ostringstream msg;
    msg << path << ": got [";
    for (size_t i = 0; i < t.dims.size(); ++i) msg << (i ? "," : "") << t.dims[i];
    msg << "], expected [";
    for (size_t i = 0; i < expected_dims.size(); ++i) msg << (i ? "," : "") << expected_dims[i];
    msg << "]";
    fail(Err::DimsMismatch, msg.str());
  }
  return t;
}

// ---------------------------------------------------------------------------
// Network descriptor JSON.

namespace {

json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Err::IoError, "cannot open: " + path);
  json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail(Err::ParseError, "malformed JSON: " + path);
  return j;
}

LayerDescriptor layer_from_json(const json& j) {
  LayerDescriptor l;
  try {
    l.name = j.at("name").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "FC")
      l.kind = LayerKind::FC;
    else if (kind == "CONV")
      l.kind = LayerKind::Conv;
    else
      fail(Err::ParseError, "unknown layer kind: " + kind);
    l.in_channels = j.at("in_channels").get<int>();
    l.out_channels = j.at("out_channels").get<int>();
    l.kernel_h = j.value("kernel_h", 1);
    l.kernel_w = j.value("kernel_w", 1);
    l.in_h = j.value("in_h", 1);
    l.in_w = j.value("in_w", 1);
    l.stride = j.value("stride", 1);
    l.padding = j.value("padding", 0);
    std::string act = j.value("activation_fn", "none");
    if (act == "none") {
      l.act = ActKind::None;
    } else if (act == "relu") {
      l.act = ActKind::ReLU;
    } else if (act.rfind("lut:", 0) == 0) {
      l.act = ActKind::Lut;
      l.lut_table = act.substr(4);
    } else {
      fail(Err::ParseError, l.name + ": unknown activation_fn: " + act);
    }
    if (j.contains("pool")) {
      const json& p = j.at("pool");
      if (p.value("kind", "max") != "max") fail(Err::ParseError, l.name + ": unknown pool kind");
      l.pool = Pooling{p.at("size").get<int>()};
    }
  } catch (const json::exception& e) {
    fail(Err::ParseError, std::string("layer object: ") + e.what());
  }
  l.validate();
  return l;
}

// Consecutive shapes are compatible when channels and spatial dims chain, or
// when a 1x1 FC consumes the flattened output of the previous layer.
void check_chain(const LayerDescriptor& prev, const LayerDescriptor& next) {
  int64_t prev_elems = prev.final_elems();
  bool direct = next.in_channels == prev.out_channels && next.in_h == prev.final_h() &&
                next.in_w == prev.final_w();
  bool flattened = next.kind == LayerKind::FC && int64_t{next.in_channels} == prev_elems;
  if (!direct && !flattened)
    fail(Err::ShapeError, "layers " + prev.name + " -> " + next.name + " have incompatible shapes");
}

}  // namespace

NetworkDescriptor load_network(const std::string& path, bool check_weight_files) {
  json j = parse_json_file(path);
  if (!j.is_object() || !j.contains("layers") || !j.at("layers").is_array())
    fail(Err::ParseError, path + ": expected an object with a 'layers' array");

  NetworkDescriptor net;
  net.name = j.value("name", fs::path(path).stem().string());
  for (const json& lj : j.at("layers")) net.layers.push_back(layer_from_json(lj));
  if (net.layers.empty()) fail(Err::ParseError, path + ": no layers");
  for (size_t i = 0; i + 1 < net.layers.size(); ++i) check_chain(net.layers[i], net.layers[i + 1]);

  fs::path base = fs::path(path).parent_path();
  if (j.contains("weights")) {
    for (const auto& [layer_name, file] : j.at("weights").items()) {
      if (!file.is_string()) fail(Err::ParseError, path + ": weight paths must be strings");
      net.weight_files[layer_name] = (base / file.get<std::string>()).string();
    }
  }
  if (j.contains("quant")) {
    for (const auto& [layer_name, q] : j.at("quant").items()) {
      LayerQuant lq;
      lq.scale = q.value("scale", 1.0);
      lq.offset = q.value("offset", 0);
      if (!(lq.scale > 0.0)) fail(Err::ParseError, path + ": quant scale must be positive");
      net.quant[layer_name] = lq;
    }
  }

  for (const auto& [layer_name, file] : net.weight_files) {
    bool known = std::any_of(net.layers.begin(), net.layers.end(),
                             [&](const LayerDescriptor& l) { return l.name == layer_name; });
    if (!known) fail(Err::ParseError, path + ": weights entry for unknown layer " + layer_name);
    if (check_weight_files && !fs::exists(file))
      fail(Err::MissingTensor, "weight file for " + layer_name + " not found: " + file);
  }
  return net;
}

// ---------------------------------------------------------------------------
// Distributions and the synthetic activation generator.

Distribution load_distribution(const std::string& path) {
  json j = parse_json_file(path);
  if (!j.is_object()) fail(Err::ParseError, path + ": expected an object");
  Distribution d;
  for (const auto& [key, val] : j.items()) {
    if (!val.is_number()) fail(Err::ParseError, path + ": masses must be numbers");
    double mass = val.get<double>();
    if (mass < 0) fail(Err::ParseError, path + ": masses must be non-negative");
    if (key == "zero") {
      d.zero_mass = mass;
      continue;
    }
    int exp = 0;
    try {
      size_t used = 0;
      exp = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      fail(Err::ParseError, path + ": bad exponent key '" + key + "'");
    }
    if (exp < -8 || exp > 7) fail(Err::ParseError, path + ": exponent out of range: " + key);
    d.exp_mass[static_cast<size_t>(exp + 8)] = mass;
  }
  return d;
}

namespace {

// Uniform draw from the interval of reals that rounds to exponent e, nudged
// at the binary16 level until the quantizer agrees (conversion can land a
// boundary draw one ulp outside the bin).
uint16_t draw_for_exponent(int e, std::mt19937_64& rng) {
  double lo = std::exp2(e - 0.5);
  double hi = std::exp2(e + 0.5);
  std::uniform_real_distribution<double> dist(lo, hi);
  bool neg = (rng() & 1) != 0;
  Real16 h = Real16::from_double(dist(rng));
  // An exponent of -8 is the pruned bin: any draw from its interval clips to
  // the minimum and quantizes to zero.
  auto on_target = [&](const QuantActivation& q) {
    return e == -8 ? q.is_zero : (!q.is_zero && q.exp == e);
  };
  for (int guard = 0; guard < 64; ++guard) {
    QuantActivation q = log2_quantize_ref(h.to_double());
    if (on_target(q)) break;
    bool low = e != -8 && (q.is_zero || q.exp < e);
    h = Real16::from_bits(static_cast<uint16_t>(h.bits() + (low ? 1 : -1)));
  }
  return static_cast<uint16_t>(h.bits() | (neg ? 0x8000 : 0));
}

}  // namespace

Tensor synth_activations(const Distribution& dist, uint64_t count, uint64_t seed) {
  double total = dist.total();
  if (!(total > 0)) fail(Err::EmptyDistribution, "distribution has no mass");

  // Largest-remainder quota allocation, zero bin first then exponents
  // -8..7, so acceptance checks are exact rather than statistical.
  struct Bin {
    int exp;  // -9 encodes the zero bin
    double share;
    uint64_t n;
    double frac;
  };
  std::vector<Bin> bins;
  bins.push_back({-9, dist.zero_mass / total, 0, 0});
  for (int e = -8; e <= 7; ++e)
    bins.push_back({e, dist.exp_mass[static_cast<size_t>(e + 8)] / total, 0, 0});

  uint64_t assigned = 0;
  for (auto& b : bins) {
    double exact = b.share * static_cast<double>(count);
    b.n = static_cast<uint64_t>(exact);
    b.frac = exact - static_cast<double>(b.n);
    assigned += b.n;
  }
  std::vector<size_t> order(bins.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return bins[a].frac > bins[b].frac; });
  for (size_t i = 0; assigned < count; ++i, ++assigned) ++bins[order[i % order.size()]].n;

  std::mt19937_64 rng(seed);
  std::vector<uint16_t> values;
  values.reserve(count);
  for (const auto& b : bins) {
    for (uint64_t i = 0; i < b.n; ++i)
      values.push_back(b.exp == -9 ? uint16_t{0} : draw_for_exponent(b.exp, rng));
  }
  std::shuffle(values.begin(), values.end(), rng);

  Tensor t = Tensor::real16({static_cast<uint32_t>(count)});
  t.f16 = std::move(values);
  return t;
}

}  // namespace qeihan
