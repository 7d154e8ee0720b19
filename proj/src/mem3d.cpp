#include "qeihan/mem3d.hpp"

#include <algorithm>

#include "qeihan/errors.hpp"

namespace qeihan {

void MemGeometry::validate() const {
  if (num_vaults <= 0 || dies <= 0 || banks_per_vault_per_die <= 0 || bus_bits <= 0 ||
      trc_cycles <= 0 || row_bits <= 0 || noc_words_per_cycle <= 0)
    fail(Err::BadConfig, "geometry fields must be positive");
  if (!(bandwidth_bytes_per_sec > 0) || !(logic_freq_hz > 0))
    fail(Err::BadConfig, "bandwidth and frequency must be positive");
  if (row_bits % bus_bits != 0) fail(Err::BadConfig, "row_bits must be a multiple of bus_bits");
}

AccessCounters& AccessCounters::operator+=(const AccessCounters& o) {
  dram_beats_weights += o.dram_beats_weights;
  dram_beats_inputs += o.dram_beats_inputs;
  dram_beats_outputs += o.dram_beats_outputs;
  dram_row_activations += o.dram_row_activations;
  ib_reads += o.ib_reads;
  ib_writes += o.ib_writes;
  ob_reads += o.ob_reads;
  ob_writes += o.ob_writes;
  wb_reads += o.wb_reads;
  wb_writes += o.wb_writes;
  noc_transfers += o.noc_transfers;
  adds += o.adds;
  macs += o.macs;
  quants += o.quants;
  shift_decodes += o.shift_decodes;
  sfu_outputs += o.sfu_outputs;
  return *this;
}

uint64_t schedule_beats(std::span<const Request> requests, const MemGeometry& g,
                        std::vector<uint64_t>* start_cycles) {
  const uint64_t trc = static_cast<uint64_t>(g.trc_cycles);
  const uint64_t bpc = static_cast<uint64_t>(g.beats_per_cycle());
  std::vector<uint64_t> bank_free(static_cast<size_t>(g.total_banks()), 0);
  uint64_t bus_beats = 0;  // bus occupancy cursor, in beat units
  uint64_t makespan = 0;
  if (start_cycles) start_cycles->clear();

  for (const Request& r : requests) {
    size_t b = static_cast<size_t>(r.bank);
    uint64_t start = bank_free.at(b);
    bank_free[b] = start + trc;
    bus_beats = std::max(bus_beats, start * bpc) + r.beats;
    uint64_t bus_done = (bus_beats + bpc - 1) / bpc;
    makespan = std::max(makespan, std::max(start + trc, bus_done));
    if (start_cycles) start_cycles->push_back(start);
  }
  return makespan;
}

// ---------------------------------------------------------------------------
// Weight placement.

namespace {

int weight_index(int oc, int c, int kh, int kw, int ic, int kh_n, int kw_n) {
  return ((oc * ic + c) * kh_n + kh) * kw_n + kw;
}

}  // namespace

PlacedWeights PlacedWeights::place(const Tensor& weights, LayoutKind kind, const MemGeometry& g) {
  g.validate();
  if (weights.kind != ElemKind::Int8) fail(Err::DimsMismatch, "weights must be Int8");
  if (weights.dims.size() != 2 && weights.dims.size() != 4)
    fail(Err::DimsMismatch, "weights must be [OC,IC] or [OC,IC,KH,KW]");
  if (kind == LayoutKind::BitPlane && g.total_banks() < 8)
    fail(Err::BadConfig, "bit-plane layout needs at least 8 banks per vault");

  PlacedWeights pw;
  pw.kind_ = kind;
  pw.vaults_ = g.num_vaults;
  pw.banks_ = g.total_banks();
  pw.banks_per_die_ = g.banks_per_vault_per_die;
  pw.row_beats_ = g.row_beats();
  pw.bus_bits_ = g.bus_bits;
  pw.oc_ = static_cast<int>(weights.dims[0]);
  pw.ic_ = static_cast<int>(weights.dims[1]);
  pw.kh_ = weights.dims.size() == 4 ? static_cast<int>(weights.dims[2]) : 1;
  pw.kw_ = weights.dims.size() == 4 ? static_cast<int>(weights.dims[3]) : 1;
  pw.oc_blocks_ = (pw.oc_ + g.bus_bits - 1) / g.bus_bits;

  pw.groups_.resize(static_cast<size_t>(pw.vaults_));
  pw.bank_words_.resize(static_cast<size_t>(pw.vaults_));

  const int M = g.bus_bits;
  const int NB = pw.banks_;
  for (int v = 0; v < pw.vaults_; ++v) {
    auto& groups = pw.groups_[static_cast<size_t>(v)];
    for (int c = v; c < pw.ic_; c += pw.vaults_) {
      for (int kh = 0; kh < pw.kh_; ++kh) {
        for (int kw = 0; kw < pw.kw_; ++kw) {
          for (int ob = 0; ob < pw.oc_blocks_; ++ob) {
            GroupRef ref;
            ref.channel = c;
            ref.kh = kh;
            ref.kw = kw;
            ref.oc_begin = ob * M;
            ref.oc_count = std::min(M, pw.oc_ - ref.oc_begin);
            groups.push_back(ref);
          }
        }
      }
    }

    uint64_t periods = (groups.size() + static_cast<size_t>(NB) - 1) / static_cast<size_t>(NB);
    uint64_t words_per_bank = periods * 8;
    if (words_per_bank * static_cast<uint64_t>(M) > g.bank_capacity_bits)
      fail(Err::CapacityExceeded, "weights do not fit the per-bank capacity");
    auto& banks = pw.bank_words_[static_cast<size_t>(v)];
    banks.assign(static_cast<size_t>(NB), std::vector<uint32_t>(words_per_bank, 0));

    for (uint64_t gidx = 0; gidx < groups.size(); ++gidx) {
      const GroupRef& ref = groups[gidx];
      auto weight_at = [&](int lane) -> uint8_t {
        if (lane >= ref.oc_count) return 0;  // padded lane
        int8_t w = weights.i8[static_cast<size_t>(weight_index(
            ref.oc_begin + lane, ref.channel, ref.kh, ref.kw, pw.ic_, pw.kh_, pw.kw_))];
        return static_cast<uint8_t>(w);
      };
      if (kind == LayoutKind::BitPlane) {
        for (int b = 0; b < 8; ++b) {
          uint32_t word = 0;
          for (int lane = 0; lane < M; ++lane)
            word |= static_cast<uint32_t>((weight_at(lane) >> b) & 1) << lane;
          int fb = static_cast<int>((gidx + static_cast<uint64_t>(b)) % static_cast<uint64_t>(NB));
          banks[static_cast<size_t>(fb)][pw.bitplane_addr(gidx, b)] = word;
        }
      } else {
        int fb = static_cast<int>(gidx % static_cast<uint64_t>(NB));
        uint64_t base = (gidx / static_cast<uint64_t>(NB)) * 8;
        for (int i = 0; i < 8; ++i) {
          uint32_t word = 0;
          for (int p = 0; p < 4; ++p)
            word |= static_cast<uint32_t>(weight_at(4 * i + p)) << (8 * p);
          banks[static_cast<size_t>(fb)][base + static_cast<uint64_t>(i)] = word;
        }
      }
    }
  }
  return pw;
}

uint64_t PlacedWeights::bitplane_addr(uint64_t group, int plane) const {
  // Plane-descending within each run of total_banks groups: an MSB-first
  // fetch of consecutive groups is one contiguous burst per bank.
  return (group / static_cast<uint64_t>(banks_)) * 8 + static_cast<uint64_t>(7 - plane);
}

uint64_t PlacedWeights::group_count(int vault) const {
  if (vault < 0 || vault >= vaults_) fail(Err::UnknownGroup, "vault out of range");
  return groups_[static_cast<size_t>(vault)].size();
}

const GroupRef& PlacedWeights::group_ref(int vault, uint64_t group) const {
  if (vault < 0 || vault >= vaults_ || group >= groups_[static_cast<size_t>(vault)].size())
    fail(Err::UnknownGroup, "no such weight group");
  return groups_[static_cast<size_t>(vault)][group];
}

int PlacedWeights::local_channels(int vault) const {
  if (ic_ <= vault) return 0;
  return (ic_ - vault - 1) / vaults_ + 1;
}

uint64_t PlacedWeights::input_fetch_beats(int exp) const {
  int k = exp < 0 ? -exp : 0;
  uint64_t planes = kind_ == LayoutKind::BitPlane ? static_cast<uint64_t>(8 - k) : 8;
  return groups_per_input() * planes;
}

uint32_t PlacedWeights::word_at(int vault, int bank, uint64_t addr) const {
  return bank_words_[static_cast<size_t>(vault)][static_cast<size_t>(bank)][addr];
}

PlacedWeights::Fetch PlacedWeights::fetch_weight_group(int vault, uint64_t group, int exp,
                                                       bool act_nonzero) const {
  const GroupRef& ref = group_ref(vault, group);
  Fetch out;
  if (!act_nonzero) return out;  // pruned activations skip the fetch entirely

  int k = (kind_ == LayoutKind::BitPlane && exp < 0) ? -exp : 0;
  if (k > 7) fail(Err::UnknownGroup, "exponent outside the fetchable range");

  if (kind_ == LayoutKind::BitPlane) {
    out.beats = static_cast<uint32_t>(8 - k);
    std::vector<uint32_t> plane_words(8, 0);
    for (int b = 7; b >= k; --b) {
      int fb = static_cast<int>((group + static_cast<uint64_t>(b)) % static_cast<uint64_t>(banks_));
      out.banks.push_back(fb);
      plane_words[static_cast<size_t>(b)] = word_at(vault, fb, bitplane_addr(group, b));
    }
    out.slices.resize(static_cast<size_t>(ref.oc_count));
    for (int lane = 0; lane < ref.oc_count; ++lane) {
      uint8_t bits = 0;
      for (int b = k; b < 8; ++b)
        bits |= static_cast<uint8_t>(((plane_words[static_cast<size_t>(b)] >> lane) & 1) << (b - k));
      out.slices[static_cast<size_t>(lane)] = WeightSlice{bits, static_cast<uint8_t>(8 - k)};
    }
  } else {
    out.beats = 8;
    int fb = static_cast<int>(group % static_cast<uint64_t>(banks_));
    out.banks.push_back(fb);
    uint64_t base = (group / static_cast<uint64_t>(banks_)) * 8;
    out.slices.resize(static_cast<size_t>(ref.oc_count));
    for (int lane = 0; lane < ref.oc_count; ++lane) {
      uint32_t word = word_at(vault, fb, base + static_cast<uint64_t>(lane / 4));
      out.slices[static_cast<size_t>(lane)] =
          WeightSlice{static_cast<uint8_t>(word >> (8 * (lane % 4))), 8};
    }
  }
  return out;
}

uint64_t PlacedWeights::input_fetch_requests(int vault, int local_channel, int exp,
                                             std::vector<Request>& out) const {
  const uint64_t L = groups_per_input();
  const uint64_t g0 = static_cast<uint64_t>(local_channel) * L;
  if (g0 + L > group_count(vault)) fail(Err::UnknownGroup, "channel has no groups in this vault");

  struct Mark {
    int bank;
    uint64_t addr;
    int16_t plane;
    int64_t group;
  };
  std::vector<Mark> marks;
  const int NB = banks_;
  if (kind_ == LayoutKind::BitPlane) {
    int k = exp < 0 ? -exp : 0;
    marks.reserve(L * static_cast<uint64_t>(8 - k));
    for (uint64_t gi = g0; gi < g0 + L; ++gi) {
      for (int b = k; b < 8; ++b) {
        int fb = static_cast<int>((gi + static_cast<uint64_t>(b)) % static_cast<uint64_t>(NB));
        marks.push_back({fb, bitplane_addr(gi, b), static_cast<int16_t>(b),
                         static_cast<int64_t>(gi)});
      }
    }
  } else {
    marks.reserve(L * 8);
    for (uint64_t gi = g0; gi < g0 + L; ++gi) {
      int fb = static_cast<int>(gi % static_cast<uint64_t>(NB));
      uint64_t base = (gi / static_cast<uint64_t>(NB)) * 8;
      for (int i = 0; i < 8; ++i)
        marks.push_back({fb, base + static_cast<uint64_t>(i), -1, static_cast<int64_t>(gi)});
    }
  }

  std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) {
    return a.bank != b.bank ? a.bank < b.bank : a.addr < b.addr;
  });

  // Coalesce contiguous words in the same bank into one closed-page request;
  // a request never crosses a row.
  const uint64_t row_words = static_cast<uint64_t>(row_beats_);
  uint64_t beats = 0;
  for (size_t i = 0; i < marks.size();) {
    size_t j = i + 1;
    while (j < marks.size() && marks[j].bank == marks[i].bank &&
           marks[j].addr == marks[j - 1].addr + 1 && marks[j].addr / row_words == marks[i].addr / row_words)
      ++j;
    Request r;
    r.bank = marks[i].bank;
    r.beats = static_cast<uint32_t>(j - i);
    r.plane = marks[i].plane;
    r.group = marks[i].group;
    r.addr = marks[i].addr;
    r.kind = kind_ == LayoutKind::BitPlane ? Request::Kind::BitPlaneWeights
                                           : Request::Kind::StandardWeights;
    out.push_back(r);
    beats += r.beats;
    i = j;
  }
  return beats;
}

void PlacedWeights::describe_beat(const Request& r, uint32_t beat, int16_t& plane,
                                  int64_t& group) const {
  uint64_t addr = r.addr + beat;
  if (r.kind == Request::Kind::BitPlaneWeights) {
    uint64_t period = addr / 8;
    int b = 7 - static_cast<int>(addr % 8);
    plane = static_cast<int16_t>(b);
    int64_t residue = (static_cast<int64_t>(r.bank) - b) % banks_;
    if (residue < 0) residue += banks_;
    group = static_cast<int64_t>(period) * banks_ + residue;
  } else if (r.kind == Request::Kind::StandardWeights) {
    plane = -1;
    group = static_cast<int64_t>(addr / 8) * banks_ + r.bank;
  } else {
    plane = -1;
    group = -1;
  }
}

BankAddress PlacedWeights::locate(int vault, uint64_t group, int plane) const {
  group_ref(vault, group);  // bounds check
  uint64_t addr;
  int fb;
  if (kind_ == LayoutKind::BitPlane) {
    if (plane < 0 || plane > 7) fail(Err::UnknownGroup, "plane out of range");
    fb = static_cast<int>((group + static_cast<uint64_t>(plane)) % static_cast<uint64_t>(banks_));
    addr = bitplane_addr(group, plane);
  } else {
    fb = static_cast<int>(group % static_cast<uint64_t>(banks_));
    addr = (group / static_cast<uint64_t>(banks_)) * 8;
  }
  BankAddress a;
  a.die = fb / banks_per_die_;
  a.bank = fb % banks_per_die_;
  uint64_t row_words = static_cast<uint64_t>(row_beats_);
  a.row = static_cast<int>(addr / row_words);
  a.col = static_cast<int>((addr % row_words) * static_cast<uint64_t>(bus_bits_));
  return a;
}

}  // namespace qeihan
