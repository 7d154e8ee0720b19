// 3D-stacked DRAM model: stack geometry, the bit-plane weight layout and the
// standard whole-weight layout, closed-page timing with bank-level
// parallelism, and beat-exact access accounting.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qeihan/model.hpp"

namespace qeihan {

struct MemGeometry {
  int num_vaults = 16;
  int dies = 4;
  int banks_per_vault_per_die = 4;
  int bus_bits = 32;  // M: beat width of a vault's internal bus
  double bandwidth_bytes_per_sec = 10e9;
  int trc_cycles = 12;  // closed-page activate+read+precharge occupancy
  double logic_freq_hz = 300e6;
  int row_bits = 2048;
  int noc_words_per_cycle = 4;  // 16-bit words the mesh moves per cycle
  uint64_t bank_capacity_bits = uint64_t{1} << 27;  // 4 GB stack / 16 vaults / 16 banks

  int total_banks() const { return dies * banks_per_vault_per_die; }
  int beats_per_cycle() const {
    double per_cycle = bandwidth_bytes_per_sec / (logic_freq_hz * (bus_bits / 8.0));
    int b = static_cast<int>(per_cycle);
    return b < 1 ? 1 : b;
  }
  int row_beats() const { return row_bits / bus_bits; }

  void validate() const;  // throws BadConfig
};

// One closed-page access: tRC of occupancy on `bank` plus `beats` transfers on
// the shared vault bus. plane/group/addr describe the first beat; `kind`
// tells the tracer how to reconstruct the remaining beats.
struct Request {
  enum class Kind : uint8_t { Stream, BitPlaneWeights, StandardWeights };

  int bank = 0;
  uint32_t beats = 0;
  int16_t plane = -1;
  int64_t group = -1;
  uint64_t addr = 0;  // first in-bank word index
  Kind kind = Kind::Stream;
};

// Completion time of the last beat: requests start as soon as their bank is
// free (distinct banks overlap), and beats serialize on the vault bus at
// beats_per_cycle. Matches closed-page behavior under list order.
uint64_t schedule_beats(std::span<const Request> requests, const MemGeometry& g,
                        std::vector<uint64_t>* start_cycles = nullptr);

// Per-component event counts for one run. dram_beats_* are in units of one
// bus transfer of bus_bits.
struct AccessCounters {
  uint64_t dram_beats_weights = 0;
  uint64_t dram_beats_inputs = 0;
  uint64_t dram_beats_outputs = 0;
  uint64_t dram_row_activations = 0;
  uint64_t ib_reads = 0, ib_writes = 0;
  uint64_t ob_reads = 0, ob_writes = 0;
  uint64_t wb_reads = 0, wb_writes = 0;
  uint64_t noc_transfers = 0;  // 16-bit words
  uint64_t adds = 0;
  uint64_t macs = 0;
  uint64_t quants = 0;
  uint64_t shift_decodes = 0;
  uint64_t sfu_outputs = 0;

  uint64_t dram_beats() const { return dram_beats_weights + dram_beats_inputs + dram_beats_outputs; }

  AccessCounters& operator+=(const AccessCounters& o);
};

enum class LayoutKind : uint8_t { BitPlane, Standard };

// Fetched bits of one weight, right-aligned; nbits = 8 - |exp| for negative
// exponents, 8 otherwise.
struct WeightSlice {
  uint8_t bits = 0;
  uint8_t nbits = 0;
};

struct GroupRef {
  int channel = 0;  // global input channel
  int kh = 0, kw = 0;
  int oc_begin = 0;
  int oc_count = 0;  // real lanes; the beat is padded up to M weights
};

struct BankAddress {
  int die = 0;
  int bank = 0;  // within the die
  int row = 0;
  int col = 0;  // bit offset within the row
};

// Offline placement of a layer's weights in every vault. Weights are
// distributed channel-wise across vaults; within a vault they form groups of
// M weights per (channel, kernel position, output-channel block).
//
// BitPlane: bit b of group g lives in flat bank (b + g) mod total_banks; the
// in-bank order is plane-descending within each run of total_banks groups, so
// an MSB-first fetch of consecutive groups reads one contiguous burst per
// bank. Standard: whole 8-bit weights, group g contiguous in flat bank
// g mod total_banks.
class PlacedWeights {
 public:
  static PlacedWeights place(const Tensor& weights, LayoutKind kind, const MemGeometry& g);

  LayoutKind kind() const { return kind_; }
  int out_channels() const { return oc_; }
  int kernel_positions() const { return kh_ * kw_; }
  // Groups fetched per non-pruned input: kernel positions times oc blocks.
  uint64_t groups_per_input() const { return static_cast<uint64_t>(kh_) * kw_ * oc_blocks_; }
  uint64_t group_count(int vault) const;
  const GroupRef& group_ref(int vault, uint64_t group) const;

  // Beats one input fetch costs at a given exponent (0 when pruned upstream).
  uint64_t input_fetch_beats(int exp) const;

  struct Fetch {
    std::vector<WeightSlice> slices;
    uint32_t beats = 0;
    std::vector<int> banks;  // distinct banks touched
  };
  // Per-group query: MSB slices for exp < 0, whole weights otherwise.
  Fetch fetch_weight_group(int vault, uint64_t group, int exp, bool act_nonzero) const;

  // Coalesced closed-page requests for one input: all groups of the input's
  // channel at the given exponent. Appends to `out`; returns beats added.
  uint64_t input_fetch_requests(int vault, int local_channel, int exp,
                                std::vector<Request>& out) const;

  BankAddress locate(int vault, uint64_t group, int plane) const;

  // Reconstructs the (plane, group) of one beat inside a coalesced request.
  void describe_beat(const Request& r, uint32_t beat, int16_t& plane, int64_t& group) const;

  int vault_of_channel(int channel) const { return channel % vaults_; }
  int local_channels(int vault) const;
  int die_of_flat_bank(int fb) const { return fb / banks_per_die_; }
  int bank_in_die(int fb) const { return fb % banks_per_die_; }

 private:
  LayoutKind kind_ = LayoutKind::BitPlane;
  int vaults_ = 0, banks_ = 0, banks_per_die_ = 1, row_beats_ = 0, bus_bits_ = 0;
  int oc_ = 0, ic_ = 0, kh_ = 1, kw_ = 1;
  int oc_blocks_ = 0;
  // Per vault: group metadata in placement order and per-bank 32-bit words.
  std::vector<std::vector<GroupRef>> groups_;
  std::vector<std::vector<std::vector<uint32_t>>> bank_words_;

  uint32_t word_at(int vault, int bank, uint64_t addr) const;
  uint64_t bitplane_addr(uint64_t group, int plane) const;  // in-bank word index
};

// Beat-level trace sink (flag-gated); one line per beat.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void beat(uint64_t cycle, int vault, int die, int bank, int plane, int64_t group) = 0;
};

}  // namespace qeihan
