// Energy accounting over access counters and machine-to-machine comparisons.
#pragma once

#include <cstdint>
#include <string>

#include "qeihan/mem3d.hpp"
#include "qeihan/sched.hpp"

namespace qeihan {

// Per-event energies in joules and static power in watts. The shipped default
// configuration is illustrative (DRAM beat >> SRAM access >> add); absolute
// joules are inputs, only ratios and orderings are asserted anywhere.
struct EnergyConfig {
  double dram_per_beat = 10e-12;
  double dram_per_row_activation = 0.5e-12;
  double sram_ib = 0.2e-12;
  double sram_ob = 0.5e-12;
  double sram_wb = 0.2e-12;
  double add = 0.1e-12;
  double mac = 0.8e-12;
  double quant = 0.05e-12;
  double shift_decode = 0.05e-12;
  double noc_per_transfer = 2e-12;
  double sfu_per_output = 1e-12;
  double pe_static = 0.05;    // watts, all PEs
  double dram_static = 0.15;  // watts

  void validate() const;  // throws BadConfig on negative entries
};

// JSON map of the field names above; unknown keys rejected.
EnergyConfig load_energy_config(const std::string& path);

EnergyBreakdown energy(const AccessCounters& c, uint64_t cycles, const EnergyConfig& cfg,
                       double freq_hz);

struct Comparison {
  double speedup = 1.0;               // cycles(b) / cycles(a)
  double energy_ratio = 1.0;          // energy(b) / energy(a)
  double access_ratio = 1.0;          // total beats(a) / beats(b)
  double access_ratio_weights = 1.0;  // weight beats(a) / weight beats(b)
};

// Requires both reports to come from the same network and workload.
Comparison compare(const SimReport& a, const SimReport& b);

}  // namespace qeihan
