// The three simulated machines: QeiHaN (input-stationary dataflow over the
// bit-plane layout), NaHiD (input-stationary over the standard layout) and a
// Neurocube-like output-stationary baseline.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qeihan/analysis.hpp"
#include "qeihan/mem3d.hpp"
#include "qeihan/model.hpp"
#include "qeihan/pe.hpp"

namespace qeihan {

enum class MachineKind : uint8_t { QeiHaN, NaHiD, Neurocube };

const char* machine_name(MachineKind m);
MachineKind parse_machine(const std::string& name);  // case-insensitive

struct Partition {
  std::vector<std::vector<int>> vault_channels;  // input channels per vault
  int blocks_per_channel = 1;                    // N
  int in_block_values = 1;                       // values of one input block
  int out_block_values = 1;                      // partial-output values of one block
};

// Round-robin channel assignment plus the smallest block count N such that one
// input block and one output block fit the (half) IB/OB capacities.
Partition partition_layer(const LayerDescriptor& layer, const MemGeometry& g, const PEConfig& pe);

struct RunOptions {
  int workers = 0;          // 0: QEIHAN_WORKERS env or hardware concurrency
  double weight_scale = 1.0;
  TraceSink* trace = nullptr;
};

struct LayerRun {
  Tensor outputs;            // binary16, [OC] or [OC, h, w] after pooling
  AccessCounters counters;
  uint64_t cycles = 0;
  ExpHistogram hist;         // exponents seen by this layer (IS machines)
  bool saturated = false;
};

LayerRun run_layer(MachineKind machine, const LayerDescriptor& layer, const Tensor& inputs,
                   const Tensor& weights, const MemGeometry& g, const PEConfig& pe,
                   const RunOptions& opts = {});

struct BeatTotals {
  uint64_t weights = 0;
  uint64_t inputs = 0;
  uint64_t outputs = 0;
};

struct EnergyBreakdown {
  double dram = 0, buffers = 0, compute = 0, noc = 0, static_ = 0;
  double total = 0;
};

struct SimReport {
  std::string machine;
  std::string network;
  std::string workload;
  uint64_t cycles = 0;
  BeatTotals beats;
  AccessCounters counters;
  ExpHistogram hist;
  EnergyBreakdown energy;  // filled by metrics
  uint64_t outputs_hash = 0;
  bool saturated = false;
};

struct NetworkRun {
  SimReport report;
  Tensor outputs;
};

// Chains run_layer over the network; inter-layer activations pass through the
// producer vaults' DRAM and are counted as output writes.
NetworkRun run_network(MachineKind machine, const NetworkDescriptor& net, const Tensor& inputs,
                       const MemGeometry& g, const PEConfig& pe, const RunOptions& opts = {},
                       const std::string& workload = "");

uint64_t fnv1a64(const void* data, size_t len);

}  // namespace qeihan
