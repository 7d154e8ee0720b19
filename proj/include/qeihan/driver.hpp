// Run specification and the analyze/simulate/sweep commands behind the CLI.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qeihan/metrics.hpp"
#include "qeihan/sched.hpp"

namespace qeihan {

struct RunSpec {
  std::string network_path;
  std::vector<MachineKind> machines;
  std::optional<std::string> geometry_path;
  std::optional<std::string> pe_path;
  std::optional<std::string> energy_path;
  std::optional<std::string> acts_tensor;  // exactly one activation source
  std::optional<std::string> acts_dist;
  uint64_t count = 0;  // 0: derived from the network's first layer
  uint64_t seed = 1;
  std::string out_dir = ".";
  bool trace = false;
};

MemGeometry load_geometry(const std::optional<std::string>& path);
PEConfig load_pe_config(const std::optional<std::string>& path);

// Quantizes the activation source and writes histogram.csv / savings.csv.
std::vector<std::string> cmd_analyze(const RunSpec& spec);

// Runs every requested machine on the workload and writes report_<machine>.json
// plus comparison.csv (and trace_<machine>.csv when tracing).
std::vector<std::string> cmd_simulate(const RunSpec& spec);

// Single-bin exponent sweep from 0 down to -7; writes sweep.csv with savings
// and the QeiHaN-over-NaHiD speedup per center.
std::vector<std::string> cmd_sweep(const RunSpec& spec);

// Writes synthetic INT8 weight tensors for every file referenced by the
// network descriptor (paths resolved relative to the descriptor).
std::vector<std::string> cmd_gen_weights(const std::string& network_path, uint64_t seed);

std::string report_to_json_string(const SimReport& r);

// Temp-file + rename so readers never observe partial output.
void write_file_atomic(const std::string& path, const std::string& contents);

bool log_enabled();
void log_line(const std::string& msg);

}  // namespace qeihan
