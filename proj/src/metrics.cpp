#include "qeihan/metrics.hpp"

#include <fstream>

#include <json.hpp>

#include "qeihan/errors.hpp"

namespace qeihan {

using nlohmann::json;

void EnergyConfig::validate() const {
  const double fields[] = {dram_per_beat, dram_per_row_activation, sram_ib, sram_ob, sram_wb,
                           add,           mac,                     quant,   shift_decode,
                           noc_per_transfer, sfu_per_output,       pe_static, dram_static};
  for (double f : fields)
    if (f < 0) fail(Err::BadConfig, "energy entries must be non-negative");
}

EnergyConfig load_energy_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Err::IoError, "cannot open: " + path);
  json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) fail(Err::ParseError, "malformed energy config: " + path);

  EnergyConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (!val.is_number()) fail(Err::ParseError, path + ": '" + key + "' must be a number");
    double v = val.get<double>();
    if (key == "dram_per_beat") cfg.dram_per_beat = v;
    else if (key == "dram_per_row_activation") cfg.dram_per_row_activation = v;
    else if (key == "sram_ib") cfg.sram_ib = v;
    else if (key == "sram_ob") cfg.sram_ob = v;
    else if (key == "sram_wb") cfg.sram_wb = v;
    else if (key == "add") cfg.add = v;
    else if (key == "mac") cfg.mac = v;
    else if (key == "quant") cfg.quant = v;
    else if (key == "shift_decode") cfg.shift_decode = v;
    else if (key == "noc_per_transfer") cfg.noc_per_transfer = v;
    else if (key == "sfu_per_output") cfg.sfu_per_output = v;
    else if (key == "pe_static") cfg.pe_static = v;
    else if (key == "dram_static") cfg.dram_static = v;
    else fail(Err::BadConfig, path + ": unknown energy key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

EnergyBreakdown energy(const AccessCounters& c, uint64_t cycles, const EnergyConfig& cfg,
                       double freq_hz) {
  cfg.validate();
  if (!(freq_hz > 0)) fail(Err::BadConfig, "frequency must be positive");

  EnergyBreakdown e;
  e.dram = static_cast<double>(c.dram_beats()) * cfg.dram_per_beat +
           static_cast<double>(c.dram_row_activations) * cfg.dram_per_row_activation;
  e.buffers = static_cast<double>(c.ib_reads + c.ib_writes) * cfg.sram_ib +
              static_cast<double>(c.ob_reads + c.ob_writes) * cfg.sram_ob +
              static_cast<double>(c.wb_reads + c.wb_writes) * cfg.sram_wb;
  e.compute = static_cast<double>(c.adds) * cfg.add + static_cast<double>(c.macs) * cfg.mac +
              static_cast<double>(c.quants) * cfg.quant +
              static_cast<double>(c.shift_decodes) * cfg.shift_decode +
              static_cast<double>(c.sfu_outputs) * cfg.sfu_per_output;
  e.noc = static_cast<double>(c.noc_transfers) * cfg.noc_per_transfer;
  e.static_ = (cfg.pe_static + cfg.dram_static) * (static_cast<double>(cycles) / freq_hz);
  e.total = e.dram + e.buffers + e.compute + e.noc + e.static_;
  return e;
}

Comparison compare(const SimReport& a, const SimReport& b) {
  if (a.network != b.network || a.workload != b.workload)
    fail(Err::MismatchedRuns, "reports come from different networks or workloads");

  auto ratio = [](double num, double den) { return den == 0 ? (num == 0 ? 1.0 : 0.0) : num / den; };
  Comparison c;
  c.speedup = ratio(static_cast<double>(b.cycles), static_cast<double>(a.cycles));
  c.energy_ratio = ratio(b.energy.total, a.energy.total);
  c.access_ratio = ratio(static_cast<double>(a.counters.dram_beats()),
                         static_cast<double>(b.counters.dram_beats()));
  c.access_ratio_weights = ratio(static_cast<double>(a.counters.dram_beats_weights),
                                 static_cast<double>(b.counters.dram_beats_weights));
  return c;
}

}  // namespace qeihan
