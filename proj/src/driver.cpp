#include "qeihan/driver.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qeihan/errors.hpp"

namespace qeihan {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

bool log_enabled() {
  const char* env = std::getenv("QEIHAN_LOG");
  return env != nullptr && *env != '\0' && std::string(env) != "0";
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[qeihan] " << msg << "\n";
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(Err::IoError, "cannot open for write: " + tmp.string());
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) fail(Err::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) fail(Err::IoError, "rename failed: " + p.string() + ": " + ec.message());
}

namespace {

// Shortest round-trip decimal form, byte-stable across runs.
std::string fmt_num(double v) { return json(v).dump(); }

json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(Err::IoError, "cannot open: " + path);
  json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) fail(Err::ParseError, "malformed JSON: " + path);
  return j;
}

std::string lower(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

}  // namespace

MemGeometry load_geometry(const std::optional<std::string>& path) {
  MemGeometry g;
  if (!path) return g;
  json j = parse_json_file(*path);
  for (const auto& [key, val] : j.items()) {
    if (!val.is_number()) fail(Err::ParseError, *path + ": '" + key + "' must be a number");
    if (key == "num_vaults") g.num_vaults = val.get<int>();
    else if (key == "dies") g.dies = val.get<int>();
    else if (key == "banks_per_vault_per_die") g.banks_per_vault_per_die = val.get<int>();
    else if (key == "bus_bits") g.bus_bits = val.get<int>();
    else if (key == "bandwidth_bytes_per_sec") g.bandwidth_bytes_per_sec = val.get<double>();
    else if (key == "trc_cycles") g.trc_cycles = val.get<int>();
    else if (key == "logic_freq_hz") g.logic_freq_hz = val.get<double>();
    else if (key == "row_bits") g.row_bits = val.get<int>();
    else if (key == "noc_words_per_cycle") g.noc_words_per_cycle = val.get<int>();
    else if (key == "bank_capacity_bits") g.bank_capacity_bits = val.get<uint64_t>();
    else fail(Err::BadConfig, *path + ": unknown geometry key '" + key + "'");
  }
  g.validate();
  return g;
}

PEConfig load_pe_config(const std::optional<std::string>& path) {
  PEConfig pe;
  if (!path) return pe;
  json j = parse_json_file(*path);
  for (const auto& [key, val] : j.items()) {
    if (key == "double_buffered") {
      if (!val.is_boolean()) fail(Err::ParseError, *path + ": double_buffered must be a bool");
      pe.double_buffered = val.get<bool>();
      continue;
    }
    if (!val.is_number()) fail(Err::ParseError, *path + ": '" + key + "' must be a number");
    if (key == "ib_bytes") pe.ib_bytes = val.get<int>();
    else if (key == "ob_bytes") pe.ob_bytes = val.get<int>();
    else if (key == "wb_bytes") pe.wb_bytes = val.get<int>();
    else if (key == "num_adders") pe.num_adders = val.get<int>();
    else fail(Err::BadConfig, *path + ": unknown PE key '" + key + "'");
  }
  return pe;
}

namespace {

struct ActSource {
  Tensor acts;
  std::string fingerprint;
};

ActSource load_acts(const RunSpec& spec, uint64_t required_count) {
  if (spec.acts_tensor.has_value() == spec.acts_dist.has_value())
    fail(Err::BadConfig, "exactly one of --acts-tensor and --acts-dist is required");

  ActSource src;
  if (spec.acts_tensor) {
    src.acts = load_tensor(*spec.acts_tensor);
    if (src.acts.kind != ElemKind::Real16)
      fail(Err::DimsMismatch, "activation tensor must be Real16");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64,
                  fnv1a64(src.acts.f16.data(), src.acts.f16.size() * sizeof(uint16_t)));
    src.fingerprint = "tensor:" + fs::path(*spec.acts_tensor).filename().string() + ":" + buf;
  } else {
    Distribution dist = load_distribution(*spec.acts_dist);
    uint64_t count = spec.count != 0 ? spec.count : required_count;
    if (count == 0) fail(Err::BadConfig, "--count is required with --acts-dist");
    if (required_count != 0 && count != required_count)
      fail(Err::BadConfig, "--count does not match the network's input size");
    src.acts = synth_activations(dist, count, spec.seed);
    src.fingerprint = "dist:" + fs::path(*spec.acts_dist).filename().string() +
                      ":count=" + std::to_string(count) + ":seed=" + std::to_string(spec.seed);
  }
  return src;
}

ExpHistogram quantize_stream(const Tensor& acts) {
  ExpHistogram h;
  for (size_t i = 0; i < acts.f16.size(); ++i) h.add(log2_quantize_hw(acts.at_f16(i)));
  return h;
}

std::string histogram_csv(const ExpHistogram& h) {
  std::ostringstream out;
  out << "exponent,count\n";
  for (int e = ExpHistogram::kMinExp; e <= ExpHistogram::kMaxExp; ++e)
    out << e << "," << h.at(e) << "\n";
  out << "zero," << h.zero_count << "\n";
  return out.str();
}

class CsvTrace : public TraceSink {
 public:
  CsvTrace() { buf_ = "cycle,vault,die,bank,plane,group\n"; }
  void beat(uint64_t cycle, int vault, int die, int bank, int plane, int64_t group) override {
    buf_ += std::to_string(cycle) + "," + std::to_string(vault) + "," + std::to_string(die) + "," +
            std::to_string(bank) + "," + std::to_string(plane) + "," + std::to_string(group) + "\n";
  }
  const std::string& contents() const { return buf_; }

 private:
  std::string buf_;
};

}  // namespace

std::string report_to_json_string(const SimReport& r) {
  ordered_json j;
  j["machine"] = r.machine;
  j["network"] = r.network;
  j["workload"] = r.workload;
  j["cycles"] = r.cycles;
  j["beats"] = {{"weights", r.beats.weights}, {"inputs", r.beats.inputs}, {"outputs", r.beats.outputs}};
  ordered_json c;
  c["dram_beats"] = r.counters.dram_beats();
  c["dram_beats_weights"] = r.counters.dram_beats_weights;
  c["dram_beats_inputs"] = r.counters.dram_beats_inputs;
  c["dram_beats_outputs"] = r.counters.dram_beats_outputs;
  c["dram_row_activations"] = r.counters.dram_row_activations;
  c["ib_reads"] = r.counters.ib_reads;
  c["ib_writes"] = r.counters.ib_writes;
  c["ob_reads"] = r.counters.ob_reads;
  c["ob_writes"] = r.counters.ob_writes;
  c["wb_reads"] = r.counters.wb_reads;
  c["wb_writes"] = r.counters.wb_writes;
  c["noc_transfers"] = r.counters.noc_transfers;
  c["adds"] = r.counters.adds;
  c["macs"] = r.counters.macs;
  c["quants"] = r.counters.quants;
  c["shift_decodes"] = r.counters.shift_decodes;
  c["sfu_outputs"] = r.counters.sfu_outputs;
  j["counters"] = c;
  ordered_json e;
  e["DRAM"] = r.energy.dram;
  e["Buffers"] = r.energy.buffers;
  e["Compute"] = r.energy.compute;
  e["NoC"] = r.energy.noc;
  e["Static"] = r.energy.static_;
  e["total"] = r.energy.total;
  j["energy"] = e;
  ordered_json hist;
  for (int exp = ExpHistogram::kMinExp; exp <= ExpHistogram::kMaxExp; ++exp)
    hist[std::to_string(exp)] = r.hist.at(exp);
  hist["zero"] = r.hist.zero_count;
  j["histogram"] = hist;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, r.outputs_hash);
  j["outputs_hash"] = buf;
  j["saturated"] = r.saturated;
  return j.dump(2) + "\n";
}

std::vector<std::string> cmd_analyze(const RunSpec& spec) {
  ActSource src = load_acts(spec, 0);
  log_line("analyze: " + src.fingerprint + " (" + std::to_string(src.acts.count()) + " values)");
  ExpHistogram h = quantize_stream(src.acts);

  std::ostringstream savings;
  if (h.nonzero_total() == 0) {
    savings << "savings,0\n";
    savings << "note,pruned_only\n";
  } else {
    savings << "savings," << fmt_num(estimated_memory_savings(h)) << "\n";
    savings << "negative_fraction," << fmt_num(negative_fraction(h)) << "\n";
  }

  std::vector<std::string> written;
  std::string hist_path = (fs::path(spec.out_dir) / "histogram.csv").string();
  std::string sav_path = (fs::path(spec.out_dir) / "savings.csv").string();
  write_file_atomic(hist_path, histogram_csv(h));
  write_file_atomic(sav_path, savings.str());
  written.push_back(hist_path);
  written.push_back(sav_path);
  return written;
}

namespace {

SimReport simulate_one(MachineKind machine, const NetworkDescriptor& net, const Tensor& acts,
                       const std::string& fingerprint, const MemGeometry& g, const PEConfig& pe,
                       const EnergyConfig& ecfg, TraceSink* trace) {
  RunOptions opts;
  opts.trace = trace;
  NetworkRun nr = run_network(machine, net, acts, g, pe, opts, fingerprint);
  nr.report.energy = energy(nr.report.counters, nr.report.cycles, ecfg, g.logic_freq_hz);
  return nr.report;
}

std::string comparison_csv(const std::vector<SimReport>& reports) {
  std::ostringstream out;
  out << "machine,cycles,beats_weights,beats_inputs,beats_outputs,beats_total,"
         "energy_total,energy_dram,energy_buffers,energy_compute,energy_noc,energy_static\n";
  for (const SimReport& r : reports) {
    out << r.machine << "," << r.cycles << "," << r.beats.weights << "," << r.beats.inputs << ","
        << r.beats.outputs << "," << r.counters.dram_beats() << "," << fmt_num(r.energy.total)
        << "," << fmt_num(r.energy.dram) << "," << fmt_num(r.energy.buffers) << ","
        << fmt_num(r.energy.compute) << "," << fmt_num(r.energy.noc) << ","
        << fmt_num(r.energy.static_) << "\n";
  }
  return out.str();
}

}  // namespace

std::vector<std::string> cmd_simulate(const RunSpec& spec) {
  if (spec.machines.empty()) fail(Err::BadConfig, "at least one machine is required");
  if (spec.network_path.empty()) fail(Err::BadConfig, "--network is required");

  NetworkDescriptor net = load_network(spec.network_path);
  MemGeometry g = load_geometry(spec.geometry_path);
  PEConfig pe = load_pe_config(spec.pe_path);
  EnergyConfig ecfg = spec.energy_path ? load_energy_config(*spec.energy_path) : EnergyConfig{};

  uint64_t required = static_cast<uint64_t>(net.layers.front().in_elems());
  ActSource src = load_acts(spec, required);
  if (src.acts.count() != required)
    fail(Err::DimsMismatch, "activation count does not match the network's input size");

  std::vector<SimReport> reports;
  std::vector<std::string> written;
  for (MachineKind m : spec.machines) {
    log_line(std::string("simulate: ") + machine_name(m) + " on " + net.name);
    CsvTrace trace;
    SimReport r = simulate_one(m, net, src.acts, src.fingerprint, g, pe, ecfg,
                               spec.trace ? &trace : nullptr);
    std::string rp = (fs::path(spec.out_dir) / ("report_" + lower(r.machine) + ".json")).string();
    write_file_atomic(rp, report_to_json_string(r));
    written.push_back(rp);
    if (spec.trace) {
      std::string tp = (fs::path(spec.out_dir) / ("trace_" + lower(r.machine) + ".csv")).string();
      write_file_atomic(tp, trace.contents());
      written.push_back(tp);
    }
    reports.push_back(std::move(r));
  }

  std::string cp = (fs::path(spec.out_dir) / "comparison.csv").string();
  write_file_atomic(cp, comparison_csv(reports));
  written.push_back(cp);
  return written;
}

std::vector<std::string> cmd_sweep(const RunSpec& spec) {
  if (spec.network_path.empty()) fail(Err::BadConfig, "--network is required");
  NetworkDescriptor net = load_network(spec.network_path);
  MemGeometry g = load_geometry(spec.geometry_path);
  PEConfig pe = load_pe_config(spec.pe_path);
  EnergyConfig ecfg = spec.energy_path ? load_energy_config(*spec.energy_path) : EnergyConfig{};

  uint64_t count = static_cast<uint64_t>(net.layers.front().in_elems());
  std::ostringstream out;
  out << "center,savings,speedup,cycles_qeihan,cycles_nahid\n";
  for (int center = 0; center >= -7; --center) {
    Tensor acts = synth_activations(Distribution::single(center), count, spec.seed);
    std::string fp = "sweep:center=" + std::to_string(center) + ":seed=" + std::to_string(spec.seed);
    SimReport q = simulate_one(MachineKind::QeiHaN, net, acts, fp, g, pe, ecfg, nullptr);
    SimReport n = simulate_one(MachineKind::NaHiD, net, acts, fp, g, pe, ecfg, nullptr);
    double savings = estimated_memory_savings(q.hist);
    double speedup = static_cast<double>(n.cycles) / static_cast<double>(q.cycles);
    out << center << "," << fmt_num(savings) << "," << fmt_num(speedup) << "," << q.cycles << ","
        << n.cycles << "\n";
  }

  std::string sp = (fs::path(spec.out_dir) / "sweep.csv").string();
  write_file_atomic(sp, out.str());
  return {sp};
}

std::vector<std::string> cmd_gen_weights(const std::string& network_path, uint64_t seed) {
  NetworkDescriptor net = load_network(network_path, /*check_weight_files=*/false);
  std::vector<std::string> written;
  for (const LayerDescriptor& layer : net.layers) {
    auto it = net.weight_files.find(layer.name);
    if (it == net.weight_files.end()) continue;
    std::vector<uint32_t> dims =
        layer.kind == LayerKind::FC
            ? std::vector<uint32_t>{static_cast<uint32_t>(layer.out_channels),
                                    static_cast<uint32_t>(layer.in_channels)}
            : std::vector<uint32_t>{static_cast<uint32_t>(layer.out_channels),
                                    static_cast<uint32_t>(layer.in_channels),
                                    static_cast<uint32_t>(layer.kernel_h),
                                    static_cast<uint32_t>(layer.kernel_w)};
    Tensor w = Tensor::int8(dims);
    std::mt19937_64 rng(seed ^ fnv1a64(layer.name.data(), layer.name.size()));
    std::uniform_int_distribution<int> dist(-128, 127);
    for (auto& v : w.i8) v = static_cast<int8_t>(dist(rng));
    fs::path p(it->second);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    store_tensor(w, it->second);
    written.push_back(it->second);
  }
  return written;
}

}  // namespace qeihan
