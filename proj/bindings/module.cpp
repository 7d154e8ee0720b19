// Python bindings for the main simulator operations.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qeihan/analysis.hpp"
#include "qeihan/driver.hpp"
#include "qeihan/metrics.hpp"
#include "qeihan/model.hpp"
#include "qeihan/quant.hpp"
#include "qeihan/sched.hpp"

namespace py = pybind11;
using namespace qeihan;

namespace {

py::dict act_to_dict(const QuantActivation& q) {
  py::dict d;
  d["zero"] = q.is_zero;
  d["sign"] = q.sign == Sign::Neg ? -1 : 1;
  d["exp"] = q.exp;
  return d;
}

ExpHistogram hist_from_dict(const py::dict& d) {
  ExpHistogram h;
  for (auto item : d) {
    std::string key = py::cast<std::string>(item.first);
    uint64_t count = py::cast<uint64_t>(item.second);
    if (key == "zero")
      h.zero_count = count;
    else
      h.exp_counts[static_cast<size_t>(std::stoi(key) + 8)] = count;
  }
  return h;
}

py::dict hist_to_dict(const ExpHistogram& h) {
  py::dict d;
  for (int e = ExpHistogram::kMinExp; e <= ExpHistogram::kMaxExp; ++e)
    d[py::str(std::to_string(e))] = h.at(e);
  d["zero"] = h.zero_count;
  return d;
}

Distribution dist_from_dict(const py::dict& d) {
  Distribution dist;
  for (auto item : d) {
    std::string key = py::cast<std::string>(item.first);
    double mass = py::cast<double>(item.second);
    if (key == "zero")
      dist.zero_mass = mass;
    else
      dist.exp_mass[static_cast<size_t>(std::stoi(key) + 8)] = mass;
  }
  return dist;
}

py::dict breakdown_to_dict(const EnergyBreakdown& e) {
  py::dict d;
  d["DRAM"] = e.dram;
  d["Buffers"] = e.buffers;
  d["Compute"] = e.compute;
  d["NoC"] = e.noc;
  d["Static"] = e.static_;
  d["total"] = e.total;
  return d;
}

py::dict report_to_dict(const SimReport& r) {
  py::dict d;
  d["machine"] = r.machine;
  d["network"] = r.network;
  d["workload"] = r.workload;
  d["cycles"] = r.cycles;
  py::dict beats;
  beats["weights"] = r.beats.weights;
  beats["inputs"] = r.beats.inputs;
  beats["outputs"] = r.beats.outputs;
  d["beats"] = beats;
  py::dict c;
  c["dram_beats"] = r.counters.dram_beats();
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
  d["counters"] = c;
  d["energy"] = breakdown_to_dict(r.energy);
  d["histogram"] = hist_to_dict(r.hist);
  d["outputs_hash"] = r.outputs_hash;
  d["saturated"] = r.saturated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qeihan, m) {
  m.doc() = "Near-data-processing DNN accelerator simulator";

  py::register_exception<SimError>(m, "SimError");

  m.def(
      "uniform_quantize",
      [](double r, double s, int z) { return static_cast<int>(uniform_quantize(r, s, z).value); },
      py::arg("r"), py::arg("s"), py::arg("z") = 0);

  m.def(
      "log2_quantize",
      [](double x, bool hw) {
        QuantActivation q = hw ? log2_quantize_hw(Real16::from_double(x)) : log2_quantize_ref(x);
        return act_to_dict(q);
      },
      py::arg("x"), py::arg("hw") = false);

  m.def(
      "round_log2_hw",
      [](double x) { return round_log2_hw(Real16::from_double(x)); }, py::arg("x"));

  m.def(
      "decode_and_shift",
      [](int bits, int nbits, int exp) {
        return static_cast<int>(decode_and_shift(
            WeightSlice{static_cast<uint8_t>(bits), static_cast<uint8_t>(nbits)}, exp));
      },
      py::arg("bits"), py::arg("nbits"), py::arg("exp"));

  m.def(
      "synth_activations",
      [](const py::dict& dist, uint64_t count, uint64_t seed) {
        Tensor t = synth_activations(dist_from_dict(dist), count, seed);
        std::vector<double> out(t.f16.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = t.at_f16(i).to_double();
        return out;
      },
      py::arg("dist"), py::arg("count"), py::arg("seed") = 1);

  m.def(
      "histogram",
      [](const std::vector<double>& values, bool hw) {
        ExpHistogram h;
        for (double v : values)
          h.add(hw ? log2_quantize_hw(Real16::from_double(v)) : log2_quantize_ref(v));
        return hist_to_dict(h);
      },
      py::arg("values"), py::arg("hw") = true);

  m.def(
      "negative_fraction",
      [](const py::dict& hist) { return negative_fraction(hist_from_dict(hist)); }, py::arg("hist"));

  m.def(
      "estimated_memory_savings",
      [](const py::dict& hist, int weight_bits) {
        return estimated_memory_savings(hist_from_dict(hist), weight_bits);
      },
      py::arg("hist"), py::arg("weight_bits") = 8);

  m.def(
      "schedule_beats",
      [](const std::vector<std::pair<int, uint32_t>>& reqs) {
        MemGeometry g;
        std::vector<Request> rs;
        for (auto [bank, beats] : reqs) rs.push_back(Request{bank, beats});
        return schedule_beats(rs, g);
      },
      py::arg("requests"));

  m.def(
      "simulate",
      [](const std::string& network, const std::string& machine, const std::string& acts_dist,
         uint64_t count, uint64_t seed, const std::string& acts_tensor) {
        NetworkDescriptor net = load_network(network);
        MemGeometry g;
        PEConfig pe;
        Tensor acts;
        std::string fp;
        if (!acts_tensor.empty()) {
          acts = load_tensor(acts_tensor);
          fp = "tensor:" + acts_tensor;
        } else {
          uint64_t n = count != 0 ? count : static_cast<uint64_t>(net.layers.front().in_elems());
          acts = synth_activations(load_distribution(acts_dist), n, seed);
          fp = "dist:" + acts_dist + ":count=" + std::to_string(n) + ":seed=" + std::to_string(seed);
        }
        NetworkRun nr = run_network(parse_machine(machine), net, acts, g, pe, {}, fp);
        nr.report.energy = energy(nr.report.counters, nr.report.cycles, EnergyConfig{}, g.logic_freq_hz);
        return report_to_dict(nr.report);
      },
      py::arg("network"), py::arg("machine"), py::arg("acts_dist") = "", py::arg("count") = 0,
      py::arg("seed") = 1, py::arg("acts_tensor") = "");

  m.def("gen_weights", &cmd_gen_weights, py::arg("network"), py::arg("seed") = 1);
}
