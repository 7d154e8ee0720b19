// Command-line front end: analyze, simulate, sweep and gen-weights.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qeihan/driver.hpp"
#include "qeihan/errors.hpp"

namespace {

void add_common(CLI::App* cmd, qeihan::RunSpec& spec, std::string& machines) {
  cmd->add_option("--network", spec.network_path, "network descriptor JSON");
  cmd->add_option("--machines", machines, "comma-separated list: qeihan,nahid,neurocube or 'all'");
  cmd->add_option("--geometry", spec.geometry_path, "memory geometry overrides JSON");
  cmd->add_option("--pe", spec.pe_path, "PE configuration overrides JSON");
  cmd->add_option("--energy", spec.energy_path, "energy configuration JSON");
  cmd->add_option("--acts-tensor", spec.acts_tensor, "activation tensor file");
  cmd->add_option("--acts-dist", spec.acts_dist, "exponent distribution JSON");
  cmd->add_option("--count", spec.count, "synthetic activation count");
  cmd->add_option("--seed", spec.seed, "synthetic activation seed");
  cmd->add_option("--out", spec.out_dir, "output directory");
  cmd->add_flag("--trace", spec.trace, "dump per-beat DRAM traces");
}

std::vector<qeihan::MachineKind> parse_machines(const std::string& arg) {
  std::vector<qeihan::MachineKind> out;
  if (arg.empty()) return out;
  if (arg == "all") {
    return {qeihan::MachineKind::QeiHaN, qeihan::MachineKind::NaHiD,
            qeihan::MachineKind::Neurocube};
  }
  size_t pos = 0;
  while (pos != std::string::npos) {
    size_t comma = arg.find(',', pos);
    std::string tok = comma == std::string::npos ? arg.substr(pos) : arg.substr(pos, comma - pos);
    if (!tok.empty()) out.push_back(qeihan::parse_machine(tok));
    pos = comma == std::string::npos ? std::string::npos : comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QeiHaN near-data-processing accelerator simulator"};
  app.require_subcommand(1);

  qeihan::RunSpec spec;
  std::string machines = "all";

  CLI::App* analyze = app.add_subcommand("analyze", "quantize activations, emit histogram and savings");
  add_common(analyze, spec, machines);

  CLI::App* simulate = app.add_subcommand("simulate", "run machines on a workload, emit reports");
  add_common(simulate, spec, machines);

  CLI::App* sweep = app.add_subcommand("sweep", "single-bin exponent sweep from 0 to -7");
  add_common(sweep, spec, machines);

  std::string gen_network;
  uint64_t gen_seed = 1;
  CLI::App* gen = app.add_subcommand("gen-weights", "write synthetic INT8 weight tensors for a network");
  gen->add_option("--network", gen_network, "network descriptor JSON")->required();
  gen->add_option("--seed", gen_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::string> written;
    if (analyze->parsed()) {
      written = qeihan::cmd_analyze(spec);
    } else if (simulate->parsed()) {
      spec.machines = parse_machines(machines);
      written = qeihan::cmd_simulate(spec);
    } else if (sweep->parsed()) {
      spec.machines = parse_machines(machines);
      written = qeihan::cmd_sweep(spec);
    } else if (gen->parsed()) {
      written = qeihan::cmd_gen_weights(gen_network, gen_seed);
    }
    for (const std::string& path : written) std::cout << path << "\n";
  } catch (const qeihan::SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
