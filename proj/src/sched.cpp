#include "qeihan/sched.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

#include "qeihan/errors.hpp"

namespace qeihan {

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

int effective_workers(const RunOptions& opts) {
  if (opts.workers > 0) return opts.workers;
  if (const char* env = std::getenv("QEIHAN_WORKERS")) {
    int w = std::atoi(env);
    if (w > 0) return w;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

const char* machine_name(MachineKind m) {
  switch (m) {
    case MachineKind::QeiHaN: return "QeiHaN";
    case MachineKind::NaHiD: return "NaHiD";
    case MachineKind::Neurocube: return "Neurocube";
  }
  return "?";
}

MachineKind parse_machine(const std::string& name) {
  std::string low;
  for (char c : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (low == "qeihan") return MachineKind::QeiHaN;
  if (low == "nahid") return MachineKind::NaHiD;
  if (low == "neurocube") return MachineKind::Neurocube;
  fail(Err::BadConfig, "unknown machine: " + name);
}

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

Partition partition_layer(const LayerDescriptor& layer, const MemGeometry& g, const PEConfig& pe) {
  layer.validate();
  g.validate();
  pe.validate(g);

  Partition p;
  p.vault_channels.assign(static_cast<size_t>(g.num_vaults), {});
  for (int c = 0; c < layer.in_channels; ++c)
    p.vault_channels[static_cast<size_t>(c % g.num_vaults)].push_back(c);

  const int ib_cap = pe.ib_half_bytes() / 2;  // binary16 values per input block
  const int ob_cap = pe.ob_half_bytes() / 2;  // int16 partials per output block
  if (ib_cap < 1 || ob_cap < 1) fail(Err::Unpartitionable, "buffers cannot hold a single value");

  if (layer.kind == LayerKind::FC) {
    // Single block and input per channel.
    p.blocks_per_channel = 1;
    p.in_block_values = 1;
    p.out_block_values = layer.out_channels;
    if (layer.out_channels > ob_cap)
      fail(Err::Unpartitionable, layer.name + ": FC partial outputs exceed the output buffer");
    return p;
  }

  const int in_sp = layer.in_h * layer.in_w;
  const int out_sp = layer.out_h() * layer.out_w();
  const int ob_px_cap = ob_cap / layer.out_channels;  // output pixels (all channels) per block
  if (ob_px_cap < 1)
    fail(Err::Unpartitionable, layer.name + ": one output pixel of all channels exceeds the OB");
  const int n_in = static_cast<int>(ceil_div(static_cast<uint64_t>(in_sp), static_cast<uint64_t>(ib_cap)));
  const int n_out = static_cast<int>(ceil_div(static_cast<uint64_t>(out_sp), static_cast<uint64_t>(ob_px_cap)));
  p.blocks_per_channel = std::max(n_in, n_out);
  p.in_block_values = static_cast<int>(ceil_div(static_cast<uint64_t>(in_sp), static_cast<uint64_t>(p.blocks_per_channel)));
  p.out_block_values = static_cast<int>(ceil_div(static_cast<uint64_t>(out_sp), static_cast<uint64_t>(p.blocks_per_channel))) * layer.out_channels;
  return p;
}

// ---------------------------------------------------------------------------
// Shared helpers.

namespace {

struct TraceEvent {
  uint64_t cycle;
  int die, bank;
  int plane;
  int64_t group;
};

// Striped sequential stream (activations, output write-back): one closed-page
// request per row, banks round-robin.
struct StreamCursor {
  uint64_t next_bank = 0;

  void requests(uint64_t beats, const MemGeometry& g, std::vector<Request>& out) {
    while (beats > 0) {
      uint32_t n = static_cast<uint32_t>(std::min<uint64_t>(beats, static_cast<uint64_t>(g.row_beats())));
      Request r;
      r.bank = static_cast<int>(next_bank++ % static_cast<uint64_t>(g.total_banks()));
      r.beats = n;
      out.push_back(r);
      beats -= n;
    }
  }
};

void trace_requests(const std::vector<Request>& reqs, const std::vector<uint64_t>& starts,
                    uint64_t base_cycle, const MemGeometry& g, const PlacedWeights* placed,
                    std::vector<TraceEvent>& out) {
  for (size_t i = 0; i < reqs.size(); ++i) {
    const Request& r = reqs[i];
    for (uint32_t b = 0; b < r.beats; ++b) {
      TraceEvent ev;
      ev.cycle = base_cycle + starts[i] + b / static_cast<uint32_t>(g.beats_per_cycle());
      ev.die = r.bank / g.banks_per_vault_per_die;
      ev.bank = r.bank % g.banks_per_vault_per_die;
      int16_t plane = -1;
      int64_t group = -1;
      if (placed && r.kind != Request::Kind::Stream) placed->describe_beat(r, b, plane, group);
      ev.plane = plane;
      ev.group = group;
      out.push_back(ev);
    }
  }
}

// Balanced split of `total` into `parts`: bounds of part i.
std::pair<int, int> part_range(int total, int parts, int i) {
  auto lo = static_cast<int>((static_cast<int64_t>(total) * i) / parts);
  auto hi = static_cast<int>((static_cast<int64_t>(total) * (i + 1)) / parts);
  return {lo, hi};
}

struct VaultResult {
  AccessCounters counters;
  ExpHistogram hist;
  std::vector<int16_t> partials;  // IS: partial outputs for the whole OFM
  uint64_t cycles = 0;
  bool saturated = false;
  bool participated = false;  // any non-pruned work
  std::vector<TraceEvent> trace;
  // Neurocube per-step resources (combined lockstep after the join).
  std::vector<uint64_t> step_mem, step_compute;
  std::vector<int32_t> acc32;
};

// ---------------------------------------------------------------------------
// Input-stationary machines (QeiHaN, NaHiD).

struct IsContext {
  const LayerDescriptor& layer;
  const Tensor& inputs;
  const PlacedWeights& placed;
  const Partition& part;
  const MemGeometry& g;
  const PEConfig& pe;
  bool tracing;
};

VaultResult simulate_is_vault(const IsContext& ctx, int vault) {
  const LayerDescriptor& layer = ctx.layer;
  const MemGeometry& g = ctx.g;
  const int sp = layer.in_h * layer.in_w;
  const int oh = layer.out_h(), ow = layer.out_w();
  const int out_sp = oh * ow;
  const uint64_t d = static_cast<uint64_t>(ctx.pe.num_adders);
  const int N = ctx.part.blocks_per_channel;

  VaultResult res;
  res.partials.assign(static_cast<size_t>(layer.out_elems()), 0);
  AccumFlags flags;

  StreamCursor acts_stream;
  const auto& channels = ctx.part.vault_channels[static_cast<size_t>(vault)];

  // Block sequence for this vault: channel-major, N blocks per channel.
  struct BlockWork {
    std::vector<Request> prefetch;
    std::vector<Request> weights;
    uint64_t compute = 0;
  };
  std::vector<BlockWork> blocks;
  blocks.reserve(channels.size() * static_cast<size_t>(N));

  for (size_t lc = 0; lc < channels.size(); ++lc) {
    const int c = channels[lc];
    for (int b = 0; b < N; ++b) {
      auto [lo, hi] = part_range(sp, N, b);
      BlockWork work;
      const uint64_t nvals = static_cast<uint64_t>(hi - lo);
      if (nvals > 0) {
        uint64_t in_beats = ceil_div(nvals * 16, static_cast<uint64_t>(g.bus_bits));
        acts_stream.requests(in_beats, g, work.prefetch);
        res.counters.dram_beats_inputs += in_beats;
        res.counters.ib_writes += nvals;
      }
      for (int pos = lo; pos < hi; ++pos) {
        ++res.counters.ib_reads;
        work.compute += 1;  // quant/prune inspection occupies the pipeline slot
        Real16 x = ctx.inputs.at_f16(static_cast<size_t>(c) * sp + static_cast<size_t>(pos));
        QuantActivation q = log2_quantize_hw(x);
        res.hist.add(q);
        if (q.is_zero) continue;  // one IB read and nothing else
        ++res.counters.quants;
        res.participated = true;

        uint64_t wbeats = ctx.placed.input_fetch_requests(vault, static_cast<int>(lc), q.exp, work.weights);
        res.counters.dram_beats_weights += wbeats;
        res.counters.wb_writes += wbeats;
        res.counters.wb_reads += wbeats;

        // Decode, shift and accumulate every fetched group.
        const int y = pos / layer.in_w, x_pos = pos % layer.in_w;
        const uint64_t L = ctx.placed.groups_per_input();
        const uint64_t g0 = static_cast<uint64_t>(lc) * L;
        uint64_t valid_adds = 0;
        for (uint64_t gi = g0; gi < g0 + L; ++gi) {
          const GroupRef& ref = ctx.placed.group_ref(vault, gi);
          auto fetch = ctx.placed.fetch_weight_group(vault, gi, q.exp, true);
          res.counters.shift_decodes += static_cast<uint64_t>(ref.oc_count);
          int oy = 0, ox = 0;
          if (layer.kind == LayerKind::Conv) {
            int sy = y + layer.padding - ref.kh;
            int sx = x_pos + layer.padding - ref.kw;
            if (sy < 0 || sx < 0 || sy % layer.stride != 0 || sx % layer.stride != 0) continue;
            oy = sy / layer.stride;
            ox = sx / layer.stride;
            if (oy >= oh || ox >= ow) continue;
          }
          for (int lane = 0; lane < ref.oc_count; ++lane) {
            int16_t shifted = decode_and_shift(fetch.slices[static_cast<size_t>(lane)], q.exp);
            size_t oidx = (static_cast<size_t>(ref.oc_begin + lane) * static_cast<size_t>(out_sp)) +
                          static_cast<size_t>(oy) * static_cast<size_t>(ow) + static_cast<size_t>(ox);
            PartialOutput po{res.partials[oidx]};
            res.partials[oidx] = accumulate(po, shifted, q.sign, flags).value;
            ++valid_adds;
          }
        }
        res.counters.adds += valid_adds;
        res.counters.ob_reads += valid_adds;
        res.counters.ob_writes += valid_adds;
        work.compute += ceil_div(valid_adds, d);
      }
      blocks.push_back(std::move(work));
    }
  }
  res.saturated = flags.saturated;

  // Pipelined makespan. Double buffered: block k+1's input prefetch overlaps
  // block k's execution; the first prefetch is exposed.
  uint64_t cycles = 0;
  std::vector<uint64_t> starts;
  auto run_schedule = [&](const std::vector<Request>& reqs, uint64_t base) {
    uint64_t t = schedule_beats(reqs, g, ctx.tracing ? &starts : nullptr);
    if (ctx.tracing) trace_requests(reqs, starts, base, g, &ctx.placed, res.trace);
    res.counters.dram_row_activations += reqs.size();
    return t;
  };

  if (ctx.pe.double_buffered) {
    if (!blocks.empty()) cycles += run_schedule(blocks[0].prefetch, 0);
    for (size_t k = 0; k < blocks.size(); ++k) {
      std::vector<Request> mem = blocks[k].weights;
      if (k + 1 < blocks.size())
        mem.insert(mem.end(), blocks[k + 1].prefetch.begin(), blocks[k + 1].prefetch.end());
      cycles += std::max(run_schedule(mem, cycles), blocks[k].compute);
    }
  } else {
    for (auto& blk : blocks) {
      cycles += run_schedule(blk.prefetch, cycles);
      cycles += std::max(run_schedule(blk.weights, cycles), blk.compute);
    }
  }
  res.cycles = cycles;
  return res;
}

// ---------------------------------------------------------------------------
// Neurocube-like output-stationary baseline.

struct OsContext {
  const LayerDescriptor& layer;
  const Tensor& inputs;
  const std::vector<int8_t>& qacts;  // uniform int8 activations
  const Partition& part;             // reused for the channel->vault input split
  const MemGeometry& g;
  const PEConfig& pe;
  const Tensor& weights;
  uint64_t steps;
  bool tracing;
};

VaultResult simulate_os_vault(const OsContext& ctx, int vault) {
  const LayerDescriptor& layer = ctx.layer;
  const MemGeometry& g = ctx.g;
  const int V = g.num_vaults;
  const int sp = layer.in_h * layer.in_w;
  const int oh = layer.out_h(), ow = layer.out_w();
  const int64_t out_total = layer.out_elems();
  const int d = ctx.pe.num_adders;

  VaultResult res;
  auto [o_lo, o_hi] = part_range(static_cast<int>(out_total), V, vault);
  const int owned = o_hi - o_lo;
  res.acc32.assign(static_cast<size_t>(std::max(owned, 0)), 0);
  res.participated = owned > 0;

  const uint64_t local_vals =
      static_cast<uint64_t>(ctx.part.vault_channels[static_cast<size_t>(vault)].size()) *
      static_cast<uint64_t>(sp);
  const uint64_t total_vals = static_cast<uint64_t>(layer.in_elems());
  const uint64_t slice_beats = ceil_div(local_vals * 8, static_cast<uint64_t>(g.bus_bits));
  const uint64_t tiles = owned > 0 ? ceil_div(static_cast<uint64_t>(owned), static_cast<uint64_t>(d)) : 0;
  const int64_t kernel_bytes = static_cast<int64_t>(layer.in_channels) * layer.kernel_h * layer.kernel_w;

  StreamCursor stream;
  res.step_mem.resize(ctx.steps, 0);
  res.step_compute.resize(ctx.steps, 0);

  for (uint64_t s = 0; s < ctx.steps; ++s) {
    std::vector<Request> reqs;
    // Every vault re-reads and broadcasts its input slice once per step.
    stream.requests(slice_beats, g, reqs);
    res.counters.dram_beats_inputs += slice_beats;
    res.counters.ib_writes += local_vals;
    res.counters.noc_transfers += ceil_div(local_vals, 2) * static_cast<uint64_t>(V - 1);

    if (s < tiles) {
      int t_lo = o_lo + static_cast<int>(s) * d;
      int t_hi = std::min(o_hi, t_lo + d);
      int oc_lo = t_lo / (oh * ow), oc_hi = (t_hi - 1) / (oh * ow);
      uint64_t wbytes = static_cast<uint64_t>(oc_hi - oc_lo + 1) * static_cast<uint64_t>(kernel_bytes);
      uint64_t wbeats = ceil_div(wbytes * 8, static_cast<uint64_t>(g.bus_bits));
      stream.requests(wbeats, g, reqs);
      res.counters.dram_beats_weights += wbeats;
      res.counters.wb_writes += wbeats;

      // MAC every contributing input into the tile's accumulators.
      for (int o = t_lo; o < t_hi; ++o) {
        int oc = o / (oh * ow);
        int oy = (o / ow) % oh, ox = o % ow;
        uint64_t contribs = 0;
        for (int c = 0; c < layer.in_channels; ++c) {
          for (int kh = 0; kh < layer.kernel_h; ++kh) {
            for (int kw = 0; kw < layer.kernel_w; ++kw) {
              int iy = oy * layer.stride + kh - layer.padding;
              int ix = ox * layer.stride + kw - layer.padding;
              if (iy < 0 || iy >= layer.in_h || ix < 0 || ix >= layer.in_w) continue;
              int8_t a = ctx.qacts[static_cast<size_t>(c) * sp + static_cast<size_t>(iy) * layer.in_w + ix];
              int8_t w = ctx.weights.i8[static_cast<size_t>(
                  ((static_cast<int64_t>(oc) * layer.in_channels + c) * layer.kernel_h + kh) *
                      layer.kernel_w +
                  kw)];
              res.acc32[static_cast<size_t>(o - o_lo)] += static_cast<int32_t>(a) * w;
              ++contribs;
            }
          }
        }
        res.counters.macs += contribs;
        res.counters.ib_reads += contribs;
        res.counters.ob_reads += contribs;
        res.counters.ob_writes += contribs;
      }
    }
    std::vector<uint64_t> starts;
    res.step_mem[s] = schedule_beats(reqs, g, ctx.tracing ? &starts : nullptr);
    if (ctx.tracing) trace_requests(reqs, starts, 0, g, nullptr, res.trace);
    res.counters.dram_row_activations += reqs.size();
    // One cycle per streamed input value while a tile is active.
    res.step_compute[s] = s < tiles ? total_vals : 0;
  }
  return res;
}

}  // namespace

// ---------------------------------------------------------------------------

LayerRun run_layer(MachineKind machine, const LayerDescriptor& layer, const Tensor& inputs,
                   const Tensor& weights, const MemGeometry& g, const PEConfig& pe,
                   const RunOptions& opts) {
  layer.validate();
  g.validate();
  pe.validate(g);
  if (inputs.kind != ElemKind::Real16) fail(Err::DimsMismatch, "inputs must be Real16");
  if (inputs.count() != static_cast<uint64_t>(layer.in_elems()))
    fail(Err::DimsMismatch, "input count does not match the layer");
  if (weights.kind != ElemKind::Int8) fail(Err::DimsMismatch, "weights must be Int8");
  {
    std::vector<uint32_t> expect = layer.kind == LayerKind::FC
                                       ? std::vector<uint32_t>{static_cast<uint32_t>(layer.out_channels),
                                                               static_cast<uint32_t>(layer.in_channels)}
                                       : std::vector<uint32_t>{static_cast<uint32_t>(layer.out_channels),
                                                               static_cast<uint32_t>(layer.in_channels),
                                                               static_cast<uint32_t>(layer.kernel_h),
                                                               static_cast<uint32_t>(layer.kernel_w)};
    if (weights.dims != expect) fail(Err::DimsMismatch, "weight dims do not match the layer");
  }

  Partition part = partition_layer(layer, g, pe);
  const int V = g.num_vaults;
  const int workers = effective_workers(opts);

  LayerRun run;

  auto parallel_vaults = [&](auto&& job) {
    std::vector<VaultResult> results(static_cast<size_t>(V));
    std::vector<std::future<void>> futs;
    std::atomic<int> next{0};
    int nthreads = std::min(workers, V);
    for (int t = 0; t < nthreads; ++t) {
      futs.push_back(std::async(std::launch::async, [&]() {
        for (int v = next.fetch_add(1); v < V; v = next.fetch_add(1))
          results[static_cast<size_t>(v)] = job(v);
      }));
    }
    for (auto& f : futs) f.get();
    return results;
  };

  if (machine != MachineKind::Neurocube) {
    LayoutKind kind = machine == MachineKind::QeiHaN ? LayoutKind::BitPlane : LayoutKind::Standard;
    PlacedWeights placed = PlacedWeights::place(weights, kind, g);
    IsContext ctx{layer, inputs, placed, part, g, pe, opts.trace != nullptr};
    auto results = parallel_vaults([&](int v) { return simulate_is_vault(ctx, v); });

    // Deterministic merge in vault order.
    uint64_t slowest = 0;
    std::vector<int16_t> final16(static_cast<size_t>(layer.out_elems()), 0);
    AccumFlags red_flags;
    uint64_t senders = 0;
    for (int v = 0; v < V; ++v) {
      VaultResult& r = results[static_cast<size_t>(v)];
      run.counters += r.counters;
      run.hist += r.hist;
      run.saturated = run.saturated || r.saturated;
      slowest = std::max(slowest, r.cycles);
      if (r.participated && v != 0) ++senders;
      if (r.participated || v == 0) {
        for (size_t i = 0; i < final16.size(); ++i) {
          PartialOutput po{final16[i]};
          final16[i] = accumulate(po, r.partials[i], Sign::Pos, red_flags).value;
        }
      }
      if (opts.trace) {
        for (const TraceEvent& ev : r.trace)
          opts.trace->beat(ev.cycle, v, ev.die, ev.bank, ev.plane, ev.group);
      }
    }
    run.saturated = run.saturated || red_flags.saturated;

    // Post-processing: gather partials of participating vaults to the
    // centralized PE, reduce, SFU, redistribute.
    const uint64_t out_elems = static_cast<uint64_t>(layer.out_elems());
    const uint64_t gather_words = senders * out_elems;
    const uint64_t reduction_adds = senders * out_elems;
    run.counters.noc_transfers += gather_words;
    run.counters.adds += reduction_adds;
    run.counters.ob_reads += reduction_adds + out_elems;
    run.counters.ob_writes += reduction_adds;
    run.counters.sfu_outputs += out_elems;

    run.outputs = sfu_apply(final16, layer, opts.weight_scale);
    const uint64_t final_words = run.outputs.count();
    run.counters.noc_transfers += final_words;

    uint64_t tail = ceil_div(gather_words, static_cast<uint64_t>(g.noc_words_per_cycle)) +
                    ceil_div(reduction_adds, static_cast<uint64_t>(pe.num_adders)) + out_elems +
                    ceil_div(final_words, static_cast<uint64_t>(g.noc_words_per_cycle));
    run.cycles = slowest + tail;
    return run;
  }

  // Neurocube: dynamic uniform int8 activations, no pruning, output-stationary
  // lockstep tiles of d outputs per PE.
  double max_abs = 0;
  for (uint64_t i = 0; i < inputs.count(); ++i)
    max_abs = std::max(max_abs, std::fabs(inputs.at_f16(i).to_double()));
  double s_a = max_abs > 0 ? max_abs / 127.0 : 1.0;
  std::vector<int8_t> qacts(inputs.count());
  for (uint64_t i = 0; i < inputs.count(); ++i)
    qacts[i] = uniform_quantize(inputs.at_f16(i).to_double(), s_a, 0).value;

  const uint64_t outputs_per_pe = ceil_div(static_cast<uint64_t>(layer.out_elems()), static_cast<uint64_t>(V));
  const uint64_t steps = ceil_div(outputs_per_pe, static_cast<uint64_t>(pe.num_adders));

  OsContext ctx{layer, inputs, qacts, part, g, pe, weights, steps, opts.trace != nullptr};
  auto results = parallel_vaults([&](int v) { return simulate_os_vault(ctx, v); });

  uint64_t cycles = 0;
  for (uint64_t s = 0; s < steps; ++s) {
    uint64_t step_time = 0;
    uint64_t step_words = 0;
    for (int v = 0; v < V; ++v) {
      const VaultResult& r = results[static_cast<size_t>(v)];
      step_time = std::max(step_time, std::max(r.step_mem[s], r.step_compute[s]));
    }
    // Broadcast bandwidth: every vault ships its int8 slice to the others.
    for (int v = 0; v < V; ++v) {
      uint64_t vals = static_cast<uint64_t>(part.vault_channels[static_cast<size_t>(v)].size()) *
                      static_cast<uint64_t>(layer.in_h * layer.in_w);
      step_words += ceil_div(vals, 2) * static_cast<uint64_t>(V - 1);
    }
    step_time = std::max(step_time, ceil_div(step_words, static_cast<uint64_t>(g.noc_words_per_cycle)));
    cycles += step_time;
  }

  std::vector<Real16> outs(static_cast<size_t>(layer.out_elems()));
  for (int v = 0; v < V; ++v) {
    VaultResult& r = results[static_cast<size_t>(v)];
    run.counters += r.counters;
    auto [o_lo, o_hi] = part_range(static_cast<int>(layer.out_elems()), V, v);
    for (int o = o_lo; o < o_hi; ++o) {
      double real = static_cast<double>(r.acc32[static_cast<size_t>(o - o_lo)]) * s_a * opts.weight_scale;
      outs[static_cast<size_t>(o)] = Real16::from_double_saturate(real);
    }
    if (opts.trace) {
      for (const TraceEvent& ev : r.trace)
        opts.trace->beat(ev.cycle, v, ev.die, ev.bank, ev.plane, ev.group);
    }
  }

  // Local SFU per PE, then int8 write-back quantization of the final values.
  Tensor pre = layer.kind == LayerKind::FC
                   ? Tensor::real16({static_cast<uint32_t>(layer.out_channels)})
                   : Tensor::real16({static_cast<uint32_t>(layer.out_channels),
                                     static_cast<uint32_t>(layer.out_h()),
                                     static_cast<uint32_t>(layer.out_w())});
  for (size_t i = 0; i < outs.size(); ++i) pre.f16[i] = outs[i].bits();
  run.outputs = apply_activation_pool(pre, layer);

  run.counters.sfu_outputs += static_cast<uint64_t>(layer.out_elems());
  run.counters.quants += run.outputs.count();

  run.cycles = cycles + outputs_per_pe;  // exposed SFU tail, PEs in parallel
  return run;
}

// ---------------------------------------------------------------------------

NetworkRun run_network(MachineKind machine, const NetworkDescriptor& net, const Tensor& inputs,
                       const MemGeometry& g, const PEConfig& pe, const RunOptions& opts,
                       const std::string& workload) {
  if (net.layers.empty()) fail(Err::ShapeError, "network has no layers");

  NetworkRun out;
  out.report.machine = machine_name(machine);
  out.report.network = net.name;
  out.report.workload = workload;

  Tensor acts = inputs;
  for (const LayerDescriptor& layer : net.layers) {
    auto wf = net.weight_files.find(layer.name);
    if (wf == net.weight_files.end())
      fail(Err::MissingTensor, "no weight file for layer " + layer.name);
    std::vector<uint32_t> wdims =
        layer.kind == LayerKind::FC
            ? std::vector<uint32_t>{static_cast<uint32_t>(layer.out_channels),
                                    static_cast<uint32_t>(layer.in_channels)}
            : std::vector<uint32_t>{static_cast<uint32_t>(layer.out_channels),
                                    static_cast<uint32_t>(layer.in_channels),
                                    static_cast<uint32_t>(layer.kernel_h),
                                    static_cast<uint32_t>(layer.kernel_w)};
    Tensor weights = load_tensor(wf->second, wdims);

    RunOptions layer_opts = opts;
    auto q = net.quant.find(layer.name);
    layer_opts.weight_scale = q != net.quant.end() ? q->second.scale : 1.0;

    LayerRun lr = run_layer(machine, layer, acts, weights, g, pe, layer_opts);

    out.report.counters += lr.counters;
    out.report.hist += lr.hist;
    out.report.cycles += lr.cycles;
    out.report.saturated = out.report.saturated || lr.saturated;

    // Inter-layer (and final) activations pass through the producer vaults'
    // DRAM: binary16 for the IS machines, int8 for the uniform baseline.
    int bits_per_value = machine == MachineKind::Neurocube ? 8 : 16;
    uint64_t write_beats =
        ceil_div(lr.outputs.count() * static_cast<uint64_t>(bits_per_value), static_cast<uint64_t>(g.bus_bits));
    out.report.counters.dram_beats_outputs += write_beats;
    out.report.cycles += ceil_div(write_beats, static_cast<uint64_t>(g.beats_per_cycle()));

    acts = std::move(lr.outputs);
  }

  out.report.beats.weights = out.report.counters.dram_beats_weights;
  out.report.beats.inputs = out.report.counters.dram_beats_inputs;
  out.report.beats.outputs = out.report.counters.dram_beats_outputs;
  out.report.outputs_hash = fnv1a64(acts.f16.data(), acts.f16.size() * sizeof(uint16_t));
  out.outputs = std::move(acts);
  return out;
}

}  // namespace qeihan
