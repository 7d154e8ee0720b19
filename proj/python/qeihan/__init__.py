"""Python interface to the QeiHaN accelerator simulator."""

from ._qeihan import (
    SimError,
    decode_and_shift,
    estimated_memory_savings,
    gen_weights,
    histogram,
    log2_quantize,
    negative_fraction,
    round_log2_hw,
    schedule_beats,
    simulate,
    synth_activations,
    uniform_quantize,
)

__all__ = [
    "SimError",
    "decode_and_shift",
    "estimated_memory_savings",
    "gen_weights",
    "histogram",
    "log2_quantize",
    "negative_fraction",
    "round_log2_hw",
    "schedule_beats",
    "simulate",
    "synth_activations",
    "uniform_quantize",
]
