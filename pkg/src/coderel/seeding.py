"""Deterministic 64-bit seed derivation.

All stochastic components of the package draw their seeds through
:func:`mix64`, built from the splitmix64 generator (Steele, Lea & Flood's
constants).  The mix is avalanche-complete, so nearby ``(master_seed,
sweep_index, replication)`` triples yield statistically unrelated streams
while staying bit-reproducible across platforms.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _scramble(z: int) -> int:
    """splitmix64 output scrambler (xor-shift-multiply finalizer)."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def splitmix64(state: int) -> tuple[int, int]:
    """Advance the splitmix64 state once; returns (new_state, output)."""
    state = (state + _GAMMA) & _MASK
    return state, _scramble(state)


def mix64(*parts: int) -> int:
    """Fold any number of integers into one well-mixed 64-bit seed."""
    h = 0
    for value in parts:
        _, word = splitmix64(h ^ (value & _MASK))
        h = word
    return h


def unit_uniforms(seed: int, count: int) -> list[float]:
    """``count`` reproducible doubles in [0, 1) from a splitmix64 stream."""
    out = []
    state = seed & _MASK
    for _ in range(count):
        state, word = splitmix64(state)
        out.append((word >> 11) * (1.0 / (1 << 53)))
    return out
