"""Deterministic, counter-based random number generation.

All randomness in experiments flows through SplitMix64: a 64-bit seed plus an
index fully determine every draw, so traces are bit-identical across runs,
platforms, and library versions, and are prefix-stable (the first n draws do
not depend on how many draws follow). Gaussians come from the Box-Muller
transform applied to pairs of uniform draws.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _counters(seed: int, start: int, n: int) -> np.ndarray:
    idx = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GAMMA


def uniforms(seed: int, n: int, start: int = 0) -> np.ndarray:
    """n uniforms in (0, 1], draws `start`..`start+n-1` of the seed's stream."""
    with np.errstate(over="ignore"):
        bits = _mix(_counters(seed, start, n))
    return ((bits >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * 2.0**-53


def normals(seed: int, n: int, start: int = 0) -> np.ndarray:
    """n standard normals; draw i consumes uniform pair (2i, 2i+1)."""
    u = uniforms(seed, 2 * n, start=2 * start)
    u1, u2 = u[0::2], u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def substream(seed: int, tag: int) -> int:
    """Derive an independent 64-bit seed for a tagged substream."""
    with np.errstate(over="ignore"):
        out = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + np.uint64(tag + 1) * _GAMMA)
    return int(out)
