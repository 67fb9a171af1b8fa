"""Counter-based random numbers addressable by matrix position.

A draw is a pure function of ``(seed, stream_id, i, j)``, so any entry of a
generated matrix can be produced without touching the others.  The scalar
helpers and the vectorized ``*_block`` functions share one code path and
agree bit for bit.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

MASK64 = (1 << 64) - 1

STREAM_MATRIX = 0
STREAM_RHS = 1
STREAM_DIAG_SIGN = 2

# sub-stream tags folded into the stream id for the two Box-Muller uniforms
_GAUSS_SUB = (1 << 62, 1 << 63)

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0**-53


class StreamKey(NamedTuple):
    seed: int
    stream_id: int
    i: int
    j: int


def mix64(z):
    """64-bit avalanche mixer (bijective).

    Accepts a Python int (returns an int) or an array of uint64.
    """
    if isinstance(z, (int, np.integer)):
        z = int(z) & MASK64
        z ^= z >> 30
        z = (z * 0xBF58476D1CE4E5B9) & MASK64
        z ^= z >> 27
        z = (z * 0x94D049BB133111EB) & MASK64
        z ^= z >> 31
        return z
    z = np.array(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def stream_hash(seed: int, stream_id: int) -> int:
    return mix64((int(seed) & MASK64) ^ mix64(stream_id))


def _counters(rows, cols):
    rows = np.asarray(rows, dtype=np.uint64).reshape(-1, 1)
    cols = np.asarray(cols, dtype=np.uint64).reshape(1, -1)
    return (rows << np.uint64(32)) + cols


def _bits(h: int, rows, cols) -> np.ndarray:
    return mix64(np.uint64(h) ^ _counters(rows, cols))


def _unit(bits: np.ndarray) -> np.ndarray:
    # top 53 bits -> multiple of 2**-53 in [0, 1)
    return (bits >> np.uint64(11)).astype(np.float64) * _TWO_M53


def uniform_block(seed: int, stream_id: int, rows, cols) -> np.ndarray:
    """Uniform [-1, 1) draws for the grid ``rows x cols`` (shape len(rows), len(cols))."""
    return 2.0 * _unit(_bits(stream_hash(seed, stream_id), rows, cols)) - 1.0


def gaussian_block(seed: int, stream_id: int, rows, cols) -> np.ndarray:
    """Standard normal draws via Box-Muller on two sub-stream uniforms."""
    sid = int(stream_id) & MASK64
    u1 = _unit(_bits(stream_hash(seed, sid ^ _GAUSS_SUB[0]), rows, cols))
    u2 = _unit(_bits(stream_hash(seed, sid ^ _GAUSS_SUB[1]), rows, cols))
    u1[u1 == 0.0] = _TWO_M53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def uniform_element(key: StreamKey) -> float:
    seed, sid, i, j = key
    return float(uniform_block(seed, sid, [i], [j])[0, 0])


def gaussian_element(key: StreamKey) -> float:
    seed, sid, i, j = key
    return float(gaussian_block(seed, sid, [i], [j])[0, 0])
