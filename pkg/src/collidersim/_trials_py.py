"""Pure-Python trial counting loop.

Semantics must stay bit-for-bit identical to the compiled loop in
_trials.pyx and to rng.raw64(seed, stream, 2*k): trial k of a batch
consumes the even counter 2*k (the odd counters are reserved for jitter
draws, which a batch with N=0 never makes).
"""

from __future__ import annotations

_M = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_GOLDEN2 = 0xD1B54A32D192ED03
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB


def count_thresholds(seed: int, stream: int, zeta: int, r_lo: int, r_hi1: int):
    """Count draws r with r < r_lo and with r > r_hi1 over zeta trials."""
    s = (seed + _GOLDEN * (stream + 1)) & _M
    s ^= s >> 30
    s = (s * _C1) & _M
    s ^= s >> 27
    s = (s * _C2) & _M
    s ^= s >> 31

    n_less = 0
    n_great = 0
    for k in range(zeta):
        x = (s + _GOLDEN2 * (2 * k + 1)) & _M
        x ^= x >> 30
        x = (x * _C1) & _M
        x ^= x >> 27
        x = (x * _C2) & _M
        x ^= x >> 31
        if x < r_lo:
            n_less += 1
        elif x > r_hi1:
            n_great += 1
    return n_less, n_great
