"""Independent reference implementations used as test oracles."""

from __future__ import annotations

import itertools
import math

import numpy as np

MASK64 = (1 << 64) - 1
PHILOX_M0 = 0xD2E7470EE14C6C93
PHILOX_M1 = 0xCA5A826395121157
PHILOX_W0 = 0x9E3779B97F4A7C15
PHILOX_W1 = 0xBB67AE8584CAA73B


def _mulhilo(a: int, b: int) -> tuple[int, int]:
    p = a * b
    return p >> 64, p & MASK64


def philox4x64(counter: list[int], key: list[int], rounds: int = 10) -> list[int]:
    c = list(counter)
    k0, k1 = key
    for _ in range(rounds):
        hi0, lo0 = _mulhilo(PHILOX_M0, c[0])
        hi1, lo1 = _mulhilo(PHILOX_M1, c[2])
        c = [hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0]
        k0 = (k0 + PHILOX_W0) & MASK64
        k1 = (k1 + PHILOX_W1) & MASK64
    return c


def philox_stream(seed: int, stream: int, n: int) -> list[int]:
    """Raw 64-bit outputs; the counter is bumped before each block."""
    out: list[int] = []
    ctr = 0
    while len(out) < n:
        ctr += 1
        out += philox4x64([ctr & MASK64, ctr >> 64, 0, 0], [seed, stream])
    return out[:n]


def edit_distance_bruteforce(ref: list, hyp: list) -> int:
    """Minimum edit count by exhaustive search over which ref words survive.

    Any edit script keeps some order-preserving matching of ref to hyp
    positions; the cost is then substitutions for unequal matched pairs plus
    the unmatched words on both sides. Enumerating every matching is
    exponential but exact for short inputs.
    """
    best = len(ref) + len(hyp)
    n, m = len(ref), len(hyp)
    for k in range(min(n, m) + 1):
        for rs in itertools.combinations(range(n), k):
            for hs in itertools.combinations(range(m), k):
                subs = sum(ref[i] != hyp[j] for i, j in zip(rs, hs))
                best = min(best, subs + (n - k) + (m - k))
    return best


def conv1d_naive(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    T, d = x.shape
    K = kernel.shape[0]
    y = np.zeros((T, d))
    for t in range(T):
        for c in range(d):
            for j in range(K):
                s = t + j - K // 2
                if 0 <= s < T:
                    y[t, c] += x[s, c] * kernel[j, c]
    return y


def matmul_loops(a, b):
    m, k = len(a), len(a[0])
    n = len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(n)] for i in range(m)]


def bleu_by_hand(matches, totals, hyp_len, ref_len) -> float:
    logs = []
    for n, (mt, tt) in enumerate(zip(matches, totals), start=1):
        p = mt / tt if mt else (1.0 / (tt + 1) if n > 1 else 0.0)
        if p == 0:
            return 0.0
        logs.append(math.log(p))
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return bp * math.exp(sum(logs) / 4)
