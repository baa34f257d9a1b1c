"""Jump, variation and short-variation functionals of finite complex sequences.

A sequence here is a family ``F_t`` sampled at strictly increasing labels
``t_0 < ... < t_{m-1}``.  All quantities are suprema over index
subsequences, so they only depend on the order of the labels.

Two layers live in this module:

* single-sequence functions returning small report objects
  (:func:`lambda_jump_count`, :func:`q_variation`, :func:`sup_lambda_jump`,
  :func:`short_variation`) together with exponential brute-force oracles;
* field kernels operating on an ``(m, P)`` array of ``m`` ladder values at
  ``P`` grid points at once (:func:`jump_levels`, :func:`q_variation_field`).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numba
import numpy as np

BRUTE_FORCE_MAX_LENGTH = 20


class OracleSizeExceeded(ValueError):
    """Raised when an exponential oracle is asked for a too-long sequence."""


@dataclass(frozen=True)
class SampleSequence:
    """Complex values indexed by strictly increasing real labels."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=float).ravel()
        val = np.asarray(self.values, dtype=complex).ravel()
        if val.size < 1:
            raise ValueError("sequence must have at least one value")
        if idx.shape != val.shape:
            raise ValueError("indices and values must have equal length")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if not np.all(np.isfinite(val)) or not np.all(np.isfinite(idx)):
            raise ValueError("indices and values must be finite")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_values(cls, values) -> "SampleSequence":
        values = np.asarray(values, dtype=complex).ravel()
        return cls(np.arange(values.size, dtype=float), values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class JumpReport:
    lam: float
    count: int
    anchor_indices: tuple = field(default=())


@dataclass(frozen=True)
class VariationReport:
    q: float
    value: float
    subsequence: tuple = field(default=())


def _as_sequence(seq) -> SampleSequence:
    if isinstance(seq, SampleSequence):
        return seq
    return SampleSequence.from_values(seq)


def _check_q(q: float) -> float:
    q = float(q)
    if not q > 1:
        raise ValueError(f"q must lie in (1, inf], got {q}")
    return q


def lambda_jump_count(seq, lam: float) -> JumpReport:
    """Exact lambda-jump count of a sequence.

    ``count`` is the largest ``N`` such that some increasing index chain
    ``i_0 < ... < i_N`` has every consecutive difference of modulus strictly
    larger than ``lam``.  Computed by an O(m^2) longest-chain recursion;
    ties are broken towards the earliest predecessor so the reported chain
    is deterministic.
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    seq = _as_sequence(seq)
    a = seq.values
    m = a.size
    best = np.zeros(m, dtype=int)
    prev = np.full(m, -1)
    for i in range(1, m):
        ok = np.abs(a[i] - a[:i]) > lam
        if ok.any():
            cand = np.where(ok, best[:i], -1)
            j = int(np.argmax(cand))
            best[i] = cand[j] + 1
            prev[i] = j
    end = int(np.argmax(best))
    count = int(best[end])
    if count == 0:
        return JumpReport(lam, 0, (0,))
    chain = [end]
    while prev[chain[-1]] >= 0:
        chain.append(int(prev[chain[-1]]))
    return JumpReport(lam, count, tuple(reversed(chain)))


def anchored_greedy_count(seq, lam: float) -> int:
    """Single-pass count that re-anchors at the first value moving by > lam.

    Cheap but only a lower bound for the jump count: an early anchor can
    block a longer chain (e.g. ``(-0.7, -1.47, 1.2)`` at ``lam=1.93``
    gives 0 while the pair ``(-1.47, 1.2)`` is a jump).
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    a = _as_sequence(seq).values
    anchor, count = a[0], 0
    for v in a[1:]:
        if abs(v - anchor) > lam:
            count += 1
            anchor = v
    return count


@lru_cache(maxsize=None)
def _chains(m: int, r: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(m), r)), dtype=np.intp)


def _check_oracle_size(m: int):
    if m > BRUTE_FORCE_MAX_LENGTH:
        raise OracleSizeExceeded(
            f"brute force limited to length {BRUTE_FORCE_MAX_LENGTH}, got {m}")


def lambda_jump_count_bruteforce(seq, lam: float) -> int:
    """Jump count by enumerating every index subsequence."""
    a = _as_sequence(seq).values
    m = a.size
    _check_oracle_size(m)
    best = 0
    for r in range(2, m + 1):
        c = _chains(m, r)
        gaps = np.abs(np.diff(a[c], axis=1))
        if np.any(np.all(gaps > lam, axis=1)):
            best = r - 1
    return best


def q_variation_bruteforce(seq, q: float) -> float:
    """q-variation by enumerating every index subsequence."""
    q = _check_q(q)
    a = _as_sequence(seq).values
    m = a.size
    _check_oracle_size(m)
    best = 0.0
    for r in range(2, m + 1):
        gaps = np.abs(np.diff(a[_chains(m, r)], axis=1))
        if math.isinf(q):
            best = max(best, float(gaps.max()))
        else:
            best = max(best, float((gaps ** q).sum(axis=1).max()))
    return best if math.isinf(q) else best ** (1.0 / q)


def q_variation(seq, q: float) -> VariationReport:
    """q-variation of a sequence with a maximizing subsequence.

    For finite ``q`` the q-th power is maximized by the recursion
    ``best[i] = max_{j<i} best[j] + |a_i - a_j|^q``.  For ``q = inf`` the
    value is the largest pairwise oscillation.
    """
    q = _check_q(q)
    a = _as_sequence(seq).values
    m = a.size
    if m < 2:
        return VariationReport(q, 0.0, (0,))
    if math.isinf(q):
        d = np.abs(a[:, None] - a[None, :])
        i, j = np.unravel_index(int(np.argmax(np.triu(d, 1))), d.shape)
        return VariationReport(q, float(d[i, j]), (int(i), int(j)))
    best = np.zeros(m)
    prev = np.full(m, -1)
    for i in range(1, m):
        cand = best[:i] + np.abs(a[i] - a[:i]) ** q
        j = int(np.argmax(cand))
        best[i] = cand[j]
        prev[i] = j
    end = int(np.argmax(best))
    chain = [end]
    while prev[chain[-1]] >= 0:
        chain.append(int(prev[chain[-1]]))
    return VariationReport(q, float(best[end] ** (1.0 / q)), tuple(reversed(chain)))


def sup_lambda_jump(seq) -> tuple[float, float]:
    """Return ``(lambda_star, sup over lambda > 0 of lambda * sqrt(N_lambda))``.

    The supremum is approached from below at a breakpoint ``d`` (a pairwise
    difference modulus) where the count uses ``|diff| >= d``; it need not be
    attained.  A constant sequence gives ``(0, 0)``.
    """
    a = _as_sequence(seq).values
    if a.size < 2:
        raise ValueError("sup_lambda_jump needs at least two values")
    levels = jump_levels(a[:, None])[:, 0]
    scores = levels * np.sqrt(np.arange(1, levels.size + 1))
    c = int(np.argmax(scores))
    if scores[c] <= 0:
        return 0.0, 0.0
    return float(levels[c]), float(scores[c])


def short_variation(blocks: Mapping[int, SampleSequence]) -> float:
    """l2 combination over dyadic blocks of the in-block 2-variation.

    ``blocks`` maps a block number ``j`` to a sequence whose labels lie in
    the closed range ``[2^j, 2^(j+1)]``.
    """
    total = 0.0
    for j, seq in blocks.items():
        seq = _as_sequence(seq)
        lo, hi = 2.0 ** j, 2.0 ** (j + 1)
        if seq.indices[0] < lo or seq.indices[-1] > hi:
            raise ValueError(f"block {j} has labels outside [{lo}, {hi}]")
        total += q_variation(seq, 2.0).value ** 2
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# field kernels: many sequences (one per grid point) at once


@numba.njit(cache=True, nogil=True)
def _jump_levels_kernel(values, out):
    m, npts = values.shape
    chain = np.empty((m, m))
    for p in range(npts):
        for i in range(m):
            chain[i, 0] = np.inf
            for c in range(1, m):
                chain[i, c] = -1.0
        for c in range(m - 1):
            out[c, p] = 0.0
        for i in range(1, m):
            ai = values[i, p]
            for j in range(i):
                gap = abs(ai - values[j, p])
                for c in range(1, j + 2):
                    prev = chain[j, c - 1]
                    if prev < 0:
                        break
                    v = gap if gap < prev else prev
                    if v > chain[i, c]:
                        chain[i, c] = v
            for c in range(1, i + 1):
                if chain[i, c] > out[c - 1, p]:
                    out[c - 1, p] = chain[i, c]


def jump_levels(values: np.ndarray) -> np.ndarray:
    """Bottleneck levels ``d_c`` for every column of an ``(m, P)`` array.

    ``d_c`` (row ``c-1``) is the largest ``d`` for which some chain of
    ``c`` consecutive jumps has every jump of modulus ``>= d``.  The levels
    are nonincreasing in ``c`` and encode the whole jump profile:
    ``N_lambda = #{c : d_c > lambda}``.
    """
    values = np.ascontiguousarray(np.asarray(values, dtype=np.complex128))
    if values.ndim != 2:
        raise ValueError("values must have shape (m, P)")
    m, npts = values.shape
    out = np.zeros((max(m - 1, 0), npts))
    if m >= 2:
        _jump_levels_kernel(values, out)
    return out


def counts_from_levels(levels: np.ndarray, lam, inclusive: bool = False) -> np.ndarray:
    """Jump counts at each ``lam`` from :func:`jump_levels` output.

    Returns an array of shape ``np.shape(lam) + (P,)``.
    """
    lam = np.asarray(lam, dtype=float)
    lv = levels[(slice(None),) + (None,) * lam.ndim]
    hit = lv >= lam[..., None] if inclusive else lv > lam[..., None]
    return hit.sum(axis=0)


def pointwise_sup_jump(levels: np.ndarray) -> np.ndarray:
    """``sup_lambda lambda * sqrt(N_lambda)`` at each point."""
    if levels.shape[0] == 0:
        return np.zeros(levels.shape[1])
    c = np.sqrt(np.arange(1, levels.shape[0] + 1))[:, None]
    return (levels * c).max(axis=0)


def norm_sup_jump(levels: np.ndarray, cell: float) -> tuple[float, float]:
    """Exact ``sup_lambda lambda * ||sqrt(N_lambda)||_2`` for a sampled field.

    ``cell`` is the quadrature weight ``h^n``.  With all levels pooled and
    sorted in decreasing order, the sum over points of ``N_{>=d}`` at
    ``d = v_k`` is the number of pooled values ``>= v_k``, so the supremum
    is a maximum over the pooled values.  Returns ``(lambda_star, sup)``.
    """
    pooled = np.sort(levels[levels > 0].ravel())[::-1]
    if pooled.size == 0:
        return 0.0, 0.0
    # rank counting ties: number of values >= v
    ranks = np.searchsorted(-pooled, -pooled, side="right")
    scores = pooled * np.sqrt(cell * ranks)
    k = int(np.argmax(scores))
    return float(pooled[k]), float(scores[k])


def norm_jump_profile(levels: np.ndarray, cell: float, lams) -> np.ndarray:
    """``lambda * ||sqrt(N_lambda)||_2`` on a grid of lambdas (strict count)."""
    lams = np.asarray(lams, dtype=float)
    pooled = np.sort(levels[levels > 0].ravel())
    above = pooled.size - np.searchsorted(pooled, lams, side="right")
    return lams * np.sqrt(cell * above)


def q_variation_field(values: np.ndarray, q: float) -> np.ndarray:
    """q-variation of every column of an ``(m, P)`` array."""
    q = _check_q(q)
    values = np.asarray(values, dtype=complex)
    m, npts = values.shape
    if m < 2:
        return np.zeros(npts)
    if math.isinf(q):
        out = np.zeros(npts)
        for i in range(1, m):
            out = np.maximum(out, np.abs(values[i] - values[:i]).max(axis=0))
        return out
    best = np.zeros((m, npts))
    for i in range(1, m):
        best[i] = (best[:i] + np.abs(values[i] - values[:i]) ** q).max(axis=0)
    return best.max(axis=0) ** (1.0 / q)


def log_lambda_grid(levels: np.ndarray, density: int = 16, count_floor: float = 1e-6) -> np.ndarray:
    """Log-spaced lambdas spanning the pooled jump levels (for plot data)."""
    pooled = levels[levels > 0]
    if pooled.size == 0:
        return np.zeros(0)
    hi = float(pooled.max())
    lo = max(float(pooled.min()), hi * count_floor)
    n = max(2, int(math.ceil(math.log10(hi / lo) * density)) + 1) if hi > lo else 2
    return np.geomspace(lo, hi, n)
