"""Matrix-free operator norms, norm surfaces, envelope fits and square functions."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .grid import Grid, SampledFunction, l2_norm, l2_norm_array
from .kernels import Kernel, Modulus, PowerModulus, omega1
from .operators import (LinearOp, LPFamily, MollifierFamily, a_op, b_op, bump_transform,
                        dyadic_piece_op, lp_normalization, resolved_dyadic_range)

PAIRS = ("sigmaQ", "Qsigma", "AQ", "BQ")


class NumericFailure(ArithmeticError):
    """Power iteration produced a non-finite iterate."""


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    converged: bool


def _random_start(grid: Grid, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)


def operator_norm(op: LinearOp, seed=0, max_iters: int = 200, tol: float = 1e-4) -> NormEstimate:
    """Power iteration on ``op* op`` from a seeded complex random vector.

    The estimate is the square root of the Rayleigh quotient; iteration
    stops once two successive estimates agree to ``tol`` relatively.
    """
    rng = np.random.default_rng(seed)
    grid = op.grid
    v = _random_start(grid, rng)
    v /= l2_norm_array(v, grid)
    prev = None
    for it in range(1, max_iters + 1):
        w = op.apply_adjoint(op(v))
        if not np.all(np.isfinite(w)):
            raise NumericFailure(f"non-finite iterate at step {it} for {op.label}")
        rq = max(float(np.real(np.vdot(v, w))) * grid.cell, 0.0)
        est = math.sqrt(rq)
        nw = l2_norm_array(w, grid)
        if nw == 0.0:
            return NormEstimate(0.0, it, True)
        v = w / nw
        if prev is not None and abs(est - prev) <= tol * max(est, 1e-300):
            return NormEstimate(est, it, True)
        prev = est
    return NormEstimate(est, max_iters, False)


def matrix_probe(grid: Grid, matrix: np.ndarray) -> LinearOp:
    """A dense matrix acting on flattened grid arrays (for small oracles)."""
    m = np.asarray(matrix, dtype=complex)
    mh = m.conj().T
    shape = grid.shape
    return LinearOp(grid, lambda v: (m @ v.ravel()).reshape(shape),
                    lambda v: (mh @ v.ravel()).reshape(shape), "matrix")


# ---------------------------------------------------------------------------
# surfaces


def cell_seed(master: int, j: int, s: float) -> np.random.SeedSequence:
    """Per-cell seed from the master seed, the dyadic row and the exact bits of ``s``."""
    s_bits = int(np.float64(s).view(np.uint64))
    return np.random.SeedSequence([int(master), int(j) + (1 << 16), s_bits])


def pair_op(kernel: Kernel, family: LPFamily, pair: str, j: int, s: float,
            mf: MollifierFamily | None = None) -> LinearOp:
    q = family.op(s)
    if pair == "sigmaQ":
        return dyadic_piece_op(kernel, family.grid, j) @ q
    if pair == "Qsigma":
        return q @ dyadic_piece_op(kernel, family.grid, j)
    mf = mf or MollifierFamily(family.grid)
    if pair == "AQ":
        return a_op(kernel, mf, j) @ q
    if pair == "BQ":
        return b_op(kernel, mf, j) @ q
    raise ValueError(f"unknown pair {pair!r}; expected one of {PAIRS}")


def pair_j_range(grid: Grid, pair: str) -> tuple[int, int]:
    """Rows available for ``pair`` on ``grid``.

    ``sigma_j`` needs ``2h <= 2^j`` and ``2^(j+1) <= L/2``; the mollified
    pairs need ``2^(j-1) >= 2h``.
    """
    lo, hi = resolved_dyadic_range(grid)
    if pair in ("sigmaQ", "Qsigma"):
        lo = math.ceil(math.log2(2 * grid.spacing) - 1e-12)
    return lo, hi


def log_s_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return np.geomspace(lo, hi, count)


@dataclass
class NormSurface:
    pair: str
    kernel: str
    js: list
    ss: list
    values: list
    iterations: list
    converged: list
    settings: dict = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    @property
    def all_converged(self) -> bool:
        return all(all(row) for row in self.converged)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "s", "estimate", "iterations", "converged"])
        for a, j in enumerate(self.js):
            for b, s in enumerate(self.ss):
                w.writerow([j, repr(float(s)), repr(float(self.values[a][b])),
                            self.iterations[a][b], int(self.converged[a][b])])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NormSurface":
        return cls(**json.loads(text))


def norm_surface(kernel: Kernel, grid: Grid, pair: str, js, ss, seed: int = 0,
                 max_iters: int = 200, tol: float = 1e-4, threads: int = 1) -> NormSurface:
    """One :func:`operator_norm` per ``(j, s)`` cell.

    Cells are seeded from ``(seed, j, s)`` so the surface does not depend
    on the thread count.
    """
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}; expected one of {PAIRS}")
    family = LPFamily(grid, lp_normalization(grid.dimension))
    mf = MollifierFamily(grid)
    js = [int(j) for j in js]
    ss = [float(s) for s in ss]
    cells = [(j, s) for j in js for s in ss]

    def run(cell):
        j, s = cell
        op = pair_op(kernel, family, pair, j, s, mf)
        rng_seed = cell_seed(seed, j, s)
        return operator_norm(op, rng_seed, max_iters, tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    shape = (len(js), len(ss))
    it = iter(results)
    grid_res = [[next(it) for _ in ss] for _ in js]
    return NormSurface(
        pair=pair, kernel=kernel.name, js=js, ss=ss,
        values=[[r.value for r in row] for row in grid_res],
        iterations=[[r.iterations for r in row] for row in grid_res],
        converged=[[r.converged for r in row] for row in grid_res],
        settings={"seed": seed, "max_iters": max_iters, "tol": tol,
                  "grid": [grid.dimension, grid.extent, grid.points], "shape": list(shape)},
    )


# ---------------------------------------------------------------------------
# envelope fits


def envelope(omega: Modulus, j, s, theta: float = 0.5) -> np.ndarray:
    """``E(j, s) = min(omega1(2^j / s), omega1(s / 2^j))``."""
    w1 = omega1(omega, theta)
    r = np.power(2.0, np.asarray(j, dtype=float)) / np.asarray(s, dtype=float)
    return np.minimum(w1(r), w1(1.0 / r))


@dataclass
class EnvelopeFit:
    constant: float
    argmax: tuple
    ratios: list
    finite: bool
    theta: float
    modulus: dict

    def branch_profile(self, surface: NormSurface) -> list:
        """Rows of ``(j, log2(s / 2^j), entry)`` sorted by distance from the peak."""
        out = []
        for a, j in enumerate(surface.js):
            for b, s in enumerate(surface.ss):
                out.append((j, math.log2(s / 2.0 ** j), surface.values[a][b]))
        return sorted(out, key=lambda r: (r[0], abs(r[1])))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def envelope_fit(surface: NormSurface, omega: Modulus | None = None,
                 theta: float = 0.5) -> EnvelopeFit:
    omega = omega if omega is not None else PowerModulus(1.0)
    m = surface.matrix()
    jj, ss = np.meshgrid(surface.js, surface.ss, indexing="ij")
    env = envelope(omega, jj, ss, theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(env > 0, m / env, np.where(m > 0, np.inf, 0.0))
    idx = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    c = float(ratio[idx])
    return EnvelopeFit(constant=c, argmax=(surface.js[idx[0]], surface.ss[idx[1]]),
                       ratios=ratio.tolist(), finite=math.isfinite(c), theta=theta,
                       modulus=omega.describe())


def decay_violations(surface: NormSurface, min_octaves: float = 2.0, noise: float = 0.2) -> list:
    """Cells that break monotone decay away from the scale match.

    Along each row, moving outward from ``s = 2^j`` once
    ``|log2(s/2^j)| >= min_octaves``, an entry may exceed its inner
    neighbour by at most the relative ``noise``.
    """
    bad = []
    for a, j in enumerate(surface.js):
        row = surface.values[a]
        logs = [math.log2(s / 2.0 ** j) for s in surface.ss]
        for side in (1, -1):
            idx = [b for b in range(len(logs)) if side * logs[b] >= min_octaves]
            idx.sort(key=lambda b: side * logs[b])
            for p, q in zip(idx, idx[1:]):
                if row[q] > row[p] * (1 + noise):
                    bad.append((j, surface.ss[q]))
    return bad


def row_peaks(surface: NormSurface) -> list:
    """Per row, ``log2(s_peak / 2^j)``."""
    return [math.log2(surface.ss[int(np.argmax(row))] / 2.0 ** j)
            for j, row in zip(surface.js, surface.values)]


# ---------------------------------------------------------------------------
# square functions and the T1 sum


def square_function_norm(kernel: Kernel, which: str, f: SampledFunction, js) -> float:
    """``||(sum_j |F_j f|^2)^(1/2)||_2`` with ``F_j = A_j`` or ``B_j``."""
    mf = MollifierFamily(f.grid)
    build = {"A": a_op, "B": b_op}.get(which)
    if build is None:
        raise ValueError("family must be 'A' or 'B'")
    acc = np.zeros(f.grid.shape)
    for j in js:
        acc += np.abs(build(kernel, mf, j)(f.values)) ** 2
    return l2_norm_array(np.sqrt(acc), f.grid)


def t1_sum_check(kernel: Kernel, f: SampledFunction, js) -> list:
    """Norms of ``sum_{j <= J} sigma_j f`` for nested ranges, from the top down.

    Entry ``k`` holds ``(lowest j, ||sum_{j = lowest}^{top} sigma_j f||_2)``
    with ranges growing towards the fine scales, the direction in which
    the singular integral needs stabilization.
    """
    js = sorted(int(j) for j in js)
    acc = np.zeros(f.grid.shape, dtype=complex)
    out = []
    for j in reversed(js):
        acc += dyadic_piece_op(kernel, f.grid, j)(f.values)
        out.append((j, l2_norm_array(acc, f.grid)))
    return out


def cauchy_gap(kernel: Kernel, f: SampledFunction, js) -> float:
    """``||sigma_jmin f||_2 / ||f||_2``: the change between the two largest ranges."""
    jmin = min(js)
    return l2_norm_array(dyadic_piece_op(kernel, f.grid, jmin)(f.values), f.grid) / l2_norm(f)


# ---------------------------------------------------------------------------
# Fourier oracles for the Hilbert kernel


def hilbert_shell_multiplier(xi, lo: float, hi: float = math.inf) -> np.ndarray:
    """Symbol of ``int_{lo < |u| <= hi} f(x - u) du / u`` at angular frequency ``xi``."""
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    top = np.pi / 2 if math.isinf(hi) else special.sici(hi * a)[0]
    return -2j * np.sign(xi) * (top - special.sici(lo * a)[0])


@lru_cache(maxsize=2)
def _psi_hat_table(dimension: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.linspace(0.0, 400.0, 40001)
    vals = np.concatenate([bump_transform(c, dimension) - bump_transform(c / 2, dimension)
                           for c in np.array_split(u, 40)])
    return u, vals / math.sqrt(lp_normalization(dimension))


def lp_symbol(xi, s: float, dimension: int = 1) -> np.ndarray:
    """``psi_hat(s |xi|)`` of the normalized Littlewood-Paley profile (tabulated)."""
    u, vals = _psi_hat_table(dimension)
    return np.interp(s * np.abs(np.asarray(xi, dtype=float)), u, vals, right=0.0)


def hilbert_sigma_q_norm(j: int, s: float, points: int = 20001) -> float:
    """``sup_xi |m_j(xi) psi_hat(s xi)|`` for the continuum Hilbert ``sigma_j Q_s``."""
    xi = np.geomspace(1e-4 / s, 60.0 / s, points)
    m = hilbert_shell_multiplier(xi, 2.0 ** j, 2.0 ** (j + 1))
    return float(np.max(np.abs(m * lp_symbol(xi, s))))
