"""Operator families acting on sampled functions.

Every singular-integral operator here integrates the kernel over a shell
``lo < |x - y| <= hi`` of the offset lattice (``hi = inf`` allowed):

=================  ===============================  ==========================
operator           shell                            builder
=================  ===============================  ==========================
``T_eps``          ``eps < r``                      :func:`truncated_op`
``sigma_j``        ``2^j < r <= 2^(j+1)``           :func:`dyadic_piece_op`
``T_j`` (tail)     ``2^(j+1) < r``                  :func:`tail_op`
``T^j`` (local)    ``2h < r <= 2^(j+1)``            :func:`local_op`
``T_{j,t}``        ``2^j t < r <= 2^(j+1)``         :func:`block_op`
=================  ===============================  ==========================

With one half-open convention the shells are disjoint and every
decomposition (``sum sigma_j``, ``T_j + T^j``, sub-annuli of a block)
telescopes exactly on the grid.

Operators are :class:`LinearOp` objects working on raw ``numpy`` arrays of
grid shape; the ``*_apply`` functions wrap them for :class:`SampledFunction`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import fft as sfft
from scipy import special

from .grid import Grid, SampledFunction
from .kernels import Kernel

REL = 1e-12


class LinearOp:
    """A matrix-free linear map on grid arrays with a known adjoint."""

    def __init__(self, grid: Grid, apply: Callable, adjoint: Callable, label: str = ""):
        self.grid = grid
        self._apply = apply
        self._adjoint = adjoint
        self.label = label

    def __call__(self, values: np.ndarray) -> np.ndarray:
        return self._apply(np.asarray(values, dtype=complex))

    def apply_adjoint(self, values: np.ndarray) -> np.ndarray:
        return self._adjoint(np.asarray(values, dtype=complex))

    @property
    def H(self) -> "LinearOp":
        return LinearOp(self.grid, self._adjoint, self._apply, f"({self.label})*")

    def __matmul__(self, other: "LinearOp") -> "LinearOp":
        a, b = self, other
        return LinearOp(self.grid, lambda v: a(b(v)),
                        lambda v: b.apply_adjoint(a.apply_adjoint(v)),
                        f"{a.label} {b.label}")

    def __add__(self, other: "LinearOp") -> "LinearOp":
        a, b = self, other
        return LinearOp(self.grid, lambda v: a(v) + b(v),
                        lambda v: a.apply_adjoint(v) + b.apply_adjoint(v),
                        f"({a.label} + {b.label})")

    def __sub__(self, other: "LinearOp") -> "LinearOp":
        return self + other * -1.0

    def __mul__(self, c) -> "LinearOp":
        a, c = self, complex(c)
        return LinearOp(self.grid, lambda v: c * a(v),
                        lambda v: np.conj(c) * a.apply_adjoint(v), f"{c} {a.label}")

    __rmul__ = __mul__

    def sampled(self, f: SampledFunction) -> SampledFunction:
        if f.grid != self.grid:
            raise ValueError("operator and function live on different grids")
        return f.with_values(self(f.values))


def identity_op(grid: Grid) -> LinearOp:
    return LinearOp(grid, lambda v: v.copy(), lambda v: v.copy(), "I")


def zero_op(grid: Grid) -> LinearOp:
    return LinearOp(grid, np.zeros_like, np.zeros_like, "0")


def multiply_op(grid: Grid, coef: np.ndarray, label: str = "M") -> LinearOp:
    coef = np.asarray(coef, dtype=complex)
    cc = np.conj(coef)
    return LinearOp(grid, lambda v: coef * v, lambda v: cc * v, label)


class _ConvolutionPlan:
    """Zero-padded linear convolution with a kernel on the offset lattice.

    The kernel transform is computed once; applying costs one forward and
    one inverse FFT.  The plan is read-only after construction.
    """

    def __init__(self, grid: Grid, kernel: np.ndarray):
        g = grid.points
        self.grid = grid
        self.nfft = tuple(sfft.next_fast_len(3 * g - 2) for _ in range(grid.dimension))
        self.khat = sfft.fftn(kernel * grid.cell, self.nfft)
        # valid part of the full convolution starts at offset index G-1
        self.window = tuple(slice(g - 1, 2 * g - 1) for _ in range(grid.dimension))

    def __call__(self, values):
        vhat = sfft.fftn(values, self.nfft)
        return sfft.ifftn(vhat * self.khat)[self.window]


def convolution_op(grid: Grid, kernel: np.ndarray, label: str = "C") -> LinearOp:
    """Convolution with ``kernel`` sampled on the ``(2G-1)^n`` offset lattice."""
    kernel = np.asarray(kernel, dtype=complex)
    fwd = _ConvolutionPlan(grid, kernel)
    flipped = np.conj(kernel[(slice(None, None, -1),) * grid.dimension])
    bwd = _ConvolutionPlan(grid, flipped)
    return LinearOp(grid, fwd, bwd, label)


# ---------------------------------------------------------------------------
# shells


@lru_cache(maxsize=16)
def _offset_sq_units(grid: Grid) -> np.ndarray:
    """Squared offset lengths in units of h^2 (exact integers)."""
    k = np.arange(-(grid.points - 1), grid.points, dtype=float)
    if grid.dimension == 1:
        return k * k
    return k[:, None] ** 2 + k[None, :] ** 2


def shell_mask(grid: Grid, lo: float, hi: float = math.inf) -> np.ndarray:
    """Offsets with ``lo < |u| <= hi`` on the offset lattice."""
    r2 = _offset_sq_units(grid)
    h = grid.spacing
    mask = r2 > (lo / h) ** 2
    if math.isfinite(hi):
        mask &= r2 <= (hi / h) ** 2
    return mask


def _masked_profile(grid: Grid, profile: Callable, mask: np.ndarray) -> np.ndarray:
    out = np.zeros(mask.shape, dtype=complex)
    if mask.any():
        coords = tuple(c[mask] for c in grid.offset_coords())
        out[mask] = profile(coords)
    return out


def shell_op(kernel: Kernel, grid: Grid, lo: float, hi: float = math.inf,
             label: str = "") -> LinearOp:
    """The kernel integrated over the shell ``lo < |x - y| <= hi``."""
    if kernel.dimension != grid.dimension:
        raise ValueError("kernel and grid dimensions differ")
    label = label or f"{kernel.name}[{lo:g},{hi:g}]"
    mask = shell_mask(grid, lo, hi)
    rep = kernel.representation
    if rep == "convolution":
        return convolution_op(grid, _masked_profile(grid, kernel.profile, mask), label)
    if rep in ("separable", "separable-right"):
        coords = grid.coords()
        op = None
        for coef, prof in kernel.terms:
            c = multiply_op(grid, coef(coords))
            conv = convolution_op(grid, _masked_profile(grid, prof, mask))
            term = c @ conv if rep == "separable" else conv @ c
            op = term if op is None else op + term
        op.label = label
        return op
    return direct_shell_op(kernel, grid, lo, hi, label)


def direct_shell_op(kernel: Kernel, grid: Grid, lo: float, hi: float = math.inf,
                    label: str = "", chunk: int = 256) -> LinearOp:
    """Shell operator by direct summation over all pairs (no FFT).

    Cost is ``O(G^(2n))``; it exists for general kernels and as the
    reference for the fast paths.
    """
    pts = tuple(c.ravel() for c in grid.coords())
    npts = pts[0].size
    h = grid.spacing
    lo2 = (lo / h) ** 2
    hi2 = (hi / h) ** 2 if math.isfinite(hi) else math.inf
    idx = np.stack(np.unravel_index(np.arange(npts), grid.shape), axis=-1).astype(float)

    def run(k: Kernel, values):
        v = values.ravel()
        out = np.empty(npts, dtype=complex)
        for start in range(0, npts, chunk):
            rows = slice(start, min(start + chunk, npts))
            d2 = ((idx[rows, None, :] - idx[None, :, :]) ** 2).sum(axis=-1)
            mask = (d2 > lo2) & (d2 <= hi2)
            x = tuple(np.broadcast_to(p[rows, None], mask.shape)[mask] for p in pts)
            y = tuple(np.broadcast_to(p[None, :], mask.shape)[mask] for p in pts)
            kv = np.zeros(mask.shape, dtype=complex)
            kv[mask] = k.eval_components(x, y)
            out[rows] = grid.cell * (kv @ v)
        return out.reshape(grid.shape)

    adj = kernel.adjoint()
    return LinearOp(grid, lambda v: run(kernel, v), lambda v: run(adj, v),
                    label or f"direct {kernel.name}")


def shell_at(kernel: Kernel, f: SampledFunction, point, lo: float,
             hi: float = math.inf) -> complex:
    """Shell operator evaluated at a single grid point by direct summation."""
    grid = f.grid
    p = np.atleast_1d(np.asarray(point, dtype=float))
    coords = grid.coords()
    d2 = sum(((c - pi) / grid.spacing) ** 2 for c, pi in zip(coords, p))
    mask = d2 > (lo / grid.spacing) ** 2
    if math.isfinite(hi):
        mask &= d2 <= (hi / grid.spacing) ** 2
    y = tuple(c[mask] for c in coords)
    x = tuple(np.full(y[0].shape, pi) for pi in p)
    vals = kernel.eval_components(x, y) * f.values[mask]
    return complex(grid.cell * vals.sum())


# ---------------------------------------------------------------------------
# scale checks


def resolved_dyadic_range(grid: Grid) -> tuple[int, int]:
    """``[ceil(log2 4h), floor(log2 L/4)]``."""
    h = grid.spacing
    return math.ceil(math.log2(4 * h) - REL), math.floor(math.log2(grid.extent / 4) + REL)


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def _check_piece(grid: Grid, j: int):
    _require(2.0 ** j >= 2 * grid.spacing * (1 - REL),
             f"2^{j} below the resolved scale 2h={2 * grid.spacing}")
    _require(2.0 ** (j + 1) <= grid.extent / 2 * (1 + REL), f"2^{j + 1} beyond L/2")


# ---------------------------------------------------------------------------
# singular integral families


def truncated_op(kernel: Kernel, grid: Grid, eps: float) -> LinearOp:
    _require(eps >= 2 * grid.spacing * (1 - REL),
             f"eps={eps} below the resolved scale 2h={2 * grid.spacing}")
    return shell_op(kernel, grid, eps, math.inf, f"T_{eps:g}")


def dyadic_piece_op(kernel: Kernel, grid: Grid, j: int) -> LinearOp:
    _check_piece(grid, j)
    return shell_op(kernel, grid, 2.0 ** j, 2.0 ** (j + 1), f"sigma_{j}")


def tail_op(kernel: Kernel, grid: Grid, j: int) -> LinearOp:
    _require(2.0 ** (j + 1) >= 2 * grid.spacing * (1 - REL), f"tail scale 2^{j + 1} unresolved")
    return shell_op(kernel, grid, 2.0 ** (j + 1), math.inf, f"T_({j})")


def local_op(kernel: Kernel, grid: Grid, j: int) -> LinearOp:
    _require(2.0 ** (j + 1) > 2 * grid.spacing, f"local scale 2^{j + 1} unresolved")
    return shell_op(kernel, grid, 2 * grid.spacing, 2.0 ** (j + 1), f"T^({j})")


def block_op(kernel: Kernel, grid: Grid, j: int, t: float) -> LinearOp:
    if not 1 <= t <= 2:
        raise ValueError(f"block parameter t={t} outside [1, 2]")
    _check_piece(grid, j)
    return shell_op(kernel, grid, 2.0 ** j * t, 2.0 ** (j + 1), f"T_{j},{t:g}")


def truncated_apply(kernel: Kernel, f: SampledFunction, eps: float) -> SampledFunction:
    return truncated_op(kernel, f.grid, eps).sampled(f)


def dyadic_piece_apply(kernel: Kernel, f: SampledFunction, j: int) -> SampledFunction:
    return dyadic_piece_op(kernel, f.grid, j).sampled(f)


def tail_apply(kernel: Kernel, f: SampledFunction, j: int) -> SampledFunction:
    return tail_op(kernel, f.grid, j).sampled(f)


def local_apply(kernel: Kernel, f: SampledFunction, j: int) -> SampledFunction:
    return local_op(kernel, f.grid, j).sampled(f)


def block_apply(kernel: Kernel, f: SampledFunction, j: int, t: float) -> SampledFunction:
    return block_op(kernel, f.grid, j, t).sampled(f)


# ---------------------------------------------------------------------------
# bump profiles


def bump(r) -> np.ndarray:
    """``exp(-1 / (1 - r^2))`` on ``r < 1``, zero elsewhere."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


_PANELS = np.linspace(0.0, 1.0, 401)
_PX, _PW = np.polynomial.legendre.leggauss(24)
_R = (0.5 * np.diff(_PANELS)[:, None] * (_PX[None, :] + 1) + _PANELS[:-1, None]).ravel()
_W = (0.5 * np.diff(_PANELS)[:, None] * _PW[None, :]).ravel()


def bump_transform(freq, dimension: int) -> np.ndarray:
    """Fourier transform of the radial bump at angular frequency ``|xi|``."""
    w = np.asarray(freq, dtype=float)
    vals = bump(_R) * _W
    if dimension == 1:
        return 2.0 * np.cos(np.multiply.outer(w, _R)) @ vals
    return 2 * np.pi * special.j0(np.multiply.outer(w, _R)) @ (vals * _R)


@lru_cache(maxsize=4)
def lp_normalization(dimension: int) -> float:
    """``int_0^inf psi0_hat(u)^2 du / u`` for ``psi0 = b - 2^n b(2 .)``."""
    u = np.geomspace(1e-3, 400.0, 6001)
    ph = bump_transform(u, dimension) - bump_transform(u / 2, dimension)
    vals = ph ** 2
    return float(np.trapezoid(vals, np.log(u)))


# ---------------------------------------------------------------------------
# Littlewood-Paley and mollifier families


@dataclass(frozen=True)
class LPFamily:
    """``Q_s f = psi_s * f`` with ``psi = (b - 2^n b(2 .)) / sqrt(c)``.

    ``c`` makes ``int_0^inf psi_hat(s xi)^2 ds / s = 1``.  On the grid the
    second bump is rescaled so that each sampled ``psi_s`` has exactly zero
    discrete mean.
    """

    grid: Grid
    normalization: float

    @property
    def s_range(self) -> tuple[float, float]:
        return 4 * self.grid.spacing, self.grid.extent / 2

    def kernel_samples(self, s: float) -> np.ndarray:
        lo, hi = self.s_range
        _require(lo * (1 - REL) <= s <= hi * (1 + REL), f"s={s} outside [{lo}, {hi}]")
        n = self.grid.dimension
        r = np.sqrt(sum(c * c for c in self.grid.offset_coords())) / s
        outer = bump(r)
        inner = 2 ** n * bump(2 * r)
        outer_mass, inner_mass = outer.sum(), inner.sum()
        psi = outer - inner * (outer_mass / inner_mass)
        return psi / (s ** n * math.sqrt(self.normalization))

    def profile(self, u: tuple) -> np.ndarray:
        n = self.grid.dimension
        r = np.sqrt(sum(c * c for c in u))
        return (bump(r) - 2 ** n * bump(2 * r)) / math.sqrt(self.normalization)

    def op(self, s: float) -> LinearOp:
        k = self.kernel_samples(s)
        return convolution_op(self.grid, k, f"Q_{s:.4g}")

    def log_nodes(self, per_decade: int = 64, lo: float | None = None,
                  hi: float | None = None) -> tuple[np.ndarray, float]:
        """Midpoint nodes of a log-uniform partition of ``[lo, hi]`` and the step in ``log s``."""
        a, b = self.s_range
        lo = a if lo is None else lo
        hi = b if hi is None else hi
        cells = max(1, int(math.ceil(math.log10(hi / lo) * per_decade - 1e-9)))
        edges = np.linspace(math.log(lo), math.log(hi), cells + 1)
        step = edges[1] - edges[0]
        return np.exp(edges[:-1] + step / 2), step



def build_lp_family(grid: Grid) -> LPFamily:
    return LPFamily(grid, lp_normalization(grid.dimension))


def lp_apply(family: LPFamily, f: SampledFunction, s: float) -> SampledFunction:
    return family.op(s).sampled(f)


def calderon_sum(family: LPFamily, f: SampledFunction, per_decade: int = 64) -> SampledFunction:
    """Discretized ``int Q_s^2 f ds / s`` over the admissible s-range."""
    nodes, step = family.log_nodes(per_decade)
    acc = np.zeros(f.grid.shape, dtype=complex)
    for s in nodes:
        q = family.op(float(s))
        acc += q(q(f.values)) * step
    return f.with_values(acc)


@dataclass(frozen=True)
class MollifierFamily:
    """``phi_j(x) = 2^(-jn) phi(2^-j x)`` with ``phi`` a bump on ``B(0, 1/2)``.

    Samples are normalized to unit discrete mass at every scale.
    """

    grid: Grid

    def kernel_samples(self, j: int) -> np.ndarray:
        h = self.grid.spacing
        _require(2.0 ** (j - 1) >= 2 * h * (1 - REL), f"mollifier scale 2^{j} unresolved")
        r = np.sqrt(sum(c * c for c in self.grid.offset_coords())) / 2.0 ** j
        phi = bump(2 * r)
        return phi / (phi.sum() * self.grid.cell)

    def op(self, j: int) -> LinearOp:
        return convolution_op(self.grid, self.kernel_samples(j), f"phi_{j}")


def mollifier_apply(mf: MollifierFamily, f: SampledFunction, j: int) -> SampledFunction:
    return mf.op(j).sampled(f)


def a_op(kernel: Kernel, mf: MollifierFamily, j: int) -> LinearOp:
    """``A_j = phi_j * T^j``."""
    return mf.op(j) @ local_op(kernel, mf.grid, j)


def b_op(kernel: Kernel, mf: MollifierFamily, j: int) -> LinearOp:
    """``B_j = (delta - phi_j) * T_j``."""
    tail = tail_op(kernel, mf.grid, j)
    return tail - mf.op(j) @ tail


def a_operator_apply(kernel: Kernel, mf: MollifierFamily, f: SampledFunction,
                     j: int) -> SampledFunction:
    return a_op(kernel, mf, j).sampled(f)


def b_operator_apply(kernel: Kernel, mf: MollifierFamily, f: SampledFunction,
                     j: int) -> SampledFunction:
    return b_op(kernel, mf, j).sampled(f)
