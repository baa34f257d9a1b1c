"""Uniform grids on [-L, L)^n, sampled functions, quadrature and convolution."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``points`` samples per axis on ``[-extent, extent)^dimension``.

    Sample ``i`` sits at ``-extent + i * spacing``, so the origin is a grid
    point and offsets between grid points are integer multiples of the
    spacing.
    """

    dimension: int
    extent: float
    points: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        g = int(self.points)
        if g < 8 or g & (g - 1):
            raise ValueError("points per axis must be a power of two >= 8")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.points

    @property
    def cell(self) -> float:
        """Quadrature weight h^n."""
        return self.spacing ** self.dimension

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dimension

    @property
    def axis(self) -> np.ndarray:
        return -self.extent + self.spacing * np.arange(self.points)

    def coords(self) -> tuple:
        """Coordinate arrays, one per axis, each of grid shape."""
        if self.dimension == 1:
            return (self.axis,)
        return tuple(np.meshgrid(self.axis, self.axis, indexing="ij"))

    def offset_coords(self) -> tuple:
        """Coordinates of all pairwise differences ``x_i - y_j``.

        Each axis carries ``2G - 1`` offsets from ``-(G-1)h`` to ``(G-1)h``.
        """
        off = self.spacing * np.arange(-(self.points - 1), self.points)
        if self.dimension == 1:
            return (off,)
        return tuple(np.meshgrid(off, off, indexing="ij"))

    def offset_radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.offset_coords()))

    def index_of(self, x: float) -> int:
        i = (x + self.extent) / self.spacing
        if abs(i - round(i)) > 1e-9:
            raise ValueError(f"{x} is not a grid coordinate")
        return int(round(i))

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.dimension, self.extent, self.points * factor)


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples of a function on a :class:`Grid`; immutable."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def __add__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def inner(self, other) -> complex:
        """L2 inner product ``h^n sum f conj(g)``."""
        _same_grid(self, other)
        return complex(self.grid.cell * np.vdot(other.values, self.values))


def zeros(grid: Grid) -> SampledFunction:
    return SampledFunction(grid, np.zeros(grid.shape, dtype=complex))


def sample(grid: Grid, fn: Callable) -> SampledFunction:
    return SampledFunction(grid, fn(*grid.coords()))


def _same_grid(f: SampledFunction, g: SampledFunction):
    if f.grid != g.grid:
        raise ValueError("functions live on different grids")


def l2_norm(f: SampledFunction) -> float:
    """Midpoint-rule L2 norm ``(h^n sum |f|^2)^(1/2)``."""
    return math.sqrt(f.grid.cell * float(np.sum(np.abs(f.values) ** 2)))


def l2_norm_array(values: np.ndarray, grid: Grid) -> float:
    return math.sqrt(grid.cell * float(np.sum(np.abs(values) ** 2)))


def fourier_l2_norm(f: SampledFunction) -> float:
    """Same norm computed from the DFT (discrete Parseval)."""
    coeffs = np.fft.fftn(f.values)
    return math.sqrt(f.grid.cell * float(np.sum(np.abs(coeffs) ** 2)) / coeffs.size)


def convolve_offsets(values: np.ndarray, kernel: np.ndarray, grid: Grid) -> np.ndarray:
    """Linear convolution with a kernel sampled on the offset lattice.

    ``kernel`` has shape ``(2G-1,)*n`` and holds ``k(x_i - y_j)`` for every
    offset; the result is ``h^n sum_j k(x_i - y_j) f(y_j)`` at every grid
    point.  Nothing wraps around: values outside the box count as zero.
    """
    return signal.fftconvolve(values, kernel * grid.cell, mode="valid")


def convolve(f: SampledFunction, kernel_samples: SampledFunction) -> SampledFunction:
    """``(f * k)(x) = h^n sum_j f(y_j) k(x - y_j)``, zero-extended outside the box."""
    _same_grid(f, kernel_samples)
    grid = f.grid
    g = grid.points
    # kernel sample at offset index d lives at d + G/2; pad to 2G-1 offsets
    pad = [(g // 2 - 1, g // 2)] * grid.dimension
    k = np.pad(kernel_samples.values, pad)
    return f.with_values(convolve_offsets(f.values, k, grid))


def middle_half_mask(grid: Grid) -> np.ndarray:
    """Points with every coordinate in ``(-L/2, L/2)``."""
    half = grid.extent / 2
    m = np.ones(grid.shape, dtype=bool)
    for c in grid.coords():
        m &= np.abs(c) < half
    return m


# ---------------------------------------------------------------------------
# test-function families

FAMILIES = ("gaussian", "bandlimited-random", "smoothed-indicator")


@dataclass(frozen=True)
class TestFamily:
    """A deterministic family of test functions confined to the middle half.

    Members are indexed ``0 .. count-1``.  ``gaussian`` members have widths
    ``width * 2^(i/count)`` and centers alternating around ``center``
    (``width`` defaults to a twelfth of ``L/2``);
    ``smoothed-indicator`` members are C-infinity plateaus of half-width
    ``width`` with edge ramps of length ``width / 4``; ``bandlimited-random``
    members draw standard normal coefficients for frequencies ``|xi| <= band``
    (angular) and are multiplied by a smooth window unless ``window`` is off.
    """

    __test__ = False  # not a pytest class

    family: str = "gaussian"
    count: int = 8
    center: float = 0.0
    width: float | None = None
    band: float = 4.0
    seed: int = 0
    window: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unsupported test family {self.family!r}")
        if self.count < 1:
            raise ValueError("count must be positive")


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def plateau(r: np.ndarray, radius: float, ramp: float) -> np.ndarray:
    """1 for r <= radius, 0 for r >= radius + ramp, smooth in between."""
    return 1.0 - smooth_step((np.asarray(r) - radius) / ramp)


def _radius(grid: Grid, center: float) -> np.ndarray:
    return np.sqrt(sum((c - center) ** 2 for c in grid.coords()))


def make_test_function(family: TestFamily, grid: Grid, index: int) -> SampledFunction:
    if not 0 <= index < family.count:
        raise ValueError(f"index {index} outside family of {family.count}")
    half = grid.extent / 2
    base = family.width if family.width is not None else half / 12
    if family.family == "gaussian":
        width = base * 2.0 ** (index / family.count)
        shift = (index // 2 + 1) * width / 8 * (-1) ** index if index else 0.0
        center = family.center + shift
        if abs(center) + 6 * width > half:
            raise ValueError("gaussian member leaves the middle half")
        r = _radius(grid, center)
        return SampledFunction(grid, np.exp(-r * r / (2 * width * width)))
    if family.family == "smoothed-indicator":
        radius = base * (1 + index / family.count)
        ramp = base / 4
        if abs(family.center) + radius + ramp > half:
            raise ValueError("indicator member leaves the middle half")
        return SampledFunction(grid, plateau(_radius(grid, family.center), radius, ramp))
    # bandlimited-random
    rng = np.random.default_rng([family.seed, index])
    g = grid.points
    freqs = 2 * np.pi * np.fft.fftfreq(g, d=grid.spacing)
    fgrid = np.meshgrid(*([freqs] * grid.dimension), indexing="ij")
    keep = np.sqrt(sum(w * w for w in fgrid)) <= family.band
    coeffs = np.zeros(grid.shape, dtype=complex)
    n = int(keep.sum())
    coeffs[keep] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    values = np.fft.ifftn(coeffs).real
    values /= max(np.abs(values).max(), 1e-300)
    if family.window:
        values = values * plateau(_radius(grid, family.center), 0.75 * half, 0.25 * half)
    return SampledFunction(grid, values)


# ---------------------------------------------------------------------------
# debugging dumps


def dump_csv(f: SampledFunction, path) -> None:
    """Write ``index, re, im`` rows in C order with a grid header comment."""
    with open(path, "w", newline="") as fh:
        g = f.grid
        fh.write(f"# dimension={g.dimension} extent={g.extent!r} points={g.points}\n")
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, v in enumerate(f.values.ravel()):
            w.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_csv(path) -> SampledFunction:
    with open(path, newline="") as fh:
        header = fh.readline().lstrip("# ").split()
        meta = dict(item.split("=") for item in header)
        grid = Grid(int(meta["dimension"]), float(meta["extent"]), int(meta["points"]))
        rows = list(csv.DictReader(fh))
    vals = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    return SampledFunction(grid, vals.reshape(grid.shape))


def dump_binary(f: SampledFunction, path) -> None:
    g = f.grid
    np.savez(path, dimension=g.dimension, extent=g.extent, points=g.points, values=f.values)


def load_binary(path) -> SampledFunction:
    with np.load(path) as data:
        grid = Grid(int(data["dimension"]), float(data["extent"]), int(data["points"]))
        return SampledFunction(grid, data["values"])
