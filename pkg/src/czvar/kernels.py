"""Calderon-Zygmund kernels, moduli of continuity and kernel certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid

# ---------------------------------------------------------------------------
# moduli of continuity


class Modulus:
    """Nondecreasing ``omega: [0, inf) -> [0, inf)`` with ``omega(0) = 0``.

    Subclasses implement :meth:`_eval` on positive ``t``; ``__call__`` takes
    care of ``t = 0`` and array handling.
    """

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        pos = t > 0
        out = np.zeros_like(t)
        if np.any(pos):
            out[pos] = self._eval(t[pos])
        return out if out.ndim else float(out)

    def _eval(self, t):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def __add__(self, other):
        return SumModulus(self, other)

    def __mul__(self, c):
        return ScaledModulus(self, float(c))

    __rmul__ = __mul__

    def root(self, r: float):
        return PowerOfModulus(self, r)


@dataclass(frozen=True)
class PowerModulus(Modulus):
    """``t^theta`` (Holder / Lipschitz type)."""

    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")

    def _eval(self, t):
        return t ** self.theta

    def describe(self):
        return {"id": "power", "theta": self.theta}


@dataclass(frozen=True)
class LogPowerModulus(Modulus):
    """``((1 + a) / (1 + a + log(1/t)))^beta`` for ``t <= 1``, 1 beyond.

    With ``shift a = 0`` this is ``(1 + log(1/t))^-beta``.  A shift
    ``a >= beta`` makes the function concave on ``(0, 1]``, hence
    sub-additive; ``a = 0`` is not sub-additive near ``t = 1`` for large
    ``beta``.
    """

    beta: float
    shift: float = 0.0

    def _eval(self, t):
        a = self.shift
        small = t < 1
        out = np.ones_like(t)
        out[small] = ((1 + a) / (1 + a + np.log(1 / t[small]))) ** self.beta
        return out

    def describe(self):
        return {"id": "log-power", "beta": self.beta, "shift": self.shift}


@dataclass(frozen=True)
class SumModulus(Modulus):
    first: Modulus
    second: Modulus

    def _eval(self, t):
        return self.first(t) + self.second(t)

    def describe(self):
        return {"id": "sum", "terms": [self.first.describe(), self.second.describe()]}


@dataclass(frozen=True)
class ScaledModulus(Modulus):
    inner: Modulus
    factor: float

    def _eval(self, t):
        return self.factor * self.inner(t)

    def describe(self):
        return {"id": "scaled", "factor": self.factor, "inner": self.inner.describe()}


@dataclass(frozen=True)
class PowerOfModulus(Modulus):
    """``omega(t)^r``."""

    inner: Modulus
    exponent: float

    def _eval(self, t):
        return self.inner(t) ** self.exponent

    def describe(self):
        return {"id": "power-of", "exponent": self.exponent, "inner": self.inner.describe()}


@dataclass(frozen=True)
class CompositionModulus(Modulus):
    """``outer(inner(t))``."""

    outer: Modulus
    inner: Modulus

    def _eval(self, t):
        return self.outer(self.inner(t))

    def describe(self):
        return {"id": "composition", "outer": self.outer.describe(),
                "inner": self.inner.describe()}


def omega1(omega: Modulus, theta: float = 0.5) -> Modulus:
    """``omega(t) + t^theta``; the envelope modulus for dyadic pieces."""
    return SumModulus(omega, PowerModulus(theta))


def modulus_from_config(cfg: dict) -> Modulus:
    kind = cfg["id"]
    if kind == "power":
        return PowerModulus(float(cfg["theta"]))
    if kind == "log-power":
        return LogPowerModulus(float(cfg["beta"]), float(cfg.get("shift", 0.0)))
    if kind == "sum":
        a, b = cfg["terms"]
        return SumModulus(modulus_from_config(a), modulus_from_config(b))
    if kind == "scaled":
        return ScaledModulus(modulus_from_config(cfg["inner"]), float(cfg["factor"]))
    if kind == "power-of":
        return PowerOfModulus(modulus_from_config(cfg["inner"]), float(cfg["exponent"]))
    if kind == "composition":
        return CompositionModulus(modulus_from_config(cfg["outer"]),
                                  modulus_from_config(cfg["inner"]))
    raise ValueError(f"unknown modulus id {kind!r}")


def is_nondecreasing(omega: Modulus, levels: int = 60) -> bool:
    t = 2.0 ** -np.arange(levels, -8, -1, dtype=float)
    return bool(np.all(np.diff(omega(t)) >= 0))


def subadditivity_violations(omega: Modulus, samples: int = 2000, seed: int = 0) -> int:
    """Count sampled triples with ``u <= t + s`` but ``omega(u) > omega(t) + omega(s)``."""
    rng = np.random.default_rng(seed)
    t = 10.0 ** rng.uniform(-8, 1, samples)
    s = 10.0 ** rng.uniform(-8, 1, samples)
    u = (t + s) * rng.uniform(0, 1, samples) ** 0.25
    lhs, rhs = omega(u), omega(t) + omega(s)
    return int(np.sum(lhs > rhs * (1 + 1e-12)))


DINI_FLOOR = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def dini_norm(omega: Modulus, r: float = 1.0) -> float:
    """``int_0^1 omega(t)^r dt / t``, or ``math.inf`` when divergent.

    With ``u = log(1/t)`` the integral becomes ``int_0^inf omega(e^-u)^r du``.
    It is integrated by Gauss-Legendre on dyadic ``u``-segments ending at
    ``t = 1e-12``.  Contributions of dyadic segments of a convergent integrand
    shrink geometrically; the tail beyond the floor is the geometric
    continuation of the last two segments, and a ratio of 0.95 or more is
    reported as divergence.
    """
    if not 0 < r <= 1:
        raise ValueError("root r must lie in (0, 1]")
    u_max = math.log(1 / DINI_FLOOR)
    edges = np.concatenate([[0.0], u_max * 2.0 ** -np.arange(40, -1, -1)])
    parts = []
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
        vals = np.asarray(omega(np.exp(-u)), dtype=float) ** r
        parts.append(0.5 * (b - a) * float(np.dot(_GL_WEIGHTS, vals)))
    total = math.fsum(parts)
    last, prev = parts[-1], parts[-2]
    if last == 0:
        return total
    if prev <= 0:
        return math.inf
    ratio = last / prev
    if ratio >= 0.95:
        return math.inf
    return total + last * ratio / (1 - ratio)


# ---------------------------------------------------------------------------
# kernels

Components = tuple  # tuple of coordinate arrays, one per axis

REPRESENTATIONS = ("convolution", "separable", "separable-right", "general")


@dataclass(frozen=True)
class Kernel:
    """A kernel ``K(x, y)`` off the diagonal with its declared constants.

    ``representation`` selects the fast path used by the operators:

    * ``convolution``: ``K(x, y) = profile(x - y)``;
    * ``separable``: ``K(x, y) = sum_i coef_i(x) profile_i(x - y)``;
    * ``separable-right``: ``K(x, y) = sum_i coef_i(y) profile_i(x - y)``;
    * ``general``: only ``pointwise(x, y)`` is available.

    Callables take tuples of coordinate arrays (one array per axis).
    """

    name: str
    dimension: int
    size_constant: float
    modulus: Modulus
    cancellation: str
    representation: str
    profile: Callable | None = None
    terms: tuple = ()
    pointwise: Callable | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.cancellation not in ("analytic", "numeric", "violated"):
            raise ValueError(f"unknown cancellation flag {self.cancellation!r}")

    def __hash__(self):
        return hash((self.name, self.dimension, tuple(sorted(self.params.items()))))

    def eval_components(self, x: Components, y: Components) -> np.ndarray:
        u = tuple(a - b for a, b in zip(x, y))
        rep = self.representation
        with np.errstate(divide="ignore", invalid="ignore"):
            if rep == "convolution":
                out = self.profile(u)
            elif rep == "separable":
                out = sum(c(x) * p(u) for c, p in self.terms)
            elif rep == "separable-right":
                out = sum(c(y) * p(u) for c, p in self.terms)
            else:
                out = self.pointwise(x, y)
        return np.asarray(out, dtype=complex)

    def evaluate(self, x, y) -> np.ndarray:
        """``K(x, y)`` for points given as arrays of shape ``(..., n)`` (or ``(...)`` if n=1)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.dimension == 1:
            return self.eval_components((x,), (y,))
        return self.eval_components(tuple(x[..., i] for i in range(self.dimension)),
                                    tuple(y[..., i] for i in range(self.dimension)))

    def adjoint(self) -> "Kernel":
        """Kernel of the L2 adjoint, ``conj(K(y, x))``."""
        flip = _reflect
        rep = self.representation
        if rep == "convolution":
            prof = self.profile
            return _replace(self, profile=lambda u: np.conj(prof(flip(u))))
        if rep in ("separable", "separable-right"):
            terms = tuple((_conj_fn(c), _conj_reflect_fn(p)) for c, p in self.terms)
            other = "separable-right" if rep == "separable" else "separable"
            return _replace(self, representation=other, terms=terms)
        pw = self.pointwise
        return _replace(self, pointwise=lambda x, y: np.conj(pw(y, x)))


def _reflect(u: Components) -> Components:
    return tuple(-a for a in u)


def _conj_fn(fn):
    return lambda x: np.conj(fn(x))


def _conj_reflect_fn(fn):
    return lambda u: np.conj(fn(_reflect(u)))


def _replace(k: Kernel, **changes) -> Kernel:
    fields = {f: getattr(k, f) for f in k.__dataclass_fields__}
    fields.update(changes)
    fields["name"] = k.name + "*" if not k.name.endswith("*") else k.name[:-1]
    return Kernel(**fields)


def _radius(u: Components) -> np.ndarray:
    return np.sqrt(sum(a * a for a in u))


def hilbert() -> Kernel:
    """``1 / (x - y)`` on the line."""
    return Kernel("hilbert", 1, 1.0, PowerModulus(1.0), "analytic", "convolution",
                  profile=lambda u: 1.0 / u[0])


def zero_kernel(dimension: int = 1) -> Kernel:
    return Kernel("zero", dimension, 0.0, PowerModulus(1.0), "analytic", "convolution",
                  profile=lambda u: np.zeros_like(u[0]))


def complex_power(gamma: float = 2.0) -> Kernel:
    """``|x - y|^(-1 - i gamma)``: size and smoothness hold, cancellation fails."""
    def profile(u):
        r = np.abs(u[0])
        return np.exp(-1j * gamma * np.log(r)) / r

    return Kernel("complex_power", 1, 1.0, PowerModulus(1.0), "violated", "convolution",
                  profile=profile, params={"gamma": gamma})


def odd_dini(beta: float = 3.0, terms: int = 24) -> Kernel:
    """Odd kernel ``sgn(u) m(|u|) / |u|`` with a Dini-but-not-Holder profile.

    ``m(r) = 1 + c sum_k k^-(beta+1) cos(2^k log r)`` is a lacunary series in
    ``log r`` whose modulus of continuity is of order ``log(1/t)^-beta``;
    ``c`` keeps ``m`` within ``[1/2, 3/2]``.
    """
    k = np.arange(1, terms + 1, dtype=float)
    amp = k ** -(beta + 1)
    c = 0.5 / amp.sum()
    freq = 2.0 ** k

    def profile(u):
        r = np.abs(u[0])
        lr = np.log(r)
        m = 1 + c * np.cos(np.multiply.outer(lr, freq)) @ amp
        return np.sign(u[0]) * m / r

    return Kernel("odd_dini", 1, 1.5, LogPowerModulus(beta, beta), "analytic", "convolution",
                  profile=profile, params={"beta": beta, "terms": terms})


def perp_gradient(sigma: float = 2.0) -> Kernel:
    """``grad rho(x) . (x - y)^perp / |x - y|^3`` in the plane.

    ``rho(x) = sin x1 cos x2 exp(-|x|^2 / (2 sigma^2))``.  Both annulus
    integrals vanish: in ``y`` because ``u^perp / |u|^3`` is odd, in ``x``
    because ``grad rho(y + r e) . e^perp`` is ``r^-1`` times the angular
    derivative of ``rho`` on the circle of radius ``r`` around ``y``.
    """
    s2 = sigma * sigma

    def envelope(x):
        return np.exp(-(x[0] ** 2 + x[1] ** 2) / (2 * s2))

    def d1(x):
        s = np.sin(x[0]) * np.cos(x[1])
        return (np.cos(x[0]) * np.cos(x[1]) - s * x[0] / s2) * envelope(x)

    def d2(x):
        s = np.sin(x[0]) * np.cos(x[1])
        return (-np.sin(x[0]) * np.sin(x[1]) - s * x[1] / s2) * envelope(x)

    def k1(u):
        return -u[1] / _radius(u) ** 3

    def k2(u):
        return u[0] / _radius(u) ** 3

    def rho(x):
        return np.sin(x[0]) * np.cos(x[1]) * envelope(x)

    size = 1.0 + 1.0 / (sigma * math.sqrt(math.e))
    kern = Kernel("perp_gradient", 2, size, PowerModulus(1.0), "analytic", "separable",
                  terms=((d1, k1), (d2, k2)), params={"sigma": sigma})
    object.__setattr__(kern, "potential", rho)
    return kern


FIXTURES = {
    "hilbert": hilbert,
    "complex_power": complex_power,
    "odd_dini": odd_dini,
    "perp_gradient": perp_gradient,
    "zero": zero_kernel,
}


def kernel_from_config(cfg: dict) -> Kernel:
    kind = cfg["id"]
    if kind not in FIXTURES:
        raise ValueError(f"unknown kernel id {kind!r}")
    return FIXTURES[kind](**cfg.get("params", {}))


# ---------------------------------------------------------------------------
# certificates


def _sample_points(rng, n, dimension, extent):
    return rng.uniform(-extent, extent, size=(n, dimension))


def size_bound_check(k: Kernel, samples: int = 10_000, seed: int = 0,
                     extent: float = 8.0) -> tuple[int, float]:
    """Sample pairs and count violations of ``|K| <= C_K / |x - y|^n``.

    Returns ``(violations, max |K| |x - y|^n)``.  A relative slack of
    ``1e-12`` absorbs rounding in kernels that attain the bound exactly.
    """
    rng = np.random.default_rng(seed)
    x = _sample_points(rng, samples, k.dimension, extent)
    y = _sample_points(rng, samples, k.dimension, extent)
    xc = tuple(x[:, i] for i in range(k.dimension))
    yc = tuple(y[:, i] for i in range(k.dimension))
    dist = _radius(tuple(a - b for a, b in zip(xc, yc)))
    mag = np.abs(k.eval_components(xc, yc))
    bound = k.size_constant / dist ** k.dimension * (1 + 1e-12)
    return int(np.sum(mag > bound)), float(np.max(mag * dist ** k.dimension))


def smoothness_constant_probe(k: Kernel, samples: int = 10_000, seed: int = 0,
                              extent: float = 8.0, modulus: Modulus | None = None) -> float:
    """Largest sampled ``(|dK_x| + |dK_y|) |x - y|^n / omega(|h| / |x - y|)``.

    Pairs are drawn in ``[-extent, extent]^n`` with a perturbation ``h`` of
    log-uniform length in ``[1e-6, 1/2] |x - y|``.  A value that settles as
    ``samples`` grows certifies the modulus empirically.
    """
    omega = modulus if modulus is not None else k.modulus
    rng = np.random.default_rng(seed)
    n = k.dimension
    x = _sample_points(rng, samples, n, extent)
    y = _sample_points(rng, samples, n, extent)
    dist = np.linalg.norm(x - y, axis=1)
    frac = 10.0 ** rng.uniform(-6, math.log10(0.5), samples)
    direction = rng.standard_normal((samples, n))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    h = direction * (frac * dist)[:, None]

    def ev(a, b):
        return k.eval_components(tuple(a[:, i] for i in range(n)),
                                 tuple(b[:, i] for i in range(n)))

    base = ev(x, y)
    delta = np.abs(ev(x + h, y) - base) + np.abs(ev(x, y + h) - base)
    w = np.asarray(omega(frac))
    ratio = np.where(w > 0, delta * dist ** n / np.where(w > 0, w, 1.0), 0.0)
    return float(ratio.max())


def cancellation_residual(k: Kernel, grid: Grid, center, eps: float, outer: float,
                          orientation: str = "y") -> complex:
    """Midpoint quadrature of the kernel over ``eps <= |x - y| <= outer``.

    Orientation ``"y"`` integrates ``K(center, y) dy``; ``"x"`` integrates
    ``K(x, center) dx``.  Grid points are included when their position lies
    in the closed annulus.  ``center`` need not be a grid point.
    """
    h = grid.spacing
    if eps < 2 * h * (1 - 1e-12):
        raise ValueError(f"eps={eps} below the resolved scale 2h={2 * h}")
    if not eps < outer:
        raise ValueError("need eps < outer")
    if outer > grid.extent / 2 * (1 + 1e-12):
        raise ValueError("outer radius beyond L/2")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size != k.dimension:
        raise ValueError("center has the wrong dimension")
    if np.any(np.abs(c) + outer > grid.extent - h):
        raise ValueError("annulus leaves the grid")
    pts = grid.coords()
    # restrict to the bounding box of the annulus
    sl = []
    for i in range(k.dimension):
        lo = int(math.floor((c[i] - outer + grid.extent) / h)) - 1
        hi = int(math.ceil((c[i] + outer + grid.extent) / h)) + 2
        sl.append(slice(max(lo, 0), min(hi, grid.points)))
    sl = tuple(sl)
    pts = tuple(p[sl] for p in pts)
    dist = _radius(tuple(p - ci for p, ci in zip(pts, c)))
    mask = (dist >= eps) & (dist <= outer)
    inside = tuple(p[mask] for p in pts)
    cen = tuple(np.full(inside[0].shape, ci) for ci in c)
    if orientation == "y":
        vals = k.eval_components(cen, inside)
    elif orientation == "x":
        vals = k.eval_components(inside, cen)
    else:
        raise ValueError("orientation must be 'x' or 'y'")
    # sum in |distance| order so symmetric partners meet early
    order = np.argsort(dist[mask], kind="stable")
    return complex(grid.cell * np.sum(vals[order]))


def complex_power_annulus_integral(gamma: float, eps: float, outer: float) -> complex:
    """Closed form of ``int_{eps <= |u| <= outer} |u|^(-1 - i gamma) du`` on the line."""
    return 2 * (outer ** (-1j * gamma) - eps ** (-1j * gamma)) / (-1j * gamma)
