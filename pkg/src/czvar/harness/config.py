"""JSON experiment configuration.

Schema (all keys optional; defaults are the :class:`ExperimentConfig` field defaults)::

    kernel          {"id": str, "params": {...}}
    grid            {"dimension": 1|2, "extent": L, "points": G}
    ladder          {"j_min": int|null, "j_max": int|null,
                     "partition": P, "partition_doubling": int}
    family          TestFamily fields (family, count, center, width, band, seed, window)
    lambda_density  log-spaced lambdas per decade in plot data
    q               list of exponents > 2, "inf" for infinity
    surface         {"pairs": [...], "s_count": int, "theta": float,
                     "modulus": modulus config, "max_iters": int, "tol": float}
    cancellation    {"centers": [[x, (y)], ...], "annuli": [[eps, N], ...]}
    control         null or {"points": G, "lambda": float, "depths": [m, ...],
                             "gamma": float}
    seed            master seed
    grid_doubling   number of grid refinements after the base grid
    tolerance       relative stability tolerance for the pass/fail criteria

``j_min``/``j_max`` default to the dyadic range resolved on the base grid,
which every refined grid also resolves.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

from ..grid import Grid, TestFamily
from ..kernels import Kernel, Modulus, kernel_from_config, modulus_from_config
from ..operators import resolved_dyadic_range

DESK_GRIDS = {1: {"extent": 16.0, "points": 4096}, 2: {"extent": 8.0, "points": 128}}


def _default_surface() -> dict:
    return {"pairs": ["sigmaQ", "Qsigma"], "s_count": 24, "theta": 0.5,
            "modulus": None, "max_iters": 200, "tol": 1e-4}


@dataclass
class ExperimentConfig:
    kernel: dict = field(default_factory=lambda: {"id": "hilbert", "params": {}})
    grid: dict = field(default_factory=lambda: {"dimension": 1, **DESK_GRIDS[1]})
    ladder: dict = field(default_factory=lambda: {"j_min": None, "j_max": None,
                                                  "partition": 4, "partition_doubling": 1})
    family: dict = field(default_factory=lambda: {"family": "gaussian", "count": 8})
    lambda_density: int = 16
    q: list = field(default_factory=lambda: [2.5, 3, "inf"])
    surface: dict = field(default_factory=_default_surface)
    cancellation: dict = field(default_factory=dict)
    control: dict | None = None
    seed: int = 0
    grid_doubling: int = 1
    tolerance: float = 0.10

    # -- construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = copy.deepcopy(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        if "grid" in data:
            dim = int(data["grid"].get("dimension", 1))
            data["grid"] = {"dimension": dim, **DESK_GRIDS[dim], **data["grid"]}
        for key, value in data.items():
            current = getattr(cfg, key)
            if key != "grid" and isinstance(current, dict) and isinstance(value, dict):
                value = {**current, **value}
            setattr(cfg, key, value)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    # -- derived objects ----------------------------------------------------

    def base_grid(self) -> Grid:
        g = self.grid
        return Grid(int(g["dimension"]), float(g["extent"]), int(g["points"]))

    def grids(self) -> list[Grid]:
        base = self.base_grid()
        return [Grid(base.dimension, base.extent, base.points * 2 ** k)
                for k in range(int(self.grid_doubling) + 1)]

    def make_kernel(self) -> Kernel:
        return kernel_from_config(self.kernel)

    def test_family(self) -> TestFamily:
        fam = dict(self.family)
        fam.setdefault("seed", self.seed)
        return TestFamily(**fam)

    def dyadic_range(self) -> tuple[int, int]:
        lo, hi = resolved_dyadic_range(self.base_grid())
        jl = self.ladder.get("j_min")
        jh = self.ladder.get("j_max")
        return (lo if jl is None else int(jl)), (hi if jh is None else int(jh))

    def partitions(self) -> list[int]:
        p = int(self.ladder.get("partition", 4))
        return [p * 2 ** k for k in range(int(self.ladder.get("partition_doubling", 0)) + 1)]

    def exponents(self) -> list[float]:
        return [math.inf if str(q).lower() in ("inf", "infinity") else float(q) for q in self.q]

    def surface_modulus(self, kernel: Kernel) -> Modulus:
        entry = self.surface.get("modulus")
        return kernel.modulus if entry is None else modulus_from_config(entry)

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        base = self.base_grid()
        kernel = self.make_kernel()
        if kernel.dimension != base.dimension:
            raise ValueError("kernel and grid dimensions differ")
        lo, hi = resolved_dyadic_range(base)
        jl, jh = self.dyadic_range()
        if jl < lo or jh > hi or jl > jh:
            raise ValueError(f"ladder [{jl}, {jh}] outside the resolved range [{lo}, {hi}]")
        if any(p < 1 for p in self.partitions()):
            raise ValueError("partition count must be positive")
        if int(self.grid_doubling) < 0:
            raise ValueError("grid_doubling must be nonnegative")
        for q in self.exponents():
            if not q > 2:
                raise ValueError(f"variation exponent {q} outside (2, inf]")
        self.test_family()
