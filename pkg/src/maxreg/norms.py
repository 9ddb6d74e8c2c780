"""Unconditional norms and their discrete balls.

A ball of radius ``r`` on a grid with spacing ``h`` is stored as the list of
integer index offsets ``o`` with ``mu(o * h) <= r``.  Membership is decided in
index units (``mu(o) <= r / h``) and, whenever the radius is a whole number of
cells and ``p`` is an integer, in exact integer arithmetic, so stencils are
exactly symmetric under sign flips and axis permutations.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .grid import Grid

_SNAP = 1e-9


@dataclass(frozen=True)
class NormSpec:
    """``kind`` is ``"lp"`` (with ``p``), ``"linf"`` or ``"rect"`` (with ``weights``).

    ``rect`` with weights ``w`` is ``mu(x) = max_i |x_i| / w_i``.
    """

    kind: str
    p: float | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "lp":
            if self.p is None or not self.p >= 1:
                raise ValueError(f"lp norm needs p >= 1, got {self.p}")
            if math.isinf(self.p):
                object.__setattr__(self, "kind", "linf")
                object.__setattr__(self, "p", None)
        elif self.kind == "rect":
            if not self.weights or any(not w > 0 for w in self.weights):
                raise ValueError(f"rect norm needs positive weights, got {self.weights}")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        elif self.kind != "linf":
            raise ValueError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def lp(cls, p: float) -> NormSpec:
        return cls("lp", p=float(p))

    @classmethod
    def linf(cls) -> NormSpec:
        return cls("linf")

    @classmethod
    def rect(cls, weights: Sequence[float]) -> NormSpec:
        return cls("rect", weights=tuple(weights))

    @property
    def is_box(self) -> bool:
        """Balls are axis-aligned boxes (one clamp candidate per radius)."""
        return self.kind in ("linf", "rect")

    @property
    def permutation_symmetric(self) -> bool:
        if self.kind == "rect":
            return len(set(self.weights)) == 1
        return True

    def weights_for(self, dim: int) -> tuple[float, ...]:
        if self.kind != "rect":
            return (1.0,) * dim
        if len(self.weights) != dim:
            raise ValueError(
                f"rect norm has {len(self.weights)} weights but the grid has {dim} axes"
            )
        return self.weights

    @property
    def label(self) -> str:
        if self.kind == "linf":
            return "linf"
        if self.kind == "rect":
            return "rect:" + ",".join(f"{w:g}" for w in self.weights)
        if float(self.p).is_integer():
            return f"l{int(self.p)}"
        return f"lp:{self.p:g}"

    def __str__(self) -> str:
        return self.label


def parse_norm(text: str) -> NormSpec:
    """Parse ``linf``, ``l1``, ``l2``, ``lp:<p>`` or ``rect:<w1,w2,...>``."""
    t = text.strip().lower()
    if t in ("linf", "l_inf", "inf", "max"):
        return NormSpec.linf()
    if t.startswith("lp:"):
        return NormSpec.lp(float(t[3:]))
    if t.startswith("rect:"):
        return NormSpec.rect([float(w) for w in t[5:].split(",")])
    if t.startswith("l") and t[1:].replace(".", "", 1).isdigit():
        return NormSpec.lp(float(t[1:]))
    raise ValueError(f"cannot parse norm {text!r}")


def mu(norm: NormSpec, x) -> np.ndarray | float:
    """Norm of ``x`` (vectorized over leading axes; the last axis is the vector)."""
    a = np.abs(np.asarray(x, dtype=float))
    if a.ndim == 0:
        raise ValueError("mu expects a vector")
    d = a.shape[-1]
    if norm.kind == "linf":
        out = a.max(axis=-1)
    elif norm.kind == "rect":
        w = np.asarray(norm.weights)
        if w.size != d:
            raise ValueError(f"dimension mismatch: norm has {w.size} weights, x has {d}")
        out = (a / w).max(axis=-1)
    else:
        p = norm.p
        # sort so permuted inputs sum in the same order
        a = np.sort(a, axis=-1)
        out = (a ** p).sum(axis=-1) ** (1.0 / p)
    return float(out) if np.ndim(out) == 0 else out


def l2_comparison_constant(norm: NormSpec, dim: int) -> float:
    """Smallest ``c`` with ``mu(w) <= c * ||w||_2`` for all ``w``."""
    if norm.kind == "linf":
        return 1.0
    if norm.kind == "rect":
        return 1.0 / min(norm.weights_for(dim))
    p = norm.p
    return float(dim ** max(0.0, 1.0 / p - 0.5))


def unit_ball_volume(norm: NormSpec, dim: int) -> float:
    if norm.kind == "linf":
        return 2.0 ** dim
    if norm.kind == "rect":
        return 2.0 ** dim * float(np.prod(norm.weights_for(dim)))
    p = norm.p
    return (2 * math.gamma(1 + 1 / p)) ** dim / math.gamma(1 + dim / p)


def _index_radius(radius: float, spacing: float) -> tuple[float, int | None]:
    """Radius in cell units, plus its integer value when it is a whole number."""
    k = radius / spacing
    kr = round(k)
    if abs(k - kr) <= _SNAP * max(1.0, k):
        return float(kr), int(kr)
    return k, None


def _axis_bounds(norm: NormSpec, k: float, dim: int) -> np.ndarray:
    w = np.asarray(norm.weights_for(dim))
    return np.floor(k * w + _SNAP).astype(np.int64)


def _member_mask(norm: NormSpec, k: float, k_int: int | None, offsets: np.ndarray) -> np.ndarray:
    """Boolean mask of offsets (rows, index units) inside the radius-``k`` ball."""
    dim = offsets.shape[1]
    a = np.abs(offsets)
    if norm.is_box:
        return np.all(a <= _axis_bounds(norm, k, dim), axis=1)
    p = norm.p
    if k_int is not None and float(p).is_integer() and k_int ** int(p) < 2 ** 62 // dim:
        pi = int(p)
        return (a ** pi).sum(axis=1) <= k_int ** pi
    af = np.sort(a.astype(float), axis=1)
    return (af ** p).sum(axis=1) <= (k ** p) * (1 + 1e-12)


@dataclass(frozen=True, eq=False)
class BallStencil:
    """Discrete ball ``{o : mu(o * h) <= radius}`` in index offsets.

    ``bounds`` holds the per-axis reach of the bounding box.  Dense data
    (mask, offsets) is built lazily: box-shaped balls never need it on the
    fast paths, and large radii would otherwise hold millions of offsets.
    """

    norm: NormSpec
    radius: float
    spacing: float
    bounds: np.ndarray
    k: float
    k_int: int | None = None

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @cached_property
    def mask(self) -> np.ndarray:
        """Dense boolean footprint of shape ``2 * extent + 1``."""
        if self.norm.is_box:
            return np.ones(tuple(2 * self.bounds + 1), dtype=bool)
        axes = [np.arange(-b, b + 1) for b in self.bounds]
        cand = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        inside = _member_mask(self.norm, self.k, self.k_int, cand)
        return inside.reshape(tuple(2 * self.bounds + 1))

    @cached_property
    def offsets(self) -> np.ndarray:
        """Member offsets in lexicographic order."""
        return (np.argwhere(self.mask) - self.extent).astype(np.int64)

    @cached_property
    def cell_count(self) -> int:
        if self.norm.is_box:
            return int(np.prod(2 * self.bounds + 1))
        return int(self.mask.sum())

    @property
    def extent(self) -> np.ndarray:
        """Largest ``|o_i|`` per axis (the axis points of the ball are members)."""
        return self.bounds

    @cached_property
    def columns(self) -> list[tuple[tuple[int, ...], int]]:
        """Decomposition into lines along the last axis: ``(leading offset, half length)``.

        Sections of an unconditional ball are symmetric intervals, so each
        line is ``{(o_hat, t) : |t| <= T}``.
        """
        lengths = self.mask.sum(axis=-1)
        lead = np.argwhere(lengths > 0)
        half = (lengths[tuple(lead.T)] - 1) // 2
        lead = lead - self.extent[:-1]
        return [(tuple(int(v) for v in k), int(t)) for k, t in zip(lead, half)]

    @cached_property
    def frontier(self) -> np.ndarray:
        """Maximal elements of the non-negative offsets under the coordinate order.

        Clamping ``max(0, x - o)`` over these offsets gives every center that
        can be optimal for a block-decreasing function.
        """
        if self.norm.is_box:
            return self.extent[None, :].astype(np.int64)
        e = self.extent
        quad = self.mask[tuple(slice(int(b), None) for b in e)]
        padded = np.pad(quad, [(0, 1)] * self.dim)
        pos = np.argwhere(quad)
        keep = np.ones(len(pos), dtype=bool)
        for i in range(self.dim):
            up = pos.copy()
            up[:, i] += 1
            keep &= ~padded[tuple(up.T)]
            inner = pos[pos[:, i] > 0]
            down = inner.copy()
            down[:, i] -= 1
            if len(down) and not quad[tuple(down.T)].all():
                raise ValueError(f"stencil of {self.norm} is not a down-set")
        return pos[keep].astype(np.int64)

    def to_csv_rows(self) -> list[str]:
        return [",".join(str(int(v)) for v in o) for o in self.offsets]


def max_feasible_radius(norm: NormSpec, grid: Grid) -> float:
    """Largest radius whose stencil still fits inside the grid diameter."""
    w = norm.weights_for(grid.dim)
    return min((c - 1) * grid.spacing / wi for c, wi in zip(grid.counts, w))


def stencil(norm: NormSpec, radius: float, grid: Grid) -> BallStencil:
    return _stencil(norm, float(radius), grid)


@lru_cache(maxsize=4096)
def _stencil(norm: NormSpec, radius: float, grid: Grid) -> BallStencil:
    h = grid.spacing
    if not radius >= h * (1 - _SNAP):
        raise ValueError(f"radius {radius} is below the grid spacing {h}")
    k, k_int = _index_radius(radius, h)
    bounds = _axis_bounds(norm, k, grid.dim)
    if np.any(bounds > np.array(grid.counts) - 1):
        raise ValueError(
            f"radius {radius} gives a stencil wider than the grid; "
            f"max feasible radius is {max_feasible_radius(norm, grid):g}"
        )
    return BallStencil(norm, float(radius), h, bounds.astype(np.int64), k, k_int)


def radius_ladder(grid: Grid, cap: float | None = None) -> list[float]:
    """Radii ``h, 2h, ...`` up to ``min(cap, max half extent)``."""
    h = grid.spacing
    top = max(grid.effective_half_extent)
    if cap is not None:
        if cap < h * (1 - _SNAP):
            raise ValueError(f"radius cap {cap} is below the grid spacing {h}")
        top = min(top, cap)
    n = int(math.floor(top / h + _SNAP))
    return [j * h for j in range(1, n + 1)]
