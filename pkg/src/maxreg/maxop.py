"""Discrete uncentered, centered and local maximal functions.

Ball centers are grid nodes and radii run over the ladder ``h, 2h, ...``.
For every radius the ball-average field ``A_r(c)`` is computed once (exact
integer sums, see :mod:`maxreg.exact`), and the maximal value at a node ``x``
is ``max_r max_{c : x in B(c, r)} A_r(c)``.

``maximal_brute`` scans every admissible center.  ``maximal_bd_pruned``
exploits block-decreasing inputs: ``A_r`` is then block decreasing in the
center, the best center for a node in the positive cone lies in the box
``[0, x]``, and among those only the clamps ``max(0, x - o)`` over the
stencil's frontier offsets ``o`` can win.  For boxes (linf, rect) that is a
single candidate per radius.  Other cones follow by reflection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exact import IntegerImage
from .grid import EXTENSIONS, Grid, GridFunction
from .norms import BallStencil, NormSpec, max_feasible_radius, radius_ladder, stencil


class NotBlockDecreasingError(ValueError):
    """The pruned search was given an input that is not block decreasing."""


class ExtensionMismatchError(ValueError):
    """Two modules were asked to use different out-of-domain rules."""


@dataclass(frozen=True)
class MaxRecord:
    node: tuple[int, ...]
    value: float
    witness_center: tuple[int, ...]
    witness_radius: float


@dataclass(frozen=True, eq=False)
class MaxField:
    """Maximal values plus the ball (center index, radius) that attains each one."""

    grid: Grid
    values: np.ndarray
    centers: np.ndarray  # shape counts + (dim,), absolute node indices
    radii: np.ndarray
    norm: NormSpec
    radius_cap: float | None
    extension: str
    method: str

    def record(self, node) -> MaxRecord:
        node = tuple(int(i) for i in node)
        return MaxRecord(
            node,
            float(self.values[node]),
            tuple(int(c) for c in self.centers[node]),
            float(self.radii[node]),
        )

    def records(self) -> Iterator[MaxRecord]:
        for node in np.ndindex(*self.grid.counts):
            yield self.record(node)

    def as_grid_function(self) -> GridFunction:
        vals = self.values
        ceiling = float(vals.max()) if vals.size and vals.max() > 0 else 1.0
        return GridFunction(self.grid, vals, ceiling, self.extension)

    def witness_rows(self) -> Iterator[tuple]:
        """``(node_index, center_index, radius, value)`` with flat row-major indices."""
        shape = self.grid.counts
        for node in np.ndindex(*shape):
            flat = int(np.ravel_multi_index(node, shape))
            cflat = int(np.ravel_multi_index(tuple(self.centers[node]), shape))
            yield flat, cflat, float(self.radii[node]), float(self.values[node])

    def write_witness_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("node_index,center_index,radius,value\n")
            for row in self.witness_rows():
                fh.write(f"{row[0]},{row[1]},{row[2]!r},{row[3]!r}\n")


def resolve_extension(f: GridFunction, extension: str | None = "auto") -> str:
    """Pick the out-of-domain rule: constant for block-decreasing inputs, else zero."""
    if extension in (None, "auto"):
        if f.extension is not None:
            return f.extension
        from .bdgen import is_block_decreasing

        return "constant" if is_block_decreasing(f) else "zero"
    if extension not in EXTENSIONS:
        raise ValueError(f"unknown extension rule {extension!r}")
    if f.extension is not None and f.extension != extension:
        raise ExtensionMismatchError(
            f"function carries extension {f.extension!r}, caller asked for {extension!r}"
        )
    return extension


def _pad(values: np.ndarray, widths, extension: str) -> np.ndarray:
    pad = [(int(w), int(w)) for w in widths]
    if extension == "constant":
        return np.pad(values, pad, mode="edge")
    return np.pad(values, pad, mode="constant")


def _ladder(grid: Grid, norm: NormSpec, radius_cap: float | None) -> list[BallStencil]:
    cap = max_feasible_radius(norm, grid)
    if radius_cap is not None:
        cap = min(cap, radius_cap)
    return [stencil(norm, r, grid) for r in radius_ladder(grid, cap)]


class _Averager:
    """Ball averages of a padded function, centers given in grid indices."""

    def __init__(self, f: GridFunction, stencils: list[BallStencil], extension: str):
        self.pad = np.max([st.extent for st in stencils], axis=0)
        self.image = IntegerImage(_pad(f.values, self.pad, extension))

    def averages(self, st: BallStencil, lo, hi) -> np.ndarray:
        plo = np.asarray(lo) + self.pad
        phi = np.asarray(hi) + self.pad
        sums = self.image.ball_sums(st, plo, phi)
        return self.image.to_average(sums, st.cell_count)


def ball_average(
    f: GridFunction, center, st: BallStencil, extension: str | None = "auto"
) -> float:
    """Plain mean of ``f`` over the stencil at ``center`` (reference implementation)."""
    ext = resolve_extension(f, extension)
    counts = np.array(f.grid.counts)
    idx = np.asarray(center) + st.offsets
    inside = np.all((idx >= 0) & (idx < counts), axis=1)
    if ext == "constant":
        idx = np.clip(idx, 0, counts - 1)
        vals = f.values[tuple(idx.T)]
    else:
        vals = np.zeros(len(idx))
        vals[inside] = f.values[tuple(idx[inside].T)]
    return math.fsum(vals.tolist()) / st.cell_count


def maximal_brute(
    f: GridFunction,
    norm: NormSpec,
    radius_cap: float | None = None,
    extension: str | None = "auto",
) -> MaxField:
    """Uncentered (or, with ``radius_cap``, local) maximal function by full center scan.

    Ties go to the smallest radius, then the lexicographically smallest center.
    """
    grid = f.grid
    ext = resolve_extension(f, extension)
    stencils = _ladder(grid, norm, radius_cap)
    av = _Averager(f, stencils, ext)
    counts = grid.counts
    best = np.full(counts, -np.inf)
    best_off = np.zeros(counts + (grid.dim,), dtype=np.int64)
    best_r = np.zeros(counts)
    for st in stencils:
        a = av.averages(st, [0] * grid.dim, counts)
        e = st.extent
        ap = np.pad(a, [(int(w), int(w)) for w in e], constant_values=-np.inf)
        # descending offsets visit centers x - o in ascending order
        for o in st.offsets[::-1]:
            cand = ap[tuple(slice(int(w - oi), int(w - oi) + n) for w, oi, n in zip(e, o, counts))]
            upd = cand > best
            if upd.any():
                best[upd] = cand[upd]
                best_off[upd] = o
                best_r[upd] = st.radius
    nodes = np.stack(np.indices(counts), axis=-1)
    return MaxField(grid, best, nodes - best_off, best_r, norm, radius_cap, ext, "brute")


def _clamp_centers(cone_index: np.ndarray, offset: int) -> np.ndarray:
    """Candidate center coordinate ``max(0, x - o)`` along one axis of the cone."""
    return np.maximum(cone_index - offset, 0)


def maximal_bd_pruned(
    f: GridFunction,
    norm: NormSpec,
    radius_cap: float | None = None,
    extension: str | None = "auto",
) -> MaxField:
    """Same values as :func:`maximal_brute` for block-decreasing ``f``, far fewer candidates."""
    from .bdgen import check_block_decreasing

    check = check_block_decreasing(f)
    if not check.passed:
        raise NotBlockDecreasingError(f"input is not block decreasing: {check.violations[0]}")
    grid = f.grid
    ext = resolve_extension(f, extension)
    stencils = _ladder(grid, norm, radius_cap)
    av = _Averager(f, stencils, ext)
    mid = np.array(grid.center_index)
    cone = tuple(int(m) + 1 for m in mid)
    axes = [np.arange(n) for n in cone]
    best = np.full(cone, -np.inf)
    best_o = np.zeros(cone + (grid.dim,), dtype=np.int64)
    best_r = np.zeros(cone)
    for st in stencils:
        a = av.averages(st, mid, mid + np.array(cone))
        for o in st.frontier:
            idx = [_clamp_centers(ax, int(oi)) for ax, oi in zip(axes, o)]
            cand = a[np.ix_(*idx)]
            upd = cand > best
            if upd.any():
                best[upd] = cand[upd]
                best_o[upd] = o
                best_r[upd] = st.radius
    cone_nodes = np.stack(np.indices(cone), axis=-1)
    best_c = np.stack(
        [_clamp_centers(cone_nodes[..., i], best_o[..., i]) for i in range(grid.dim)],
        axis=-1,
    )
    # reflect the positive cone onto the whole grid
    rel = [np.arange(n) - m for n, m in zip(grid.counts, mid)]
    gather = np.ix_(*[np.abs(r) for r in rel])
    values = best[gather]
    radii = best_r[gather]
    signs = np.stack(np.meshgrid(*[np.sign(r) for r in rel], indexing="ij"), axis=-1)
    centers = signs * best_c[gather] + mid
    return MaxField(grid, values, centers, radii, norm, radius_cap, ext, "bd-pruned")


def maximal_centered(
    f: GridFunction,
    norm: NormSpec,
    radius_cap: float | None = None,
    extension: str | None = "auto",
) -> MaxField:
    grid = f.grid
    ext = resolve_extension(f, extension)
    stencils = _ladder(grid, norm, radius_cap)
    av = _Averager(f, stencils, ext)
    best = np.full(grid.counts, -np.inf)
    best_r = np.zeros(grid.counts)
    for st in stencils:
        a = av.averages(st, [0] * grid.dim, grid.counts)
        upd = a > best
        best[upd] = a[upd]
        best_r[upd] = st.radius
    nodes = np.stack(np.indices(grid.counts), axis=-1)
    return MaxField(grid, best, nodes, best_r, norm, radius_cap, ext, "centered")


def maximal_at(
    f: GridFunction,
    nodes,
    norm: NormSpec,
    radius_cap: float | None = None,
    extension: str | None = "auto",
) -> list[MaxRecord]:
    """Brute-force maximal value at a few nodes only (every center, every radius)."""
    grid = f.grid
    ext = resolve_extension(f, extension)
    stencils = _ladder(grid, norm, radius_cap)
    av = _Averager(f, stencils, ext)
    counts = np.array(grid.counts)
    out = []
    for node in nodes:
        x = np.asarray(node, dtype=np.int64)
        best, best_c, best_r = -np.inf, None, 0.0
        for st in stencils:
            lo = np.maximum(x - st.extent, 0)
            hi = np.minimum(x + st.extent + 1, counts)
            a = av.averages(st, lo, hi)
            rel = x - (np.stack(np.indices(tuple(hi - lo)), axis=-1) + lo)
            e = st.extent
            inball = st.mask[tuple((rel + e)[..., i] for i in range(grid.dim))]
            vals = np.where(inball, a, -np.inf)
            j = int(np.argmax(vals))  # first maximum = smallest center
            if vals.flat[j] > best:
                best = float(vals.flat[j])
                best_c = tuple(int(v) for v in np.unravel_index(j, vals.shape) + lo)
                best_r = st.radius
        out.append(MaxRecord(tuple(int(v) for v in x), best, best_c, best_r))
    return out


def enk_classify(mf: MaxField, n: float, k: float) -> np.ndarray:
    """Nodes whose witness ball has radius >= 1/n and whose value is <= k."""
    return (mf.radii >= 1.0 / n - 1e-12) & (mf.values <= k)


def ern_classify(mf: MaxField, n: float) -> np.ndarray:
    """Local-operator variant: witness radius in ``[1/n, R]``."""
    if mf.radius_cap is None:
        raise ValueError("E_{R,n} needs a maximal field computed with a radius cap")
    return (mf.radii >= 1.0 / n - 1e-12) & (mf.radii <= mf.radius_cap + 1e-12)


def adjacent_quotients(mf: MaxField, mask: np.ndarray) -> np.ndarray:
    """``|M(x) - M(y)| / h`` over axis-adjacent node pairs with both ends in ``mask``."""
    out = []
    h = mf.grid.spacing
    for ax in range(mf.grid.dim):
        a = [slice(None)] * mf.grid.dim
        b = [slice(None)] * mf.grid.dim
        a[ax] = slice(None, -1)
        b[ax] = slice(1, None)
        both = mask[tuple(a)] & mask[tuple(b)]
        diff = np.abs(mf.values[tuple(b)] - mf.values[tuple(a)]) / h
        out.append(diff[both])
    return np.concatenate(out) if out else np.zeros(0)
