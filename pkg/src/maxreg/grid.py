"""Origin-symmetric uniform grids and non-negative sampled functions.

A :class:`Grid` discretizes the box ``prod_i [-e_i, e_i]`` with a single
spacing ``h`` shared by every axis.  Node counts are odd, so the origin is
always a node and reflection across any coordinate hyperplane maps nodes
onto nodes exactly.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXTENSIONS = ("constant", "zero")

HEADER_TAG = "maxreg-grid v1"


class GridFormatError(ValueError):
    """Raised when a grid-function CSV file cannot be parsed."""


@dataclass(frozen=True)
class Grid:
    dim: int
    half_extent: tuple[float, ...]
    spacing: float
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if len(self.half_extent) != self.dim or len(self.counts) != self.dim:
            raise ValueError("half_extent and counts must have one entry per axis")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        for c in self.counts:
            if c < 1 or c % 2 == 0:
                raise ValueError(f"node counts must be odd, got {self.counts}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def center_index(self) -> tuple[int, ...]:
        """Index of the origin node."""
        return tuple((c - 1) // 2 for c in self.counts)

    def axis_nodes(self, axis: int) -> np.ndarray:
        m = (self.counts[axis] - 1) // 2
        return np.arange(-m, m + 1, dtype=float) * self.spacing

    def coordinates(self) -> list[np.ndarray]:
        """Open meshgrid of node coordinates, one broadcastable array per axis."""
        return list(np.ix_(*[self.axis_nodes(i) for i in range(self.dim)]))

    def node(self, index: Sequence[int]) -> np.ndarray:
        return np.array(
            [(j - m) * self.spacing for j, m in zip(index, self.center_index)]
        )

    def index_of(self, point: Sequence[float]) -> tuple[int, ...]:
        """Nearest node index to ``point``; raises if it falls off the grid."""
        idx = tuple(
            int(round(x / self.spacing)) + m for x, m in zip(point, self.center_index)
        )
        for j, c in zip(idx, self.counts):
            if not 0 <= j < c:
                raise ValueError(f"point {tuple(point)} lies outside the grid")
        return idx

    @property
    def effective_half_extent(self) -> tuple[float, ...]:
        """Half extent actually covered by nodes (a multiple of the spacing)."""
        return tuple((c - 1) // 2 * self.spacing for c in self.counts)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "half_extent": list(self.half_extent),
            "spacing": self.spacing,
            "counts": list(self.counts),
        }


def make_grid(dim: int, half_extent: Sequence[float] | float, spacing: float) -> Grid:
    """Build a symmetric grid with ``2*round(e_i/h) + 1`` nodes per axis."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if np.isscalar(half_extent):
        half_extent = [float(half_extent)] * dim
    extents = tuple(float(e) for e in half_extent)
    if len(extents) != dim:
        raise ValueError(f"expected {dim} half extents, got {len(extents)}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if any(not e > 0 for e in extents):
        raise ValueError(f"half extents must be positive, got {extents}")
    if spacing > min(extents):
        raise ValueError(
            f"spacing {spacing} exceeds the smallest half extent {min(extents)}"
        )
    counts = tuple(2 * int(round(e / spacing)) + 1 for e in extents)
    return Grid(dim=dim, half_extent=extents, spacing=float(spacing), counts=counts)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Non-negative samples on a grid, capped by ``ceiling``.

    ``values`` has shape ``grid.counts`` (row-major when flattened).
    ``extension`` optionally pins the rule used outside the box; operations
    that receive a conflicting rule raise instead of silently mixing them.
    """

    grid: Grid
    values: np.ndarray
    ceiling: float
    extension: str | None = field(default=None)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.size != self.grid.size:
            raise ValueError(
                f"got {vals.size} values for a grid with {self.grid.size} nodes"
            )
        vals = vals.reshape(self.grid.counts)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        if not self.ceiling > 0:
            raise ValueError(f"ceiling must be positive, got {self.ceiling}")
        if vals.size and vals.min() < 0:
            bad = np.unravel_index(np.argmin(vals), vals.shape)
            raise ValueError(f"negative value {vals[bad]} at node {bad}")
        if vals.size and vals.max() > self.ceiling:
            raise ValueError(f"value {vals.max()} exceeds ceiling {self.ceiling}")
        if self.extension is not None and self.extension not in EXTENSIONS:
            raise ValueError(f"unknown extension rule {self.extension!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray, extension: str | None = None) -> GridFunction:
        ceiling = max(self.ceiling, float(np.max(values)) if np.size(values) else 0.0)
        return GridFunction(self.grid, values, ceiling, extension or self.extension)

    def scaled(self, factor: float) -> GridFunction:
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return GridFunction(
            self.grid, self.values * factor, self.ceiling * factor, self.extension
        )


def sample(
    grid: Grid,
    fn: Callable[..., np.ndarray | float],
    ceiling: float,
    extension: str | None = None,
) -> GridFunction:
    """Sample ``fn`` at every node and cap the result at ``ceiling``.

    ``fn`` receives one coordinate array per axis (open meshgrid, so plain
    numpy expressions broadcast).  Scalar-only callables are retried node by
    node; a failure there is re-raised with the offending coordinate.
    """
    coords = grid.coordinates()
    try:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            raw = np.broadcast_to(np.asarray(fn(*coords), dtype=float), grid.counts)
    except (TypeError, ValueError):
        raw = np.empty(grid.counts)
        for idx in np.ndindex(*grid.counts):
            x = grid.node(idx)
            try:
                raw[idx] = float(fn(*x))
            except Exception as exc:
                raise ValueError(f"evaluation failed at node {tuple(x)}: {exc}") from exc
    raw = np.array(raw, dtype=float)
    bad = np.isnan(raw) | (raw < 0)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValueError(
            f"function is negative or undefined at node {tuple(grid.node(idx))}"
        )
    return GridFunction(grid, np.minimum(raw, ceiling), ceiling, extension)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(gf: GridFunction, path: str | Path) -> None:
    g = gf.grid
    header = (
        f"# {HEADER_TAG} dim={g.dim} counts={','.join(map(str, g.counts))} "
        f"spacing={_fmt(g.spacing)} "
        f"half_extent={','.join(_fmt(e) for e in g.half_extent)} "
        f"ceiling={_fmt(gf.ceiling)}"
    )
    if gf.extension is not None:
        header += f" extension={gf.extension}"
    rows = gf.values.reshape(-1, g.counts[-1])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_header(line: str) -> dict[str, str]:
    prefix = "# " + HEADER_TAG
    if not line.startswith(prefix):
        raise GridFormatError(f"missing '{prefix}' header")
    fields = {}
    for token in line[len(prefix):].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise GridFormatError(f"malformed header token {token!r}")
        fields[key] = value
    missing = {"dim", "counts", "spacing", "half_extent", "ceiling"} - fields.keys()
    if missing:
        raise GridFormatError(f"header lacks {sorted(missing)}")
    return fields


def read_csv(path: str | Path) -> GridFunction:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise GridFormatError("empty file")
    try:
        fields = _parse_header(lines[0])
        dim = int(fields["dim"])
        counts = tuple(int(c) for c in fields["counts"].split(","))
        spacing = float(fields["spacing"])
        half_extent = tuple(float(e) for e in fields["half_extent"].split(","))
        ceiling = float(fields["ceiling"])
    except ValueError as exc:
        if isinstance(exc, GridFormatError):
            raise
        raise GridFormatError(f"bad header value: {exc}") from exc
    try:
        grid = Grid(dim, half_extent, spacing, counts)
    except ValueError as exc:
        raise GridFormatError(str(exc)) from exc
    try:
        values = [float(tok) for ln in lines[1:] for tok in ln.split(",")]
    except ValueError as exc:
        raise GridFormatError(f"non-numeric value: {exc}") from exc
    if len(values) != grid.size:
        raise GridFormatError(
            f"header declares {grid.size} values, body has {len(values)}"
        )
    arr = np.array(values)
    if (arr < 0).any():
        raise GridFormatError(f"negative value {arr[arr < 0][0]} in body")
    try:
        return GridFunction(grid, arr, ceiling, fields.get("extension"))
    except ValueError as exc:
        raise GridFormatError(str(exc)) from exc
