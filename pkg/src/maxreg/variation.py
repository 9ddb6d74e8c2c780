"""Total variation estimates on grids.

The variation of a function on R^d is sandwiched by the sum of its
directional (coordinate-axis) variations::

    sum_i V_i(f) / sqrt(d)  <=  V(f)  <=  sum_i V_i(f),

where ``V_i`` integrates the one-dimensional variation of every line parallel
to axis ``i``.  On a grid each line contributes its sum of absolute
differences, plus the jumps at the two ends implied by the out-of-domain rule.

For block-decreasing functions there is also a boundary formula that only
needs the trace next to the coordinate hyperplanes and the value at infinity
(read on the boundary face of the box).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction
from .maxop import resolve_extension


def variation_1d(values, extension: str = "constant") -> float:
    """Variation of a sampled line, including the jumps at both ends.

    Args:
        values: Samples along the line, in order.
        extension: ``"constant"`` continues the line with its end values
            (no extra jump); ``"zero"`` drops to 0 beyond each end.

    Returns:
        ``sum |v[j+1] - v[j]|`` plus the extension jumps.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("variation_1d needs a non-empty 1D sequence")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    total = math.fsum(np.abs(np.diff(v)).tolist())
    if extension == "zero":
        total += abs(v[0]) + abs(v[-1])
    elif extension != "constant":
        raise ValueError(f"unknown extension rule {extension!r}")
    return total


def _axis_line_sum(values: np.ndarray, axis: int, extension: str) -> float:
    """Sum over every line parallel to ``axis`` of its 1D variation."""
    d = np.abs(np.diff(values, axis=axis))
    total = math.fsum(d.ravel().tolist())
    if extension == "zero":
        first = np.take(values, 0, axis=axis)
        last = np.take(values, -1, axis=axis)
        total += math.fsum(np.abs(first).ravel().tolist())
        total += math.fsum(np.abs(last).ravel().tolist())
    return total


@dataclass
class VariationReport:
    """Directional variation estimates of one grid function.

    ``v_lower`` and ``v_upper`` bracket the variation over R^d of the
    extended function; ``bd_boundary_sum`` is only set for block-decreasing
    inputs.  ``tail_residual`` is the largest value on the boundary faces
    (how far the function still is from 0 where the box ends).
    """

    per_axis: list[float]
    directional_sum: float
    v_lower: float
    v_upper: float
    bd_boundary_sum: float | None
    method: str
    grid: Grid
    extension: str
    tail_residual: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_axis": list(self.per_axis),
            "directional_sum": self.directional_sum,
            "v_lower": self.v_lower,
            "v_upper": self.v_upper,
            "bd_boundary_sum": self.bd_boundary_sum,
            "method": self.method,
            "grid": self.grid.to_dict(),
            "extension": self.extension,
            "tail_residual": self.tail_residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def partial_variation(f: GridFunction, axis: int, extension: str | None = "auto") -> float:
    """``V_i(f)``: integral over the transverse coordinates of line variations along ``axis``.

    ``axis`` is 0-based.
    """
    d = f.grid.dim
    if not 0 <= axis < d:
        raise ValueError(f"axis {axis} out of range for a {d}-dimensional grid")
    ext = resolve_extension(f, extension)
    h = f.grid.spacing
    return h ** (d - 1) * _axis_line_sum(f.values, axis, ext)


def _boundary_faces_max(values: np.ndarray) -> float:
    top = 0.0
    for ax in range(values.ndim):
        top = max(top, float(np.take(values, 0, axis=ax).max()),
                  float(np.take(values, -1, axis=ax).max()))
    return top


def variation_bd_boundary(f: GridFunction) -> float:
    """Boundary formula for block-decreasing ``f``.

    ``2^d sum_i h^{d-1} sum_lines [f(first positive node) - f(boundary node)]``
    over the lines parallel to axis ``i`` in the closed positive cone.  Lines
    lying on a coordinate hyperplane are shared with the neighbouring cones
    and get weight 1/2 per such hyperplane (trapezoidal weights).

    Raises:
        NotBlockDecreasingError: if ``f`` is not block decreasing.
    """
    from .bdgen import check_block_decreasing
    from .maxop import NotBlockDecreasingError

    check = check_block_decreasing(f)
    if not check.passed:
        raise NotBlockDecreasingError(
            f"boundary formula needs a block-decreasing input: {check.violations[0]}"
        )
    grid = f.grid
    d = grid.dim
    h = grid.spacing
    mid = grid.center_index
    cone = f.values[tuple(slice(m, None) for m in mid)]
    total = 0.0
    for ax in range(d):
        if cone.shape[ax] < 2:
            continue
        drop = np.take(cone, 1, axis=ax) - np.take(cone, -1, axis=ax)
        weights = np.ones(drop.shape)
        for j in range(drop.ndim):
            sl = [slice(None)] * drop.ndim
            sl[j] = 0
            weights[tuple(sl)] *= 0.5
        total += h ** (d - 1) * math.fsum((weights * drop).ravel().tolist())
    return 2 ** d * total


def variation_directional(
    f: GridFunction, extension: str | None = "auto", bd_sum: bool = True
) -> VariationReport:
    """Directional variation report of ``f``.

    Args:
        f: Grid function.
        extension: Out-of-domain rule (``"auto"`` follows the function's own
            rule, else constant for block-decreasing inputs and zero otherwise).
        bd_sum: Also evaluate the block-decreasing boundary formula when the
            input qualifies.
    """
    from .bdgen import is_block_decreasing

    ext = resolve_extension(f, extension)
    d = f.grid.dim
    per_axis = [partial_variation(f, ax, ext) for ax in range(d)]
    total = math.fsum(per_axis)
    boundary = None
    notes = []
    if bd_sum:
        if is_block_decreasing(f):
            boundary = variation_bd_boundary(f)
        else:
            notes.append("not block decreasing: boundary formula skipped")
    return VariationReport(
        per_axis=per_axis,
        directional_sum=total,
        v_lower=total / math.sqrt(d),
        v_upper=total,
        bd_boundary_sum=boundary,
        method="directional",
        grid=f.grid,
        extension=ext,
        tail_residual=_boundary_faces_max(f.values) if ext == "constant" else 0.0,
        notes=notes,
    )
