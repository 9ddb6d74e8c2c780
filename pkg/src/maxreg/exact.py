"""Exact ball sums over a padded grid.

Every value is written as an integer multiple of a common power of two and
split into two 31-bit limbs, so line prefix sums and box (summed-area)
sums are exact in int64.  Exactness is what makes the pruned maximal search
agree bit-for-bit with brute force: the discrete ball-average field of a
block-decreasing function is then *exactly* block decreasing, and
:func:`to_average` maps exact sums to floats monotonically, so comparisons
between candidate balls never flip under rounding.

Values smaller than ``2**-SPAN_BITS`` times the maximum are floored onto the
lattice (a monotone, symmetry-preserving rounding far below float resolution
of the averages).
"""

from __future__ import annotations

import numpy as np

from .norms import BallStencil

LIMB_BITS = 31
SPAN_BITS = 62
_MASK = (1 << LIMB_BITS) - 1


def _trailing_zeros(m: np.ndarray) -> np.ndarray:
    low = m & -m
    return np.frexp(low.astype(float))[1] - 1


class IntegerImage:
    """Integer image ``values = 2**exp2 * (hi * 2**31 + lo)`` of a non-negative array."""

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=float)
        self.shape = v.shape
        top = float(v.max()) if v.size else 0.0
        if top == 0.0:
            self.exp2 = 0
            ints = np.zeros(v.shape, dtype=np.int64)
        else:
            mant, ex = np.frexp(v)
            pos = v > 0
            m53 = (mant[pos] * 2.0 ** 53).astype(np.int64)
            finest = int((ex[pos] - 53 + _trailing_zeros(m53)).min())
            e_top = int(np.frexp(top)[1])
            self.exp2 = max(finest, e_top - SPAN_BITS)
            ints = np.floor(np.ldexp(v, -self.exp2)).astype(np.int64)
        self.exact = bool(np.array_equal(np.ldexp(ints.astype(float), self.exp2), v))
        hi = ints >> LIMB_BITS
        self.limbs = [ints & _MASK] + ([hi] if hi.any() else [])
        self._line_prefix = None
        self._box_prefix = None

    @property
    def line_prefix(self) -> list[np.ndarray]:
        """Prefix sums along the last axis, with a leading zero column."""
        if self._line_prefix is None:
            out = []
            for limb in self.limbs:
                p = np.zeros(limb.shape[:-1] + (limb.shape[-1] + 1,), dtype=np.int64)
                np.cumsum(limb, axis=-1, out=p[..., 1:])
                out.append(p)
            self._line_prefix = out
        return self._line_prefix

    @property
    def box_prefix(self) -> list[np.ndarray]:
        """Summed-area tables with a leading zero slab on every axis."""
        if self._box_prefix is None:
            out = []
            for limb in self.limbs:
                p = np.zeros(tuple(s + 1 for s in limb.shape), dtype=np.int64)
                inner = p[tuple(slice(1, None) for _ in limb.shape)]
                inner[...] = limb
                for ax in range(limb.ndim):
                    np.cumsum(inner, axis=ax, out=inner)
                out.append(p)
            self._box_prefix = out
        return self._box_prefix

    def ball_sums(self, st: BallStencil, lo, hi) -> list[np.ndarray]:
        """Exact limb sums of the stencil centered at every padded index in ``[lo, hi)``."""
        lo = [int(v) for v in lo]
        hi = [int(v) for v in hi]
        if st.norm.is_box:
            return self._box_sums(st.extent, lo, hi)
        sums = []
        for pref in self.line_prefix:
            acc = np.zeros(tuple(b - a for a, b in zip(lo, hi)), dtype=np.int64)
            for lead, t in st.columns:
                sl = tuple(slice(a + o, b + o) for a, b, o in zip(lo[:-1], hi[:-1], lead))
                acc += pref[sl + (slice(lo[-1] + t + 1, hi[-1] + t + 1),)]
                acc -= pref[sl + (slice(lo[-1] - t, hi[-1] - t),)]
            sums.append(acc)
        return sums

    def _box_sums(self, ext, lo, hi) -> list[np.ndarray]:
        d = len(lo)
        sums = []
        for pref in self.box_prefix:
            acc = np.zeros(tuple(b - a for a, b in zip(lo, hi)), dtype=np.int64)
            for corner in range(1 << d):
                sl = []
                sign = 1
                for ax in range(d):
                    if corner >> ax & 1:
                        s = lo[ax] - int(ext[ax])
                        sign = -sign
                    else:
                        s = lo[ax] + int(ext[ax]) + 1
                    sl.append(slice(s, s + hi[ax] - lo[ax]))
                if sign > 0:
                    acc += pref[tuple(sl)]
                else:
                    acc -= pref[tuple(sl)]
            sums.append(acc)
        return sums

    def to_average(self, sums: list[np.ndarray], count: int) -> np.ndarray:
        return to_average(sums, count, self.exp2)


def to_average(sums: list[np.ndarray], count: int, exp2: int) -> np.ndarray:
    """Float value of ``2**exp2 * S / count`` for exact limb sums ``S``.

    The map is monotone nondecreasing in ``S``: ``S`` is first truncated to
    its leading 62 bits (an order-preserving floor at a bit-length dependent
    position), converted with a single correctly rounded int64 -> float
    cast, divided by ``count`` and scaled by an exact power of two.
    """
    if len(sums) == 1:
        return np.ldexp(sums[0].astype(float) / count, exp2)
    lo_sum, hi_sum = sums
    l0 = lo_sum & _MASK
    t1 = hi_sum + (lo_sum >> LIMB_BITS)
    l1 = t1 & _MASK
    l2 = t1 >> LIMB_BITS
    bl = np.frexp(l2.astype(float))[1]  # bit length, 0 where l2 == 0
    wide = bl > 0
    w = (l1 << LIMB_BITS) + l0
    if wide.any():
        b = bl[wide]
        w[wide] = (
            (l2[wide] << (62 - b))
            + (l1[wide] << (LIMB_BITS - b))
            + (l0[wide] >> b)
        )
    return np.ldexp(w.astype(float) / count, bl + exp2)
