"""Block-decreasing test corpus, structure checks, precise representative, jumps.

A function is block decreasing when it is unconditional (even in every
coordinate) and nonincreasing along every axis-parallel ray leaving a
coordinate hyperplane inside the positive cone.  On an origin-symmetric grid
both properties are checked exactly, without tolerance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .grid import Grid, GridFunction
from .norms import NormSpec, mu

MAX_VIOLATIONS = 10


# -- profiles ---------------------------------------------------------------

def _g_exp(u):
    return np.exp(-u)


def _g_log2_tail(u):
    with np.errstate(divide="ignore"):
        return np.minimum(1.0, 1.0 / (u * np.log(np.e + u) ** 2))


def _g_const(u):
    return np.ones_like(np.asarray(u, dtype=float))


_G_PROFILES = {"exp": _g_exp, "log2-tail": _g_log2_tail, "constant": _g_const}


@dataclass(frozen=True)
class ProfileG:
    """One-dimensional profile ``g(u) = g0(scale * u)`` for the separable family."""

    tag: str = "exp"
    scale: float = 1.0

    def __call__(self, u):
        return _G_PROFILES[self.tag](self.scale * np.asarray(u, dtype=float))

    def l1_norm(self) -> float:
        """``int_0^inf g``, with the tail integrated in ``t = log u``.

        Beyond ``t = T`` the integrand ``g(e^t) e^t`` is extrapolated as
        ``C / t^2`` (exact asymptotics of the log-squared tail, zero for
        exponential decay).
        """
        big_t = 600.0

        def in_t(t):
            return float(self(math.exp(t))) * math.exp(t)

        head, _ = integrate.quad(lambda u: float(self(u)), 0.0, 1.0, limit=200)
        tail, _ = integrate.quad(in_t, 0.0, big_t, limit=1000)
        return head + tail + in_t(big_t) * big_t


def normalized_g(tag: str = "exp") -> ProfileG:
    """Profile with ``g(0) = 1`` and unit integral, scaled in the argument.

    Raises when the raw profile cannot be normalized: it must decay to 0 and
    have a finite positive integral (constants fail both).
    """
    if tag not in _G_PROFILES:
        raise ValueError(f"unknown profile g {tag!r}")
    raw = ProfileG(tag, 1.0)
    if not float(raw(1e12)) < 1e-9:
        raise ValueError(f"profile {tag!r} does not vanish at infinity; cannot normalize")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            total = raw.l1_norm()
        except integrate.IntegrationWarning as exc:
            raise ValueError(f"profile {tag!r}: integral did not converge ({exc})") from exc
    if not (np.isfinite(total) and total > 0):
        raise ValueError(f"profile {tag!r} has no finite positive integral; cannot normalize")
    return ProfileG(tag, total)


def _radial_profile(tag: str, params: tuple[float, ...]):
    a = params[0] if params else 1.0
    if tag == "exp":
        return lambda t: np.exp(-a * t)
    if tag == "gauss":
        return lambda t: np.exp(-a * t * t)
    if tag == "tent":
        return lambda t: np.maximum(0.0, 1.0 - t / a)
    if tag == "power":
        return lambda t: (1.0 + t) ** (-a)
    if tag == "step":
        return lambda t: (t <= a).astype(float)
    raise ValueError(f"unknown radial profile {tag!r}")


@dataclass(frozen=True)
class Square:
    side: float = 1.0

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("square side must be positive")

    @property
    def id(self) -> str:
        return f"square-{self.side:g}"

    def evaluate(self, coords):
        inside = np.ones(np.broadcast_shapes(*[c.shape for c in coords]), dtype=bool)
        for c in coords:
            inside = inside & (np.abs(c) <= self.side / 2)
        return inside.astype(float)


@dataclass(frozen=True)
class QuasiBall:
    p: float = 0.5
    radius: float = 1.0

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"quasiball exponent must lie in (0, 1], got {self.p}")
        if not self.radius > 0:
            raise ValueError("quasiball radius must be positive")

    @property
    def id(self) -> str:
        return f"quasiball-p{self.p:g}-r{self.radius:g}"

    def evaluate(self, coords):
        s = sum(np.abs(c) ** self.p for c in sorted(coords, key=lambda c: c.shape))
        return (s <= self.radius ** self.p * (1 + 1e-12)).astype(float)


@dataclass(frozen=True)
class RadialDecreasing:
    norm: NormSpec
    profile: str = "exp"
    params: tuple[float, ...] = (1.0,)

    @property
    def id(self) -> str:
        ps = ",".join(f"{p:g}" for p in self.params)
        return f"radial-{self.norm.label}-{self.profile}({ps})"

    def evaluate(self, coords):
        shape = np.broadcast_shapes(*[c.shape for c in coords])
        x = np.stack([np.broadcast_to(c, shape) for c in coords], axis=-1)
        return _radial_profile(self.profile, self.params)(mu(self.norm, x))


@dataclass(frozen=True)
class Separable:
    """``f_m(x) = m g(m |x_1|) prod_{i>1} g(|x_i|)`` with normalized ``g``."""

    m: float = 1.0
    g: str = "exp"
    _g: ProfileG = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.m >= 1:
            raise ValueError(f"separable family needs m >= 1, got {self.m}")
        object.__setattr__(self, "_g", normalized_g(self.g))

    @property
    def id(self) -> str:
        return f"separable-m{self.m:g}-{self.g}"

    @property
    def profile(self) -> ProfileG:
        return self._g

    def evaluate(self, coords):
        out = self.m * self._g(self.m * np.abs(coords[0]))
        for c in coords[1:]:
            out = out * self._g(np.abs(c))
        return out


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("constant profile needs a positive value")

    @property
    def id(self) -> str:
        return f"constant-{self.value:g}"

    def evaluate(self, coords):
        shape = np.broadcast_shapes(*[c.shape for c in coords])
        return np.full(shape, float(self.value))


ProfileSpec = Square | QuasiBall | RadialDecreasing | Separable | Constant


def parse_profile(text: str) -> ProfileSpec:
    """Parse a corpus token ``kind:arg/arg/...``.

    Forms: ``square:<side>``, ``quasiball:<p>/<radius>``,
    ``radial:<norm>/<profile>/<param,...>``, ``separable:<m>/<g>``,
    ``constant:<value>``.  Numbers may be fractions such as ``1/2`` only in
    fields that cannot contain a slash, so use decimals here.
    """
    kind, _, rest = text.strip().partition(":")
    args = [a for a in rest.split("/")] if rest else []
    try:
        if kind == "square":
            return Square(float(args[0]) if args else 1.0)
        if kind == "quasiball":
            return QuasiBall(float(args[0]) if args else 0.5,
                             float(args[1]) if len(args) > 1 else 1.0)
        if kind == "radial":
            from .norms import parse_norm

            norm = parse_norm(args[0]) if args else NormSpec.lp(2)
            prof = args[1] if len(args) > 1 else "exp"
            params = tuple(float(v) for v in args[2].split(",")) if len(args) > 2 else (1.0,)
            return RadialDecreasing(norm, prof, params)
        if kind == "separable":
            return Separable(float(args[0]) if args else 1.0, args[1] if len(args) > 1 else "exp")
        if kind == "constant":
            return Constant(float(args[0]) if args else 1.0)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad profile token {text!r}: {exc}") from exc
    raise ValueError(f"unknown profile kind in {text!r}")


def random_corpus(count: int, seed: int, dim: int = 2) -> list[ProfileSpec]:
    """Block-decreasing profiles with parameters drawn from a seeded generator."""
    rng = np.random.default_rng(seed)
    norms = [NormSpec.linf(), NormSpec.lp(1), NormSpec.lp(2), NormSpec.lp(3)]
    out: list[ProfileSpec] = []
    for j in range(count):
        kind = j % 4
        if kind == 0:
            out.append(Square(round(float(rng.uniform(0.25, 2.0)), 3)))
        elif kind == 1:
            out.append(QuasiBall(round(float(rng.uniform(0.3, 1.0)), 3),
                                 round(float(rng.uniform(0.5, 1.5)), 3)))
        elif kind == 2:
            norm = norms[int(rng.integers(len(norms)))]
            prof = ("exp", "gauss", "tent", "power")[int(rng.integers(4))]
            out.append(RadialDecreasing(norm, prof, (round(float(rng.uniform(0.5, 3.0)), 3),)))
        else:
            out.append(Separable(float(rng.integers(1, 5)), "exp"))
    return out


def generate(spec: ProfileSpec, grid: Grid) -> GridFunction:
    vals = np.array(spec.evaluate(grid.coordinates()), dtype=float)
    vals = np.broadcast_to(vals, grid.counts).copy()
    ceiling = float(vals.max()) if vals.max() > 0 else 1.0
    return GridFunction(grid, vals, ceiling)


def default_corpus(dim: int = 2) -> list[ProfileSpec]:
    """Twelve-plus block-decreasing profiles used by the verification suites."""
    rect_w = (2.0,) + (1.0,) * (dim - 1)
    return [
        Square(1.0),
        Square(0.5),
        QuasiBall(0.5, 1.0),
        QuasiBall(1.0, 1.0),
        RadialDecreasing(NormSpec.lp(2), "exp", (1.0,)),
        RadialDecreasing(NormSpec.lp(2), "gauss", (2.0,)),
        RadialDecreasing(NormSpec.lp(2), "step", (0.75,)),
        RadialDecreasing(NormSpec.linf(), "tent", (1.0,)),
        RadialDecreasing(NormSpec.lp(1), "exp", (2.0,)),
        RadialDecreasing(NormSpec.lp(3), "power", (2.0,)),
        RadialDecreasing(NormSpec.rect(rect_w), "exp", (1.0,)),
        Separable(1.0, "exp"),
        Separable(4.0, "exp"),
    ]


# -- structure checks ---------------------------------------------------------

@dataclass
class BDCheck:
    passed: bool
    violations: list[dict]

    def __bool__(self) -> bool:
        return self.passed


def check_block_decreasing(f: GridFunction, limit: int = MAX_VIOLATIONS) -> BDCheck:
    """Exact reflection symmetry plus monotonicity along positive-cone rays."""
    v = f.values
    grid = f.grid
    mid = grid.center_index
    violations: list[dict] = []
    for ax in range(grid.dim):
        flipped = np.flip(v, axis=ax)
        bad = np.argwhere(v != flipped)
        for idx in bad[: limit - len(violations)]:
            mirror = list(idx)
            mirror[ax] = grid.counts[ax] - 1 - idx[ax]
            violations.append({
                "kind": "symmetry", "axis": ax,
                "node": tuple(int(i) for i in idx), "other": tuple(int(i) for i in mirror),
                "values": (float(v[tuple(idx)]), float(v[tuple(mirror)])),
            })
        if len(violations) >= limit:
            return BDCheck(False, violations)
    cone = v[tuple(slice(m, None) for m in mid)]
    for ax in range(grid.dim):
        a = [slice(None)] * grid.dim
        b = [slice(None)] * grid.dim
        a[ax] = slice(None, -1)
        b[ax] = slice(1, None)
        bad = np.argwhere(cone[tuple(b)] > cone[tuple(a)])
        for idx in bad[: limit - len(violations)]:
            inner = tuple(int(i) + m for i, m in zip(idx, mid))
            outer = list(inner)
            outer[ax] += 1
            violations.append({
                "kind": "monotonicity", "axis": ax, "node": inner, "other": tuple(outer),
                "values": (float(v[inner]), float(v[tuple(outer)])),
            })
        if len(violations) >= limit:
            break
    return BDCheck(not violations, violations)


def is_block_decreasing(f: GridFunction) -> bool:
    return check_block_decreasing(f, limit=1).passed


def is_unconditional(f: GridFunction) -> bool:
    return all(np.array_equal(f.values, np.flip(f.values, axis=ax)) for ax in range(f.grid.dim))


def precise_rep(f: GridFunction, norm: NormSpec | None = None) -> GridFunction:
    """Largest average over radius-``h`` balls containing each node.

    Discrete stand-in for the limsup over shrinking balls; block-decreasing
    inputs give block-decreasing outputs.
    """
    from .maxop import maximal_brute

    norm = norm or NormSpec.linf()
    mf = maximal_brute(f, norm, radius_cap=f.grid.spacing)
    return GridFunction(f.grid, mf.values, f.ceiling, mf.extension)


@dataclass
class JumpEstimate:
    """Faces between axis-adjacent nodes whose values differ by at least ``threshold``."""

    axes: np.ndarray
    nodes: np.ndarray  # flat index of the lower node of each face
    jumps: np.ndarray
    threshold: float
    spacing: float
    dim: int

    @property
    def count(self) -> int:
        return int(self.jumps.size)

    @property
    def total_length(self) -> float:
        return self.count * self.spacing ** (self.dim - 1)

    @property
    def max_jump(self) -> float:
        return float(self.jumps.max()) if self.count else 0.0

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("face_axis,node_index,jump\n")
            for ax, node, jump in zip(self.axes, self.nodes, self.jumps):
                fh.write(f"{int(ax)},{int(node)},{float(jump)!r}\n")


def jump_estimate(f: GridFunction, threshold: float) -> JumpEstimate:
    if not threshold > 0:
        raise ValueError("jump threshold must be positive")
    v = f.values
    grid = f.grid
    axes, nodes, jumps = [], [], []
    for ax in range(grid.dim):
        d = np.abs(np.diff(v, axis=ax))
        hit = np.argwhere(d >= threshold)
        axes.append(np.full(len(hit), ax))
        nodes.append(np.ravel_multi_index(tuple(hit.T), grid.counts) if len(hit) else np.zeros(0, int))
        jumps.append(d[tuple(hit.T)])
    return JumpEstimate(
        np.concatenate(axes).astype(int),
        np.concatenate(nodes).astype(int),
        np.concatenate(jumps).astype(float),
        float(threshold),
        grid.spacing,
        grid.dim,
    )


def default_threshold(f: GridFunction) -> float:
    """0.25 for indicator-valued inputs, ``10 h`` otherwise."""
    vals = np.unique(f.values)
    if np.all(np.isin(vals, (0.0, 1.0))):
        return 0.25
    return 10 * f.grid.spacing


def axis_jump_near(
    values: np.ndarray, grid: Grid, point, axis: int, radius: float
) -> tuple[float, tuple[int, ...] | None]:
    """Largest ``|v(x + h e_axis) - v(x)|`` over faces inside a box around ``point``.

    Both nodes of a face must lie within sup-distance ``radius`` of ``point``.

    Returns:
        ``(jump, lower node index)``; ``(0.0, None)`` if no face fits.
    """
    center = grid.index_of(point)
    r = int(math.floor(radius / grid.spacing + 1e-9))
    sl = tuple(slice(max(c - r, 0), min(c + r + 1, n)) for c, n in zip(center, grid.counts))
    box = np.asarray(values)[sl]
    if box.shape[axis] < 2:
        return 0.0, None
    d = np.abs(np.diff(box, axis=axis))
    k = np.unravel_index(int(np.argmax(d)), d.shape)
    node = tuple(int(i + s.start) for i, s in zip(k, sl))
    return float(d[k]), node


def line_window_sums_nonincreasing(f: GridFunction, half_width: int) -> bool:
    """Exact check that 1D window sums along every axis line are nonincreasing on the half line."""
    from .exact import IntegerImage

    mid = f.grid.center_index
    for ax in range(f.grid.dim):
        v = np.moveaxis(f.values, ax, -1)
        pad = [(0, 0)] * (v.ndim - 1) + [(half_width, half_width)]
        img = IntegerImage(np.pad(v, pad, mode="edge"))
        n = v.shape[-1]
        sums = [
            p[..., 2 * half_width + 1: 2 * half_width + 1 + n] - p[..., :n]
            for p in img.line_prefix
        ]
        w = img.to_average(sums, 2 * half_width + 1)[..., mid[ax]:]
        if np.any(np.diff(w, axis=-1) > 0):
            return False
    return True
