"""Verification experiments: configuration, runners and report writing.

Each runner takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` holding named checks (the pass/fail verdicts),
CSV tables and a JSON-able summary.  Everything except wall-clock timings is
deterministic for a fixed configuration; timings go to a separate
``timings.csv`` (and to the ``bench`` outputs, which exist to record them).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import ndimage

from .bdgen import (
    ProfileSpec,
    QuasiBall,
    RadialDecreasing,
    Separable,
    Square,
    axis_jump_near,
    check_block_decreasing,
    default_corpus,
    default_threshold,
    generate,
    is_block_decreasing,
    jump_estimate,
    parse_profile,
    random_corpus,
)
from .grid import GridFunction, make_grid
from .maxop import (
    MaxField,
    adjacent_quotients,
    enk_classify,
    ern_classify,
    maximal_bd_pruned,
    maximal_brute,
    maximal_centered,
)
from .norms import NormSpec, l2_comparison_constant, parse_norm, unit_ball_volume
from .variation import partial_variation, variation_directional

EXPERIMENTS = (
    "square-demo",
    "theorem1-sweep",
    "counterexample",
    "continuity",
    "lipschitz-enk",
    "oracle-equivalence",
    "bench",
)

BRUTE_NODE_LIMIT = 10 ** 5

DEFAULT_NORMS = ("linf", "l1", "l2", "rect:2,1")


class ConfigError(ValueError):
    """Malformed experiment configuration."""


def parse_number(text: str) -> float:
    """Parse ``0.25``, ``1/64`` or ``1e-3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


@dataclass
class ExperimentConfig:
    """Settings shared by all experiments; ``None`` means "experiment default".

    The text format is one ``key = value`` per line, ``#`` starts a comment,
    lists are whitespace separated.  Keys match the field names.
    """

    experiment: str = "square-demo"
    dim: int = 2
    half_extent: float = 2.0
    h: float | None = None
    h_list: list[float] | None = None
    norms: list[NormSpec] | None = None
    radius_cap: float | None = None
    radius_caps: list[float] = field(default_factory=list)
    corpus: list[ProfileSpec] | None = None
    random_corpus: int = 0
    seed: int = 0
    m_list: list[float] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64])
    g: str = "exp"
    counterexample_half_extent: float = 5.0
    lipschitz_n: list[float] = field(default_factory=lambda: [1, 2, 4])
    lipschitz_k: list[float] = field(default_factory=lambda: [0.25, 0.5, 1.0])
    oracle_h: float = 1 / 128
    quasiball_h: list[float] = field(default_factory=lambda: [1 / 32, 1 / 64])
    bench_sizes: list[int] = field(default_factory=lambda: [33, 65, 129, 257])
    bench_uncapped: list[int] = field(default_factory=lambda: [65])
    threads: int = 1
    out: Path | None = None

    _LIST_FLOAT = ("h_list", "radius_caps", "m_list", "lipschitz_n", "lipschitz_k", "quasiball_h")
    _LIST_INT = ("bench_sizes", "bench_uncapped")

    @classmethod
    def from_text(cls, text: str, **overrides) -> ExperimentConfig:
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            try:
                cfg.set(key.strip(), value.strip())
            except ConfigError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
        for key, value in overrides.items():
            if value is not None:
                setattr(cfg, key, value)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, **overrides) -> ExperimentConfig:
        return cls.from_text(Path(path).read_text(), **overrides)

    def set(self, key: str, value: str) -> None:
        items = value.split()
        try:
            if key in ("experiment", "g"):
                setattr(self, key, value)
            elif key in ("dim", "seed", "random_corpus", "threads"):
                setattr(self, key, int(value))
            elif key in ("half_extent", "counterexample_half_extent", "oracle_h"):
                setattr(self, key, parse_number(value))
            elif key in ("h", "radius_cap"):
                setattr(self, key, None if value.lower() == "none" else parse_number(value))
            elif key in self._LIST_FLOAT:
                setattr(self, key, [parse_number(v) for v in items])
            elif key in self._LIST_INT:
                setattr(self, key, [int(v) for v in items])
            elif key == "norms":
                self.norms = [parse_norm(v) for v in items]
            elif key == "corpus":
                self.corpus = None if value == "default" else [parse_profile(v) for v in items]
            elif key == "out":
                self.out = Path(value)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.h is not None and not self.h > 0:
            raise ConfigError("h must be positive")
        if self.corpus is not None and not self.corpus:
            raise ConfigError("corpus is empty")
        if list(self.m_list) != sorted(self.m_list):
            raise ConfigError("m_list must be ascending")

    def corpus_for(self, dim: int) -> list[ProfileSpec]:
        base = list(self.corpus) if self.corpus is not None else default_corpus(dim)
        if self.random_corpus:
            base += random_corpus(self.random_corpus, self.seed, dim)
        return base

    def norms_or(self, default) -> list[NormSpec]:
        if self.norms:
            return list(self.norms)
        return [parse_norm(n) for n in default]

    def to_dict(self) -> dict:
        out = {}
        for key in self.__dataclass_fields__:
            if key in ("out", "threads"):
                continue  # do not affect results; keeps summaries comparable
            value = getattr(self, key)
            if key == "norms" and value is not None:
                value = [n.label for n in value]
            elif key == "corpus" and value is not None:
                value = [s.id for s in value]
            elif isinstance(value, Path):
                value = str(value)
            out[key] = value
        return out


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    target: str = ""
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": _jsonable(self.value),
            "target": self.target,
            "detail": self.detail,
        }


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        for row in self.rows:
            lines.append(",".join(_fmt_cell(v) for v in row))
        return "\n".join(lines) + "\n"


@dataclass
class ExperimentResult:
    experiment: str
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, Table] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    timings: list[tuple[str, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, value=None, target: str = "", detail: str = "") -> Check:
        c = Check(name, bool(passed), value, target, detail)
        self.checks.append(c)
        return c

    def to_dict(self, config: ExperimentConfig | None = None) -> dict:
        out = {
            "experiment": self.experiment,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "summary": _jsonable(self.summary),
            "tables": sorted(f"{name}.csv" for name in self.tables),
        }
        if config is not None:
            out["config"] = _jsonable(config.to_dict())
        return out

    def write(self, out_dir, config: ExperimentConfig | None = None) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, table in self.tables.items():
            (out / f"{name}.csv").write_text(table.to_csv())
        if self.timings:
            (out / "timings.csv").write_text(
                "step,seconds\n" + "".join(f"{k},{v:.6f}\n" for k, v in self.timings)
            )
        path = out / "summary.json"
        path.write_text(json.dumps(self.to_dict(config), indent=2, sort_keys=True) + "\n")
        return path


def _fmt_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    text = str(v)
    if "," in text or '"' in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, Path):
        return str(v)
    return v


def _ordered_map(fn, items, threads: int) -> list:
    """``map`` with optional threads; results keep the input order."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _within(value: float, target: float, rel: float) -> bool:
    return abs(value - target) <= rel * abs(target)


def maximal(f: GridFunction, norm: NormSpec, radius_cap: float | None = None) -> MaxField:
    """Pruned search for block-decreasing inputs, brute force otherwise."""
    if is_block_decreasing(f):
        return maximal_bd_pruned(f, norm, radius_cap)
    if f.grid.size > BRUTE_NODE_LIMIT:
        raise ValueError(
            f"brute-force path limited to {BRUTE_NODE_LIMIT} nodes, grid has {f.grid.size}"
        )
    return maximal_brute(f, norm, radius_cap)


def linf_filter_oracle(f: GridFunction) -> np.ndarray:
    """Uncentered cube maximal function via scipy filters (independent float oracle).

    For every half width ``k`` the box mean is a uniform filter (edge
    extension), and the best box containing a node is a max filter of the
    same width over centers inside the grid.
    """
    v = np.asarray(f.values, dtype=float)
    best = np.zeros_like(v)
    top = (min(v.shape) - 1) // 2
    for k in range(1, top + 1):
        avg = ndimage.uniform_filter(v, size=2 * k + 1, mode="nearest")
        best = np.maximum(best, ndimage.maximum_filter(avg, size=2 * k + 1, mode="constant", cval=0.0))
    return best


def quasiball_jump(values: np.ndarray, grid, scale: float = 3.0) -> tuple[float, tuple | None]:
    """Largest jump along the x1-axis near the quasiball tip ``(1, 0)``.

    The search box has sup-radius ``scale * sqrt(h)``: on a grid the cusp at
    the tip is thinner than a cell within ``~sqrt(h)`` of it, so the discrete
    transition sits at distance ``O(sqrt(h))`` and moves to the tip as
    ``h -> 0``.
    """
    point = (1.0,) + (0.0,) * (grid.dim - 1)
    return axis_jump_near(values, grid, point, 0, scale * math.sqrt(grid.spacing))


# -- experiments --------------------------------------------------------------

def run_square_demo(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("square-demo")
    h = cfg.h or 1 / 64
    t0 = time.perf_counter()
    grid = make_grid(cfg.dim, cfg.half_extent, h)
    f = generate(Square(1.0), grid)
    rep = variation_directional(f)
    jumps = jump_estimate(f, 0.5)
    mf = maximal_bd_pruned(f, NormSpec.linf())
    mjumps = jump_estimate(mf.as_grid_function(), 0.25)
    res.timings.append(("square-demo", time.perf_counter() - t0))
    perimeter = 2.0 * cfg.dim
    table = Table(["quantity", "value", "target"])
    for i, v in enumerate(rep.per_axis):
        table.rows.append([f"V_{i + 1}", v, perimeter / cfg.dim])
    table.rows += [
        ["directional_sum", rep.directional_sum, perimeter],
        ["v_lower", rep.v_lower, ""],
        ["v_upper", rep.v_upper, ""],
        ["bd_boundary_sum", rep.bd_boundary_sum, perimeter],
        ["jump_length_f", jumps.total_length, perimeter],
        ["jump_length_Mf", mjumps.total_length, 0.0],
    ]
    res.tables["square"] = table
    res.check("directional_sum", _within(rep.directional_sum, perimeter, 0.02),
              rep.directional_sum, f"{perimeter} +- 2%")
    res.check("bd_boundary_sum", _within(rep.bd_boundary_sum, perimeter, 0.02),
              rep.bd_boundary_sum, f"{perimeter} +- 2%")
    res.check("jump_length", _within(jumps.total_length, perimeter, 0.03),
              jumps.total_length, f"{perimeter} +- 3%")
    res.check("maximal_jump_length", mjumps.total_length == 0.0, mjumps.total_length, "0")
    res.summary = {"variation": rep.to_dict(), "h": h}
    return res


def run_theorem1_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("theorem1-sweep")
    h_list = cfg.h_list or ([cfg.h] if cfg.h else [1 / 32, 1 / 64])
    norms = cfg.norms_or(DEFAULT_NORMS)
    caps = [None] + list(cfg.radius_caps)
    corpus = cfg.corpus_for(cfg.dim)
    table = Table([
        "h", "function", "norm", "radius_cap", "V_f_lower", "V_f_upper",
        "V_Mf_lower", "V_Mf_upper", "ratio", "Mf_block_decreasing", "status",
    ])
    max_by_h: dict[float, float] = {}
    violations = []
    for h in h_list:
        grid = make_grid(cfg.dim, cfg.half_extent, h)

        def one(spec, grid=grid, h=h):
            rows = []
            f = generate(spec, grid)
            f_bd = is_block_decreasing(f)
            vf = variation_directional(f)
            for norm in norms:
                for cap in caps:
                    t0 = time.perf_counter()
                    mf = maximal(f, norm, cap)
                    mg = mf.as_grid_function()
                    vm = variation_directional(mg, bd_sum=False)
                    bd_ok = check_block_decreasing(mg).passed if f_bd else None
                    if vf.v_lower == 0.0:
                        ratio, status = "degenerate", "degenerate" if vm.v_upper == 0.0 else "FAIL"
                    else:
                        ratio = vm.v_upper / vf.v_lower
                        status = "ok" if math.isfinite(ratio) else "FAIL"
                    if bd_ok is False:
                        status = "FAIL"
                    rows.append(([h, spec.id, norm.label, cap, vf.v_lower, vf.v_upper,
                                  vm.v_lower, vm.v_upper, ratio, bd_ok, status],
                                 (f"{h:g}/{spec.id}/{norm.label}/{cap}", time.perf_counter() - t0)))
            return rows

        for rows in _ordered_map(one, corpus, cfg.threads):
            for row, timing in rows:
                table.rows.append(row)
                res.timings.append(timing)
                if row[-1] == "FAIL":
                    violations.append(row[:4])
                if isinstance(row[8], float) and row[3] is None:
                    max_by_h[h] = max(max_by_h.get(h, 0.0), row[8])
    res.tables["theorem1"] = table
    res.check("ratios_finite_and_bd_preserved", not violations, len(violations), "0 failing rows",
              "; ".join("h={} f={} norm={} cap={}".format(*v) for v in violations[:10]))
    hs = sorted(max_by_h, reverse=True)
    for coarse, fine in zip(hs, hs[1:]):
        a, b = max_by_h[coarse], max_by_h[fine]
        rel = abs(a - b) / max(a, b)
        res.check(f"max_ratio_stable_h{coarse:g}_vs_h{fine:g}", rel <= 0.15, rel, "<= 0.15",
                  f"max ratio {a:.6g} vs {b:.6g}")
    res.summary = {"max_ratio_by_h": {f"{h:g}": v for h, v in max_by_h.items()},
                   "violations": len(violations)}
    return res


def counterexample_grid(m: float, cfg: ExperimentConfig):
    """Uniform grid for ``f_m``: fixed box, spacing fine enough for the x1 scale ``1/m``."""
    h = min(cfg.h or 1 / 16, 1 / (2 * m))
    return make_grid(2, cfg.counterexample_half_extent, h)


def run_counterexample(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("counterexample")
    table = Table(["m", "h", "half_extent", "nodes", "V2_f", "V2_Mf", "relative_increase"])
    norm = (cfg.norms or [NormSpec.linf()])[0]
    try:
        Separable(1.0, cfg.g)
    except ValueError as exc:
        res.check("profile_normalizable", False, cfg.g, "finite integral", str(exc))
        res.tables["counterexample"] = table
        return res
    rows = []
    for m in cfg.m_list:
        t0 = time.perf_counter()
        grid = counterexample_grid(m, cfg)
        f = generate(Separable(float(m), cfg.g), grid)
        mf = maximal_bd_pruned(f, norm, cfg.radius_cap)
        v2f = partial_variation(f, 1)
        v2m = partial_variation(mf.as_grid_function(), 1)
        res.timings.append((f"m={m:g}", time.perf_counter() - t0))
        rows.append((m, grid, v2f, v2m))
    bad_f = []
    bad_growth = []
    prev = None
    for m, grid, v2f, v2m in rows:
        inc = "" if prev is None else (v2m - prev[1]) / prev[1]
        table.rows.append([m, grid.spacing, cfg.counterexample_half_extent, grid.size, v2f, v2m, inc])
        if not _within(v2f, 4.0, 0.03):
            bad_f.append(f"m={m:g}: {v2f:.6g}")
        if prev is not None and not inc >= 0.01:
            bad_growth.append(f"m={prev[0]:g}->{m:g}: {prev[1]:.6g}->{v2m:.6g}")
        prev = (m, v2m)
    res.tables["counterexample"] = table
    res.check("V2_f_equals_4", not bad_f, [r[2] for r in rows], "4 +- 3%", "; ".join(bad_f))
    res.check("V2_Mf_increasing", not bad_growth, [r[3] for r in rows],
              ">= 1% increase per step", "; ".join(bad_growth))
    res.summary = {"norm": norm.label, "g": cfg.g,
                   "V2_Mf": {f"{r[0]:g}": r[3] for r in rows}}
    return res


def run_continuity(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("continuity")
    h_list = cfg.h_list or ([cfg.h] if cfg.h else [1 / 16, 1 / 32, 1 / 64])
    norm = (cfg.norms or [NormSpec.linf()])[0]
    corpus = cfg.corpus_for(2) if cfg.corpus is not None or cfg.random_corpus else [
        Square(1.0), Square(0.5), QuasiBall(0.5, 1.0), QuasiBall(1.0, 1.0),
        RadialDecreasing(NormSpec.lp(2), "step", (0.75,)),
    ]
    table = Table(["h", "function", "operator", "threshold", "jump_length_f", "jump_length_Mf", "status"])
    failures = []
    square_lengths = {}
    for h in h_list:
        grid = make_grid(2, cfg.half_extent, h)
        for spec in corpus:
            f = generate(spec, grid)
            thr = default_threshold(f)
            jf = jump_estimate(f, thr).total_length
            jm = jump_estimate(maximal(f, norm).as_grid_function(), thr).total_length
            ok = jm <= 0.05 * jf if jf > 0 else True
            if isinstance(spec, Square) and spec.side == 1.0 and norm.kind == "linf":
                ok = ok and jm == 0.0
                jc = jump_estimate(maximal_centered(f, norm).as_grid_function(), thr).total_length
                square_lengths[h] = (jm, jc)
                table.rows.append([h, spec.id, "centered", thr, jf, jc, "comparison"])
            table.rows.append([h, spec.id, "uncentered", thr, jf, jm, "ok" if ok else "FAIL"])
            if not ok:
                failures.append(f"h={h:g} f={spec.id}: {jm:.4g} vs {jf:.4g}")
    res.tables["jumps"] = table
    res.check("jump_length_reduced", not failures, len(failures),
              "Mf jump length <= 5% of f's (0 for the square)", "; ".join(failures))
    if square_lengths:
        finest = min(square_lengths)
        jc = square_lengths[finest][1]
        res.check("centered_square_jump_length", _within(jc, 4.0, 0.05), jc,
                  f"4 +- 5% at h={finest:g}")
    res.summary = {"norm": norm.label,
                   "square": {f"{h:g}": {"uncentered": v[0], "centered": v[1]}
                              for h, v in square_lengths.items()}}
    if norm.kind == "linf":
        _quasiball_persistence(cfg, res)
    return res


def _quasiball_persistence(cfg: ExperimentConfig, res: ExperimentResult) -> None:
    spec = QuasiBall(0.5, 1.0)
    extent = 1.5
    grid0 = make_grid(2, extent, cfg.oracle_h)
    delta0, node0 = quasiball_jump(linf_filter_oracle(generate(spec, grid0)), grid0)
    table = Table(["h", "jump", "x1", "x2", "delta0", "relative_error"])
    table.rows.append([cfg.oracle_h, delta0, *grid0.node(node0), delta0, 0.0])
    bad = []
    for h in cfg.quasiball_h:
        grid = make_grid(2, extent, h)
        mf = maximal_bd_pruned(generate(spec, grid), NormSpec.linf())
        jump, node = quasiball_jump(mf.values, grid)
        rel = abs(jump - delta0) / delta0 if delta0 > 0 else math.inf
        where = grid.node(node) if node is not None else (math.nan, math.nan)
        table.rows.append([h, jump, *where, delta0, rel])
        if not rel <= 0.2:
            bad.append(f"h={h:g}: jump {jump:.6g} vs delta0 {delta0:.6g}")
    res.tables["quasiball"] = table
    res.check("quasiball_jump_persists", delta0 > 0 and not bad, delta0,
              "within 20% of delta0", "; ".join(bad))
    res.summary["quasiball_delta0"] = delta0


def run_lipschitz_enk(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("lipschitz-enk")
    h = cfg.h or 1 / 32
    norms = cfg.norms_or(("linf", "l2"))
    caps = list(cfg.radius_caps) or [0.5, 1.0]
    corpus = cfg.corpus if cfg.corpus is not None else [
        Square(1.0), RadialDecreasing(NormSpec.lp(2), "exp", (1.0,)),
        RadialDecreasing(NormSpec.linf(), "exp", (1.0,)),
    ]
    grid = make_grid(cfg.dim, cfg.half_extent, h)
    d = cfg.dim
    table = Table(["set", "function", "norm", "n", "k_or_R", "pairs", "max_quotient", "bound", "status"])
    failures = []
    for spec in corpus:
        f = generate(spec, grid)
        v_upper = variation_directional(f, bd_sum=False).v_upper
        for norm in norms:
            mf = maximal(f, norm)
            c_mu = l2_comparison_constant(norm, d)
            for n in cfg.lipschitz_n:
                for k in cfg.lipschitz_k:
                    q = adjacent_quotients(mf, enk_classify(mf, n, k))
                    bound = c_mu * d * k * n
                    top = float(q.max()) if q.size else 0.0
                    ok = top <= bound * (1 + 1e-12)
                    table.rows.append(["E_nk", spec.id, norm.label, n, k, int(q.size), top, bound,
                                       "ok" if ok else "FAIL"])
                    if not ok:
                        failures.append(f"E_nk {spec.id} {norm.label} n={n:g} k={k:g}")
            vol = unit_ball_volume(norm, d)
            for cap in caps:
                mr = maximal(f, norm, cap)
                for n in cfg.lipschitz_n:
                    q = adjacent_quotients(mr, ern_classify(mr, n))
                    bound = n ** d * v_upper / vol
                    top = float(q.max()) if q.size else 0.0
                    ok = top <= bound * (1 + 1e-12)
                    table.rows.append(["E_Rn", spec.id, norm.label, n, cap, int(q.size), top, bound,
                                       "ok" if ok else "FAIL"])
                    if not ok:
                        failures.append(f"E_Rn {spec.id} {norm.label} n={n:g} R={cap:g}")
    res.tables["lipschitz"] = table
    res.check("lipschitz_bounds", not failures, len(failures), "all quotients within bound",
              "; ".join(failures[:10]))
    return res


def _oracle_cases(cfg: ExperimentConfig) -> list[tuple[int, float, float]]:
    if cfg.h_list or cfg.h:
        return [(cfg.dim, cfg.half_extent, h) for h in (cfg.h_list or [cfg.h])]
    return [(2, 2.0, 1 / 8), (3, 1.0, 1 / 8)]


def run_oracle_equivalence(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("oracle-equivalence")
    table = Table(["dim", "h", "function", "norm", "nodes", "mismatches"])
    detail = Table(["dim", "h", "function", "norm", "node", "pruned_value", "brute_value",
                    "pruned_center", "brute_center", "radius_pruned", "radius_brute"])
    total = 0
    for dim, extent, h in _oracle_cases(cfg):
        grid = make_grid(dim, extent, h)
        if grid.size > BRUTE_NODE_LIMIT:
            res.check(f"node_guard_d{dim}_h{h:g}", False, grid.size, f"<= {BRUTE_NODE_LIMIT}")
            continue
        rect = NormSpec.rect((2.0,) + (1.0,) * (dim - 1))
        norms = cfg.norms or [NormSpec.linf(), NormSpec.lp(1), NormSpec.lp(2), rect]
        for spec in cfg.corpus_for(dim):
            f = generate(spec, grid)
            for norm in norms:
                t0 = time.perf_counter()
                a = maximal_bd_pruned(f, norm, cfg.radius_cap)
                b = maximal_brute(f, norm, cfg.radius_cap)
                res.timings.append((f"d{dim}/h{h:g}/{spec.id}/{norm.label}", time.perf_counter() - t0))
                bad = np.argwhere(a.values != b.values)
                total += len(bad)
                table.rows.append([dim, h, spec.id, norm.label, grid.size, len(bad)])
                for node in bad[:10]:
                    ra, rb = a.record(node), b.record(node)
                    detail.rows.append([dim, h, spec.id, norm.label, " ".join(map(str, ra.node)),
                                        ra.value, rb.value, " ".join(map(str, ra.witness_center)),
                                        " ".join(map(str, rb.witness_center)),
                                        ra.witness_radius, rb.witness_radius])
    res.tables["equivalence"] = table
    if detail.rows:
        res.tables["mismatches"] = detail
    res.check("pruned_equals_brute", total == 0, total, "0 mismatches")
    res.summary = {"cases": len(table.rows), "mismatches": total}
    return res


def run_bench(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult("bench")
    norm = (cfg.norms or [NormSpec.linf()])[0]
    cap = cfg.radius_cap if cfg.radius_cap is not None else 0.25
    table = Table(["n", "d", "norm", "algo", "radius_cap", "seconds", "equal"])
    cases = [(n, cap) for n in cfg.bench_sizes] + [(n, None) for n in cfg.bench_uncapped]
    speedups = {}
    mismatched = []
    slow = []
    for n, c in cases:
        h = 2 * cfg.half_extent / (n - 1)
        grid = make_grid(2, cfg.half_extent, h)
        f = generate(Square(1.0), grid)
        t0 = time.perf_counter()
        a = maximal_bd_pruned(f, norm, c)
        t1 = time.perf_counter()
        b = maximal_brute(f, norm, c)
        t2 = time.perf_counter()
        equal = bool(np.array_equal(a.values, b.values))
        label = "none" if c is None else c
        table.rows.append([grid.counts[0], 2, norm.label, "bd-pruned", label, t1 - t0, equal])
        table.rows.append([grid.counts[0], 2, norm.label, "brute", label, t2 - t1, equal])
        speedups[f"{grid.counts[0]}/{label}"] = (t2 - t1) / max(t1 - t0, 1e-9)
        if not equal:
            mismatched.append(f"n={n} cap={label}")
        if c is None and max(t1 - t0, t2 - t1) >= 60:
            slow.append(f"n={n}")
    res.tables["bench"] = table
    largest = f"{max(cfg.bench_sizes)}/{cap}"
    s = speedups.get(largest, 0.0)
    res.check("outputs_equal", not mismatched, len(mismatched), "0", "; ".join(mismatched))
    res.check("speedup_at_largest", s >= 5.0, s, ">= 5 (soft target 20)")
    if cfg.bench_uncapped:
        res.check("uncapped_under_60s", not slow, len(slow), "all < 60 s", "; ".join(slow))
    res.summary = {"speedups": speedups, "soft_target_20x_met": s >= 20.0, "radius_cap": cap}
    return res


RUNNERS = {
    "square-demo": run_square_demo,
    "theorem1-sweep": run_theorem1_sweep,
    "counterexample": run_counterexample,
    "continuity": run_continuity,
    "lipschitz-enk": run_lipschitz_enk,
    "oracle-equivalence": run_oracle_equivalence,
    "bench": run_bench,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg)
