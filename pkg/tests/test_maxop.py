from fractions import Fraction

import numpy as np
import pytest

import maxreg.maxop as maxop
from maxreg import (
    Constant,
    GridFunction,
    NormSpec,
    QuasiBall,
    RadialDecreasing,
    Square,
    generate,
    make_grid,
    mu,
    sample,
    stencil,
)
from maxreg.bdgen import default_corpus, is_block_decreasing
from maxreg.maxop import (
    ExtensionMismatchError,
    NotBlockDecreasingError,
    adjacent_quotients,
    ball_average,
    enk_classify,
    ern_classify,
    maximal_at,
    maximal_bd_pruned,
    maximal_brute,
    maximal_centered,
    resolve_extension,
)

from conftest import FOUR_NORMS


def _indicator_1d(a, b, h=1 / 8, extent=2.0):
    g = make_grid(1, extent, h)
    return sample(g, lambda x: ((x >= a) & (x <= b)).astype(float), 1.0)


def test_ball_average_examples(square16):
    g = make_grid(2, 2.0, 0.25)
    f = generate(Square(1.0), g)
    c = g.center_index
    assert ball_average(f, c, stencil(NormSpec.linf(), 0.5, g)) == 1.0
    assert ball_average(f, c, stencil(NormSpec.linf(), 1.0, g)) == 25 / 81
    const = generate(Constant(2.5), g)
    assert ball_average(const, (0, 0), stencil(NormSpec.lp(2), 1.0, g)) == 2.5


def test_ball_average_extension_rules():
    g = make_grid(1, 1.0, 0.5)
    f = GridFunction(g, [1.0, 1.0, 1.0, 1.0, 1.0], 1.0)
    st = stencil(NormSpec.linf(), 1.0, g)
    assert ball_average(f, (0,), st, "constant") == 1.0
    assert ball_average(f, (0,), st, "zero") == 3 / 5


def test_constant_function_is_fixed():
    g = make_grid(2, 1.0, 0.125)
    f = generate(Constant(3.0), g)
    for fn in (maximal_brute, maximal_bd_pruned, maximal_centered):
        assert np.all(fn(f, NormSpec.lp(2)).values == 3.0)


def _brute_1d_fraction(a_idx, b_idx, x, n, kmax):
    """Exact maximal value of a 1D indicator by enumeration (zero extension)."""
    best = Fraction(0)
    for k in range(1, kmax + 1):
        for c in range(max(-n, x - k), min(n, x + k) + 1):
            inside = sum(1 for j in range(c - k, c + k + 1) if -n <= j <= n and a_idx <= j <= b_idx)
            best = max(best, Fraction(inside, 2 * k + 1))
    return best


def test_brute_1d_indicator_against_enumeration():
    f = _indicator_1d(0.0, 1.0)
    mf = maximal_brute(f, NormSpec.linf())
    assert mf.extension == "zero"
    rec = mf.record(f.grid.index_of((-1.0,)))
    # frozen: 9/17, attained by the radius-1 interval centered at 0
    assert rec.value == 9 / 17
    assert rec.witness_center == f.grid.index_of((0.0,))
    assert rec.witness_radius == 1.0
    for x in range(-16, 17, 3):
        want = _brute_1d_fraction(0, 8, x, 16, 16)
        assert mf.values[x + 16] == float(want)
    # continuum value at -1 is 1/2; the discrete value overshoots by O(h)
    assert abs(rec.value - 0.5) < 2 * f.grid.spacing


def test_square_at_origin_and_at_1_0(square16):
    g = square16.grid
    for fn in (maximal_brute, maximal_bd_pruned):
        mf = fn(square16, NormSpec.linf())
        assert mf.values[g.center_index] == 1.0
        rec = mf.record(g.index_of((1.0, 0.0)))
        # frozen 9/17 from exact enumeration of all boxes containing (1, 0)
        assert rec.value == 9 / 17
        assert rec.witness_center == g.index_of((0.5, 0.0))
        assert rec.witness_radius == 0.5


def test_pruned_single_candidate_matches_brute_at_1_0(square16):
    node = square16.grid.index_of((1.0, 0.0))
    [rec] = maximal_at(square16, [node], NormSpec.linf())
    pruned = maximal_bd_pruned(square16, NormSpec.linf()).record(node)
    assert rec.value == pruned.value
    assert rec.witness_center == pruned.witness_center


@pytest.mark.parametrize("norm", FOUR_NORMS, ids=lambda n: n.label)
def test_pruned_equals_brute_corpus_h16(norm):
    g = make_grid(2, 1.0, 1 / 16)
    for spec in default_corpus(2):
        f = generate(spec, g)
        a = maximal_bd_pruned(f, norm)
        b = maximal_brute(f, norm)
        assert np.array_equal(a.values, b.values), spec.id
        assert np.array_equal(a.radii, b.radii), spec.id


def _check_witnesses(mf, f, sample_nodes):
    g = f.grid
    h = g.spacing
    for node in sample_nodes:
        rec = mf.record(node)
        st = stencil(mf.norm, rec.witness_radius, g)
        offset = (np.array(rec.node) - np.array(rec.witness_center)) * h
        assert mu(mf.norm, offset) <= rec.witness_radius * (1 + 1e-12)
        ref = ball_average(f, rec.witness_center, st, mf.extension)
        assert rec.value == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("fn", [maximal_brute, maximal_bd_pruned, maximal_centered])
def test_witness_invariants(fn):
    g = make_grid(2, 1.0, 1 / 8)
    rng = np.random.default_rng(0)
    nodes = [tuple(int(v) for v in rng.integers(0, 17, size=2)) for _ in range(25)]
    for spec in (Square(1.0), QuasiBall(0.5, 1.0), RadialDecreasing(NormSpec.lp(2), "exp", (1.0,))):
        f = generate(spec, g)
        for norm in FOUR_NORMS:
            _check_witnesses(fn(f, norm), f, nodes)


def test_brute_tie_break_smallest_radius_then_center():
    g = make_grid(2, 1.0, 1 / 8)
    f = generate(Square(1.0), g)
    mf = maximal_brute(f, NormSpec.linf())
    node = g.index_of((0.5, 0.5))
    rec = mf.record(node)
    assert rec.value == 1.0
    assert rec.witness_radius == g.spacing
    # smallest radius h; among centers whose 3x3 box stays in the square, the lexicographically first
    assert rec.witness_center == g.index_of((0.375, 0.375))


def test_maximal_at_agrees_with_brute():
    g = make_grid(2, 1.0, 1 / 8)
    f = sample(g, lambda x, y: np.exp(-((x - 0.3) ** 2) - 2 * y * y), 1.0)
    mf = maximal_brute(f, NormSpec.lp(2))
    nodes = [(0, 0), (3, 12), (8, 8), (16, 1)]
    for rec in maximal_at(f, nodes, NormSpec.lp(2)):
        assert rec.value == mf.values[rec.node]
        assert rec.witness_radius == mf.radii[rec.node]
        assert rec.witness_center == tuple(mf.centers[rec.node])


def test_pruned_rejects_non_bd():
    g = make_grid(2, 1.0, 0.25)
    f = sample(g, lambda x, y: x + 1.0, 2.0)
    with pytest.raises(NotBlockDecreasingError, match="symmetry"):
        maximal_bd_pruned(f, NormSpec.linf())


def test_extension_resolution_and_mismatch():
    g = make_grid(1, 1.0, 0.5)
    bd = GridFunction(g, [0, 1, 2, 1, 0], 2.0)
    skew = GridFunction(g, [0, 1, 2, 2, 0], 2.0)
    assert resolve_extension(bd) == "constant"
    assert resolve_extension(skew) == "zero"
    pinned = GridFunction(g, [0, 1, 2, 1, 0], 2.0, "zero")
    assert resolve_extension(pinned) == "zero"
    with pytest.raises(ExtensionMismatchError):
        maximal_brute(pinned, NormSpec.linf(), extension="constant")
    with pytest.raises(ValueError):
        resolve_extension(bd, "reflect")


def test_centered_below_uncentered_outside_square():
    g = make_grid(2, 2.0, 1 / 32)
    f = generate(Square(1.0), g)
    node = g.index_of((0.5 + 1 / 32, 0.0))
    c = maximal_centered(f, NormSpec.linf()).values[node]
    u = maximal_brute(f, NormSpec.linf(), radius_cap=1.0).values[node]
    assert c < u


def test_centered_1d_at_endpoint():
    f = _indicator_1d(0.0, 1.0, h=1 / 64, extent=2.0)
    x = f.grid.index_of((0.0,))
    # radius kh holds k + 1 of its 2k + 1 nodes: the k = 1 ball wins with 2/3
    assert maximal_centered(f, NormSpec.linf()).values[x] == 2 / 3
    # the continuum value 1/2 is the limit of averages over radii >> h
    st = stencil(NormSpec.linf(), 0.5, f.grid)
    assert ball_average(f, x, st) == pytest.approx(0.5, abs=1 / 64)


def test_local_operator_cap_and_monotonicity(square16):
    m_small = maximal_bd_pruned(square16, NormSpec.lp(2), radius_cap=0.25)
    m_big = maximal_bd_pruned(square16, NormSpec.lp(2), radius_cap=1.0)
    m_all = maximal_bd_pruned(square16, NormSpec.lp(2))
    assert m_small.radii.max() <= 0.25
    assert np.all(m_small.values <= m_big.values)
    assert np.all(m_big.values <= m_all.values)


def test_enk_and_ern_classify(square16):
    mf = maximal_bd_pruned(square16, NormSpec.linf())
    assert enk_classify(mf, 1000, mf.values.max()).all()
    mask0 = enk_classify(mf, 1, 0.0)
    assert not np.any(mask0 & (mf.values > 0))
    ring = enk_classify(mf, 1, 0.5)
    assert ring.any()
    assert not ring[square16.grid.center_index]
    with pytest.raises(ValueError):
        ern_classify(mf, 1)
    local = maximal_bd_pruned(square16, NormSpec.linf(), radius_cap=0.5)
    assert ern_classify(local, 1).sum() == 0
    assert ern_classify(local, 4).any()


def test_adjacent_quotients_simple():
    g = make_grid(1, 1.0, 0.5)
    f = GridFunction(g, [0, 1, 3, 1, 0], 3.0)
    mf = maximal_centered(f, NormSpec.linf(), radius_cap=0.5)
    q = adjacent_quotients(mf, np.ones(5, dtype=bool))
    assert q.size == 4


def test_witness_csv(tmp_path, square16):
    mf = maximal_bd_pruned(square16, NormSpec.linf())
    path = tmp_path / "w.csv"
    mf.write_witness_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "node_index,center_index,radius,value"
    assert len(lines) == square16.grid.size + 1
    node, center, radius, value = lines[1].split(",")
    assert int(node) == 0 and float(value) == mf.values[0, 0]
    assert mf.as_grid_function().extension == "constant"


def test_mutated_clamp_is_detected(monkeypatch):
    g = make_grid(2, 2.0, 1 / 8)
    f = generate(Square(1.0), g)
    original = maxop._clamp_centers

    def flipped(cone_index, offset):
        out = original(cone_index, offset)
        return np.where(cone_index == 9, np.minimum(out + 1, len(cone_index) - 1), out)

    monkeypatch.setattr(maxop, "_clamp_centers", flipped)
    bad = maximal_bd_pruned(f, NormSpec.linf())
    ref = maximal_brute(f, NormSpec.linf())
    assert np.count_nonzero(bad.values != ref.values) >= 1


def test_pruned_3d_matches_brute():
    g = make_grid(3, 1.0, 1 / 8)
    f = generate(Square(1.0), g)
    for norm in (NormSpec.linf(), NormSpec.lp(2)):
        assert np.array_equal(maximal_bd_pruned(f, norm).values, maximal_brute(f, norm).values)
    assert is_block_decreasing(maximal_bd_pruned(f, NormSpec.lp(1)).as_grid_function())
