import numpy as np
import pytest

from maxreg import NormSpec, generate, make_grid, sample
from maxreg.bdgen import (
    Constant,
    QuasiBall,
    RadialDecreasing,
    Separable,
    Square,
    axis_jump_near,
    check_block_decreasing,
    default_corpus,
    default_threshold,
    is_unconditional,
    jump_estimate,
    line_window_sums_nonincreasing,
    normalized_g,
    parse_profile,
    precise_rep,
    random_corpus,
)
from maxreg.maxop import maximal_bd_pruned
from maxreg.norms import stencil
from maxreg.exact import IntegerImage


def test_generate_examples():
    g = make_grid(2, 2.0, 1 / 8)
    sq = generate(Square(1.0), g)
    assert set(np.unique(sq.values)) == {0.0, 1.0}
    qb = generate(QuasiBall(0.5, 1.0), g)
    assert qb.values[g.index_of((0.25, 0.25))] == 1.0
    assert qb.values[g.index_of((0.5, 0.125))] == 0.0
    assert qb.values[g.index_of((1.0, 0.0))] == 1.0
    sep = generate(Separable(4.0), g)
    assert sep.values[g.center_index] == 4.0


@pytest.mark.parametrize("bad", [
    lambda: Square(0.0), lambda: QuasiBall(1.5), lambda: QuasiBall(0.0),
    lambda: Separable(0.5), lambda: Separable(2.0, "constant"), lambda: Constant(0.0),
])
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        bad()


def test_normalized_g():
    from scipy import integrate

    # raw log-squared tail: exact 1 up to the crossover, then substitute v = log(e + u)
    cross = 5.0
    head, _ = integrate.quad(lambda u: min(1.0, 1.0 / (u * np.log(np.e + u) ** 2)) if u > 0 else 1.0,
                             0, cross, points=[0.5, 1.0], limit=200)
    tail, _ = integrate.quad(lambda v: 1.0 / ((1.0 - np.exp(1.0 - v)) * v * v),
                             np.log(np.e + cross), np.inf)
    slow = normalized_g("log2-tail")
    assert float(slow(0.0)) == 1.0
    assert slow.scale == pytest.approx(head + tail, rel=0.005)
    g = normalized_g("exp")
    assert float(g(0.0)) == 1.0
    u = np.linspace(0, 50, 200001)
    assert np.sum((g(u[1:]) + g(u[:-1])) / 2 * np.diff(u)) == pytest.approx(1.0, rel=0.005)
    with pytest.raises(ValueError):
        normalized_g("nope")


def test_corpus_is_block_decreasing():
    corpus = default_corpus(2)
    assert len(corpus) >= 12
    for dim, h in ((2, 1 / 16), (3, 1 / 4)):
        g = make_grid(dim, 1.0, h)
        for spec in default_corpus(dim):
            res = check_block_decreasing(generate(spec, g))
            assert res.passed and res.violations == [], spec.id


def test_check_reports_symmetry_violation():
    g = make_grid(2, 1.0, 0.25)
    f = sample(g, lambda x, y: x + 1.0 + 0 * y, 2.0)
    res = check_block_decreasing(f)
    assert not res
    assert res.violations[0]["kind"] == "symmetry"
    assert len(res.violations) <= 10
    assert not is_unconditional(f)


def test_check_reports_monotonicity_violation():
    g = make_grid(1, 1.0, 0.5)
    f = sample(g, lambda x: np.abs(x), 1.0)
    res = check_block_decreasing(f)
    assert not res.passed
    assert res.violations[0]["kind"] == "monotonicity"
    assert res.violations[0]["node"] == (2,)


def test_maximal_of_square_is_bd():
    g = make_grid(2, 2.0, 1 / 16)
    mf = maximal_bd_pruned(generate(Square(1.0), g), NormSpec.linf())
    assert check_block_decreasing(mf.as_grid_function()).passed


def test_precise_rep():
    g = make_grid(2, 1.0, 1 / 8)
    assert np.all(precise_rep(generate(Constant(2.0), g)).values == 2.0)
    sq = generate(Square(1.0), g)
    rep = precise_rep(sq)
    v = rep.values[g.index_of((0.5, 0.0))]
    assert 0 < v <= 1
    assert v == 1.0  # a 3x3 box inside the square touches the boundary node
    # best 3x3 box through (0.625, 0) is centered on the boundary column: 6 of 9 inside
    assert rep.values[g.index_of((0.625, 0.0))] == 2 / 3
    assert check_block_decreasing(rep).passed
    smooth = generate(RadialDecreasing(NormSpec.lp(2), "gauss", (1.0,)), g)
    osc = np.abs(np.diff(smooth.values, axis=0)).max() + np.abs(np.diff(smooth.values, axis=1)).max()
    assert np.abs(precise_rep(smooth).values - smooth.values).max() <= 2 * osc


def test_jump_estimate_square():
    g = make_grid(2, 2.0, 1 / 64)
    sq = generate(Square(1.0), g)
    est = jump_estimate(sq, 0.5)
    assert est.total_length == pytest.approx(4.0, rel=0.03)
    assert np.all(est.jumps >= 0.5)
    assert est.total_length == est.count * g.spacing
    mf = maximal_bd_pruned(sq, NormSpec.linf())
    assert jump_estimate(mf.as_grid_function(), 0.5).count == 0
    assert jump_estimate(generate(Constant(1.0), g), 0.1).count == 0
    with pytest.raises(ValueError):
        jump_estimate(sq, 0.0)


def test_jump_csv(tmp_path):
    g = make_grid(1, 1.0, 0.5)
    f = sample(g, lambda x: (np.abs(x) <= 0.5).astype(float), 1.0)
    est = jump_estimate(f, 0.5)
    est.write_csv(tmp_path / "j.csv")
    assert (tmp_path / "j.csv").read_text() == "face_axis,node_index,jump\n0,0,1.0\n0,3,1.0\n"


def test_default_threshold():
    g = make_grid(2, 1.0, 1 / 16)
    assert default_threshold(generate(Square(1.0), g)) == 0.25
    assert default_threshold(generate(RadialDecreasing(NormSpec.lp(2)), g)) == 10 / 16


def test_window_sums_nonincreasing():
    g = make_grid(2, 2.0, 1 / 16)
    for spec in default_corpus(2):
        f = generate(spec, g)
        for w in (1, 3, 8):
            assert line_window_sums_nonincreasing(f, w), spec.id


def test_ball_average_field_is_bd():
    g = make_grid(2, 1.0, 1 / 16)
    for spec in default_corpus(2)[:6]:
        f = generate(spec, g)
        for norm in (NormSpec.lp(2), NormSpec.lp(1)):
            st = stencil(norm, 3 * g.spacing, g)
            e = st.extent
            img = IntegerImage(np.pad(f.values, [(int(x), int(x)) for x in e], mode="edge"))
            avg = img.to_average(img.ball_sums(st, e, e + np.array(g.counts)), st.cell_count)
            assert check_block_decreasing(f.with_values(avg)).passed


def test_axis_jump_near():
    g = make_grid(1, 1.0, 0.25)
    vals = np.array([0, 0, 0, 1, 1, 1, 0.5, 0.5, 0])
    jump, node = axis_jump_near(vals, g, (0.5,), 0, 0.25)
    assert jump == 0.5 and node == (5,)


def test_parse_profile_and_random_corpus():
    assert parse_profile("square:0.5") == Square(0.5)
    assert parse_profile("quasiball:0.5/1") == QuasiBall(0.5, 1.0)
    assert parse_profile("radial:rect:2,1/exp/1").norm == NormSpec.rect((2, 1))
    assert parse_profile("separable:4/exp").m == 4
    assert parse_profile("constant:2") == Constant(2.0)
    with pytest.raises(ValueError):
        parse_profile("blob:1")
    a = random_corpus(8, seed=7)
    assert a == random_corpus(8, seed=7)
    assert a != random_corpus(8, seed=8)
    g = make_grid(2, 1.0, 1 / 8)
    for spec in a:
        assert check_block_decreasing(generate(spec, g)).passed
