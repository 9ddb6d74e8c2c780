import numpy as np
import pytest

from maxreg.grid import (
    Grid,
    GridFormatError,
    GridFunction,
    make_grid,
    read_csv,
    sample,
    write_csv,
)
from maxreg import Square, generate


def test_make_grid_1d_nodes():
    g = make_grid(1, [1.0], 0.5)
    assert g.counts == (5,)
    assert g.axis_nodes(0).tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_make_grid_counts_257():
    assert make_grid(2, [2, 2], 1 / 64).counts == (257, 257)


@pytest.mark.parametrize("args", [
    (2, [1, 1], 0.0),
    (2, [1, 1], -0.1),
    (0, [1], 0.5),
    (2, [1, -1], 0.5),
    (2, [1, 1], 2.0),
])
def test_make_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_grid_rejects_even_counts():
    with pytest.raises(ValueError):
        Grid(1, (1.0,), 0.5, (4,))


def test_node_coordinates_and_symmetry():
    g = make_grid(3, [1.0, 0.5, 0.75], 0.25)
    assert g.counts == (9, 5, 7)
    for ax in range(3):
        nodes = g.axis_nodes(ax)
        assert np.array_equal(nodes, -nodes[::-1])
        assert nodes[(g.counts[ax] - 1) // 2] == 0.0
    assert g.node(g.center_index).tolist() == [0.0, 0.0, 0.0]
    assert g.index_of((0.5, -0.25, 0.75)) == (6, 1, 6)
    with pytest.raises(ValueError):
        g.index_of((2.0, 0.0, 0.0))


def test_sample_constant():
    g = make_grid(2, 1.0, 0.25)
    f = sample(g, lambda x, y: 3.0 + 0 * x * y, ceiling=5.0)
    assert np.all(f.values == 3.0)


def test_sample_indicator_closed():
    g = make_grid(2, 2.0, 0.25)
    f = sample(g, lambda x, y: ((abs(x) <= 0.5) & (abs(y) <= 0.5)).astype(float), 1.0)
    assert set(np.unique(f.values)) == {0.0, 1.0}
    assert f.values[g.index_of((0.5, 0.5))] == 1.0
    assert f.values[g.index_of((0.75, 0.0))] == 0.0
    assert f.values.sum() == 25


def test_sample_ceiling_caps_singularity():
    g = make_grid(2, 1.0, 0.25)
    f = sample(g, lambda x, y: 1.0 / np.hypot(x, y), ceiling=1e6)
    assert f.values[g.center_index] == 1e6
    assert f.values[g.index_of((1.0, 0.0))] == 1.0


def test_sample_scalar_only_function_and_error_location():
    g = make_grid(1, 1.0, 0.5)
    f = sample(g, lambda x: float(max(0.0, 1 - abs(x))), 1.0)
    assert f.values.tolist() == [0.0, 0.5, 1.0, 0.5, 0.0]

    def bad(x):
        if x > 0.7:
            raise ArithmeticError("boom")
        return 1.0

    with pytest.raises(ValueError, match=r"1\.0"):
        sample(g, lambda x: bad(float(x)), 1.0)


def test_sample_rejects_negative():
    g = make_grid(1, 1.0, 0.5)
    with pytest.raises(ValueError, match="negative"):
        sample(g, lambda x: x, 1.0)


def test_gridfunction_validation():
    g = make_grid(1, 1.0, 0.5)
    with pytest.raises(ValueError):
        GridFunction(g, [0, 0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        GridFunction(g, [0, 0, 2, 0, 0], 1.0)
    with pytest.raises(ValueError):
        GridFunction(g, [0, -1, 0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        GridFunction(g, [0, np.nan, 0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        GridFunction(g, [0] * 5, 1.0, extension="periodic")
    f = GridFunction(g, [0, 1, 1, 1, 0], 1.0)
    with pytest.raises(ValueError):
        f.values[0] = 3.0


def test_csv_round_trip(tmp_path):
    g = make_grid(2, 1.0, 0.125)
    f = generate(Square(1.0), g).scaled(1 / 3)
    path = tmp_path / "sq.csv"
    write_csv(f, path)
    back = read_csv(path)
    assert back.grid == g
    assert np.array_equal(back.values, f.values)
    assert back.ceiling == f.ceiling
    assert path.read_text().startswith("# maxreg-grid v1 dim=2 counts=17,17 spacing=0.125")


def test_csv_round_trip_extension(tmp_path):
    g = make_grid(1, 1.0, 0.5)
    f = GridFunction(g, [0.1, 0.2, 0.3, 0.2, 0.1], 1.0, "zero")
    write_csv(f, tmp_path / "a.csv")
    assert read_csv(tmp_path / "a.csv").extension == "zero"


def _write(path, text):
    path.write_text(text)
    return path


def test_csv_count_mismatch(tmp_path):
    p = _write(tmp_path / "x.csv",
               "# maxreg-grid v1 dim=2 counts=3,3 spacing=0.5 half_extent=0.5,0.5 ceiling=1\n"
               "0,0,0\n0,1,0\n0,0\n")
    with pytest.raises(GridFormatError, match="9"):
        read_csv(p)


def test_csv_negative_value(tmp_path):
    p = _write(tmp_path / "x.csv",
               "# maxreg-grid v1 dim=1 counts=3 spacing=0.5 half_extent=0.5 ceiling=1\n0,-1,0\n")
    with pytest.raises(GridFormatError, match="negative"):
        read_csv(p)


@pytest.mark.parametrize("header", [
    "maxreg-grid v1 dim=1 counts=3 spacing=0.5 half_extent=0.5 ceiling=1",
    "# maxreg-grid v1 dim=1 counts=3 spacing=0.5 half_extent=0.5",
    "# maxreg-grid v1 dim=1 counts=4 spacing=0.5 half_extent=0.5 ceiling=1",
    "# maxreg-grid v1 dim=x counts=3 spacing=0.5 half_extent=0.5 ceiling=1",
])
def test_csv_bad_header(tmp_path, header):
    p = _write(tmp_path / "x.csv", header + "\n0,1,0\n")
    with pytest.raises(GridFormatError):
        read_csv(p)
