#!/usr/bin/env python3
"""
Tests for dyadic cube geometry and sampled functions
"""
import sys
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from dyadic_grid import (  # noqa: E402
    Box,
    DyadicCube,
    DyadicGrid,
    LatticeCube,
    SampledFunction,
    average,
    cube_relatives,
    cubes_touching,
    tile_blocks,
    untile_blocks,
)
from lab_errors import GridError, NonFiniteSamplesError  # noqa: E402


def _line(samples, lo=0.0, hi=1.0, resolution=None):
    samples = np.asarray(samples, dtype=float)
    if resolution is None:
        resolution = int(np.log2(samples.size / (hi - lo)))
    return SampledFunction.from_box(DyadicGrid(1), resolution, (lo,), (hi,), samples)


def test_average_of_constant():
    """A constant averages to itself on the unit cube"""
    grid = DyadicGrid(1)
    f = SampledFunction.from_box(grid, 10, (0.0,), (1.0,), np.full(1024, 5.0))
    assert average(f, DyadicCube(grid, 0, (0,))) == 5.0


def test_average_of_identity_midpoints():
    """Cell averages of x on [0,1) average to exactly one half"""
    h = 2.0 ** -10
    f = _line((np.arange(1024) + 0.5) * h)
    assert average(f, DyadicCube(f.grid, 0, (0,))) == pytest.approx(0.5, abs=1e-15)


def test_average_of_indicator_on_larger_domain():
    """chi_[0,1) on [0,2) averages to 1/2 over [0,2)"""
    f = _line(np.r_[np.ones(512), np.zeros(512)], 0.0, 2.0, resolution=9)
    assert average(f, DyadicCube(f.grid, 1, (0,))) == 0.5


def test_average_rejects_bad_cubes():
    """Cubes outside the domain or finer than a cell raise GridError"""
    f = _line(np.ones(16))
    with pytest.raises(GridError):
        average(f, DyadicCube(f.grid, 0, (1,)))
    with pytest.raises(GridError):
        average(f, DyadicCube(f.grid, -6, (0,)))
    with pytest.raises(GridError):
        average(f, LatticeCube((0.01,), 0.25))


def test_cube_relatives_examples():
    """Zero-fold ancestor, two-fold ancestor and parent of unit intervals"""
    grid = DyadicGrid(1)
    unit = DyadicCube(grid, 0, (0,))
    assert cube_relatives(unit, 0).ancestor == unit
    four = cube_relatives(unit, 2).ancestor
    assert (four.lo, four.hi) == ((0.0,), (4.0,))
    parent = cube_relatives(DyadicCube(grid, 0, (1,)), 1).parent
    assert (parent.lo, parent.side) == ((0.0,), 2.0)


def test_children_partition_cube():
    """The 2^n children have half the side and sit inside the cube"""
    grid = DyadicGrid(3)
    cube = DyadicCube(grid, 2, (1, -1, 0))
    relatives = cube_relatives(cube, 3)
    assert len(relatives.children) == 8
    assert len({c.index for c in relatives.children}) == 8
    assert all(cube.contains(c) for c in relatives.children)
    assert sum(c.volume for c in relatives.children) == cube.volume
    assert relatives.ancestor.volume == 2 ** 9 * cube.volume
    assert relatives.ancestor.contains(cube)


def test_cubes_touching_enumerations():
    """Dyadic tilings of small domains are enumerated once each"""
    grid = DyadicGrid(1)
    found = list(cubes_touching(grid, Box((0.0,), (1.0,)), [0]))
    assert [(c.lo, c.side) for c in found] == [((0.0,), 1.0)]
    found = list(cubes_touching(grid, Box((0.0,), (1.0,)), [-1, 0]))
    assert [(c.lo, c.side) for c in found] == [((0.0,), 0.5), ((0.5,), 0.5), ((0.0,), 1.0)]
    squares = list(cubes_touching(DyadicGrid(2), Box((0.0, 0.0), (2.0, 2.0)), [0]))
    assert len(squares) == 4
    assert list(cubes_touching(grid, Box((0.0,), (1.0,)), [])) == []


def test_shifted_grid_cube_geometry():
    """Cubes of r*D^beta are translated and scaled copies"""
    grid = DyadicGrid(1, scale=0.5, shift=(0.25,))
    cube = DyadicCube(grid, 1, (2,))
    assert cube.side == 1.0
    assert cube.lo == pytest.approx((0.5 * (2.0 * 2 + 0.25),))
    assert grid.cube_at((cube.lo[0] + 0.3,), 1) == cube


def test_invalid_grids_raise():
    """Non-positive dimension or scale and bad shift lengths raise GridError"""
    with pytest.raises(GridError):
        DyadicGrid(0)
    with pytest.raises(GridError):
        DyadicGrid(1, scale=0.0)
    with pytest.raises(GridError):
        DyadicGrid(2, shift=(0.0,))


def test_non_finite_samples_rejected():
    """NaN samples are refused at construction"""
    with pytest.raises(NonFiniteSamplesError):
        _line([1.0, np.nan, 2.0, 3.0], resolution=2)


def test_from_box_requires_cell_vertices():
    """Domain corners off the cell lattice raise GridError"""
    with pytest.raises(GridError):
        SampledFunction.from_box(DyadicGrid(1), 4, (0.01,), (1.0,))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 16 - 1), st.integers(min_value=1, max_value=2))
def test_partition_additivity(seed, n):
    """A cube average is the mean of its children's averages"""
    rng = np.random.default_rng(seed)
    resolution = 4
    grid = DyadicGrid(n)
    f = SampledFunction.from_box(grid, resolution, (0.0,) * n, (1.0,) * n,
                                 rng.normal(size=(16,) * n))
    level = int(rng.integers(-3, 1))
    index = tuple(int(i) for i in rng.integers(0, 2 ** -level, size=n))
    cube = DyadicCube(grid, level, index)
    children = [average(f, c) for c in cube.children()]
    assert average(f, cube) == pytest.approx(np.mean(children), abs=1e-12)


def test_integral_linearity_and_positivity():
    """Integrals are linear and nonnegative functions integrate nonnegatively"""
    rng = np.random.default_rng(7)
    f = _line(rng.random(64))
    g = _line(rng.normal(size=64))
    combo = f.with_samples(2.0 * f.samples - 3.0 * g.samples)
    assert combo.integral() == pytest.approx(2.0 * f.integral() - 3.0 * g.integral())
    assert f.integral() >= 0
    assert f.integral() == pytest.approx(f.samples.sum() * f.cell_volume)


def test_shift_consistency():
    """Averages on a cell-aligned shifted grid match translated samples"""
    rng = np.random.default_rng(3)
    values = rng.random(32)
    shifted = DyadicGrid(1, shift=(0.25,))
    f = SampledFunction.from_box(shifted, 4, (0.25,), (2.25,), values)
    g = SampledFunction.from_box(DyadicGrid(1), 4, (0.0,), (2.0,), values)
    for level, index in ((0, (0,)), (0, (1,)), (-2, (3,)), (1, (0,))):
        assert average(f, DyadicCube(shifted, level, index)) == pytest.approx(
            average(g, DyadicCube(g.grid, level, index)))


def test_csv_layout(tmp_path):
    """CSV files hold the header row and one row per cell"""
    f = SampledFunction.from_box(DyadicGrid(2), 2, (0.0, 0.0), (1.0, 1.0), np.arange(16.0))
    path = tmp_path / "f.csv"
    f.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == ["2", "2", "0.0", "0.0", "1.0", "1.0"]
    assert len(lines) == 17
    back = SampledFunction.from_csv(path)
    assert back.same_cells(f)
    assert np.array_equal(back.samples, f.samples)


def test_malformed_csv(tmp_path):
    """A cell count that disagrees with the header raises GridError"""
    path = tmp_path / "bad.csv"
    path.write_text("1,2,0.0,1.0\n1.0\n2.0\n", encoding="utf-8")
    with pytest.raises(GridError):
        SampledFunction.from_csv(path)


def test_tile_blocks_inverse():
    """Tiling into blocks and untiling recovers the array"""
    array = np.arange(64.0).reshape(8, 8)
    tiles = tile_blocks(array, 4)
    assert tiles.shape == (4, 4, 4)
    assert np.array_equal(tiles[1], array[:4, 4:])
    assert np.array_equal(untile_blocks(tiles, array.shape), array)


def test_dyadic_level_range():
    """Finest and coarsest dyadic levels fitting the unit square"""
    f = SampledFunction.from_box(DyadicGrid(2), 5, (0.0, 0.0), (1.0, 1.0))
    assert f.dyadic_level_range() == (-5, 0)
