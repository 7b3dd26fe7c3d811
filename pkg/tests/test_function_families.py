#!/usr/bin/env python3
"""
Tests for analytic function families and their exact cell averages
"""
import sys
import os
import math

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from dyadic_grid import DyadicGrid  # noqa: E402
from function_families import (  # noqa: E402
    SmoothFunction,
    evaluate_parameter,
    parse_function,
    sample_function,
    unit_cube_power_mean,
)
from lab_errors import FunctionFamilyError, GridError  # noqa: E402


def _sample(function_id, n=1, resolution=6, lo=0.0, hi=1.0, variables=None):
    return sample_function(function_id, DyadicGrid(n), resolution, (lo,) * n, (hi,) * n, variables)


def test_identity_mean_is_one_half():
    """Cell averages of x have mean 1/2"""
    f = _sample("x", resolution=10)
    assert f.samples.mean() == pytest.approx(0.5, abs=1e-14)
    assert f.samples[0] == pytest.approx(2.0 ** -11)


def test_indicator_integral():
    """chi_[-1,1) integrates to 2 and its overlap cells are fractional"""
    f = _sample("charfn:-1:1", lo=-2.0, hi=2.0, resolution=4)
    assert f.integral() == pytest.approx(2.0)
    g = _sample("charfn:0.3:1", resolution=2)
    assert g.samples.tolist() == pytest.approx([0.0, 0.8, 1.0, 1.0])


def test_power_weight_origin_cell_is_exact():
    """|x|^(-1/2) keeps its exact blow-up on the origin cell"""
    f = _sample("power:-0.5", resolution=8)
    h = 2.0 ** -8
    assert f.samples[0] == pytest.approx(2.0 * h ** -0.5, rel=1e-12)
    assert f.integral() == pytest.approx(2.0, rel=1e-6)


def test_power_weight_two_dimensional_integral():
    """The integral of 1/|x| over [-1,1)^2 is 8 asinh(1)"""
    f = _sample("power:-1", n=2, resolution=6, lo=-1.0, hi=1.0)
    assert f.integral() == pytest.approx(8.0 * math.asinh(1.0), rel=1e-4)


def test_log_integral():
    """log|x| integrates to -1 over [0,1)"""
    f = _sample("log", resolution=8)
    assert f.samples[0] == pytest.approx(math.log(2.0 ** -8) - 1.0)
    assert f.integral() == pytest.approx(-1.0, rel=1e-6)


def test_power_log_origin_cell_closed_form():
    """The origin cell of |x|^a log|x| matches its one-dimensional antiderivative"""
    a, h = -0.5, 2.0 ** -4
    f = _sample("powerlogball:-0.5", resolution=4)
    expected = h ** a * (math.log(h) / (a + 1) - 1.0 / (a + 1) ** 2)
    assert f.samples[0] == pytest.approx(expected, rel=1e-8)


def test_haar_function_normalization():
    """Haar functions have mean zero and unit L2 norm"""
    f = _sample("haar:-1:1", resolution=6)
    assert f.integral() == pytest.approx(0.0, abs=1e-14)
    assert np.sum(f.samples ** 2) * f.cell_volume == pytest.approx(1.0)


def test_heaviside_and_coordinates():
    """Heaviside is one on the right half and coord:1 varies along axis 1"""
    f = _sample("heaviside", resolution=3, lo=-1.0, hi=1.0)
    assert f.samples.tolist() == [0.0] * 8 + [1.0] * 8
    g = _sample("coord:1", n=2, resolution=2)
    assert np.allclose(g.samples[0], [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(g.samples[:, 0], 0.125)


def test_expdelta_is_bounded():
    """exp(-|x|^delta) lies in (0, 1] on every cell"""
    f = _sample("expdelta:0.5", n=2, resolution=4, lo=-1.0, hi=1.0)
    assert np.all(f.samples > 0)
    assert np.all(f.samples <= 1.0)


@pytest.mark.parametrize("function_id, name", [("bump", "bump"), ("gauss:0.5", "gauss"), ("expdelta:0.5", "expdelta")])
def test_smooth_families_sample(function_id, name):
    """Pointwise families average to finite values in [0, 1]"""
    assert parse_function(function_id).name == name
    f = _sample(function_id, n=2, resolution=3, lo=-1.0, hi=1.0)
    assert np.all(np.isfinite(f.samples))
    assert np.all(f.samples >= 0.0)
    assert np.all(f.samples <= 1.0)
    assert f.samples.max() > 0.0


def test_smooth_function_defaults():
    """A bare pointwise callable gets the generic name and no origin refinement"""
    smooth = SmoothFunction(lambda *c: 1.0 + 0.0 * c[0])
    assert smooth.name == "smooth"
    assert not smooth.refine_origin
    f = sample_function(smooth, DyadicGrid(1), 4, (0.0,), (1.0,))
    assert np.allclose(f.samples, 1.0)


def test_random_piecewise_constant_is_seeded():
    """The same seed gives the same positive step function"""
    f = _sample("randpc:5:8", resolution=5)
    g = _sample("randpc:5:8", resolution=5)
    assert np.array_equal(f.samples, g.samples)
    assert np.all(f.samples > 0)
    assert len(np.unique(f.samples)) <= 8


def test_parameters_accept_expressions():
    """Parameters are arithmetic over named variables"""
    assert evaluate_parameter("(n-delta)/p'", {"n": 2, "delta": 0.2, "p'": 4}) == pytest.approx(0.45)
    assert evaluate_parameter("4/3") == pytest.approx(4.0 / 3.0)
    f = _sample("const:2*k", variables={"k": 1.5}, resolution=2)
    assert np.all(f.samples == 3.0)


@pytest.mark.parametrize("function_id", ["nope", "power:1:2", "charfn:1", "log:3", "const:__import__"])
def test_unknown_or_malformed_ids(function_id):
    """Unknown families and wrong parameter counts raise FunctionFamilyError"""
    with pytest.raises(FunctionFamilyError):
        parse_function(function_id)


def test_non_integrable_power_rejected():
    """|x|^a with a <= -n is not locally integrable"""
    with pytest.raises(FunctionFamilyError):
        _sample("power:-1")


def test_pieces_must_divide_cells():
    """randpc needs the piece count to divide the cells per axis"""
    with pytest.raises(FunctionFamilyError):
        _sample("randpc:1:3", resolution=4)


def test_singularity_off_vertex_rejected():
    """A singular family needs the origin on a cell vertex"""
    grid = DyadicGrid(1, shift=(1.0 / 32,))
    with pytest.raises(GridError):
        sample_function("power:-0.5", grid, 4, (1.0 / 32 - 1.0,), (1.0 / 32 + 1.0,))


def test_unit_cube_power_mean():
    """Closed form in one dimension and the a = 0 normalization in any dimension"""
    assert unit_cube_power_mean(1, -0.5) == pytest.approx(2.0)
    for n in (2, 3):
        assert unit_cube_power_mean(n, 0.0) == pytest.approx(1.0, rel=1e-10)
    # mean of |x|^2 over [0,1)^2 is 2/3
    assert unit_cube_power_mean(2, 2.0) == pytest.approx(2.0 / 3.0, rel=1e-10)
