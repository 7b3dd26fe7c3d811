#!/usr/bin/env python3
"""
Tests for the Hilbert transform, Haar shifts, fractional integrals and commutators
"""
import sys
import os
import math

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from dyadic_grid import DyadicCube, DyadicGrid  # noqa: E402
from function_families import sample_function  # noqa: E402
from integral_operators import (  # noqa: E402
    CommutatorSpec,
    DyadicFracIntegral,
    FracIntegral,
    HaarShift,
    HilbertTransform,
    commutator_apply,
    commutator_cauchy,
    dyadic_cube_indicator,
    frac_integral,
    frac_integral_dyadic,
    haar_shift_apply,
    haar_shift_truncated_max,
    hilbert,
    modular_endpoint_ratio,
    operator_norm_estimate,
    parse_operator,
    yano_ratio,
)
from lab_errors import GridError, OperatorError  # noqa: E402

BACKENDS = [HilbertTransform(), HaarShift.petermichl(), FracIntegral(0.5), DyadicFracIntegral(0.5)]


def _unit(function_id, resolution=6, n=1):
    return sample_function(function_id, DyadicGrid(n), resolution, (0.0,) * n, (1.0,) * n)


def _relative_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_petermichl_shift_on_haar_function():
    """h_I goes to 2^(-1/2)(h_I- - h_I+)"""
    shift = HaarShift.petermichl()
    image = shift.apply(_unit("haar:-1:0"))
    expected = (_unit("haar:-2:0").samples - _unit("haar:-2:1").samples) / math.sqrt(2.0)
    assert np.allclose(image.samples, expected, rtol=0, atol=1e-12)


def test_petermichl_shift_kills_constants():
    """Constants have no Haar coefficients"""
    image = HaarShift.petermichl().apply(_unit("const:1", resolution=8))
    assert np.abs(image.samples).max() == 0.0


def test_truncated_max_dominates_the_shift():
    """The maximal truncation is at least |Sf| and equals it for a single Haar function"""
    shift = HaarShift.petermichl()
    f = _unit("randpc:4:16")
    assert np.all(haar_shift_truncated_max(shift, f).samples >= np.abs(shift.apply(f).samples) - 1e-12)
    h = _unit("haar:-1:0")
    assert np.allclose(haar_shift_truncated_max(shift, h).samples, np.abs(shift.apply(h).samples))


def test_haar_shift_norm_is_resolution_stable():
    """The L2 norm estimate of the Petermichl shift does not drift with L"""
    values = []
    for resolution in (8, 10, 12):
        estimate = operator_norm_estimate(HaarShift.petermichl(), _unit("const:0", resolution))
        values.append(estimate.value)
    assert max(values) / min(values) <= 1.1
    assert values[0] == pytest.approx(1.0, rel=1e-6)


def test_haar_shift_rejects_bad_patterns():
    """Coefficient patterns need mean zero and the right shape"""
    with pytest.raises(OperatorError):
        HaarShift(1, np.array([1.0, 1.0]), np.array([1.0, -1.0]))
    with pytest.raises(OperatorError):
        HaarShift(2, np.array([1.0, -1.0]), np.array([1.0, -1.0]))
    with pytest.raises(OperatorError):
        HaarShift.petermichl(window=(-8, 0)).apply(_unit("x", resolution=6))


@pytest.mark.parametrize("x", [1.5, 2.0, 3.0])
def test_hilbert_transform_of_indicator(x):
    """H chi_[-1,1](x) = (1/pi) log|(x+1)/(x-1)|"""
    resolution = 12
    f = sample_function("charfn:-1:1", DyadicGrid(1), resolution, (-4.0,), (4.0,))
    image = HilbertTransform().apply(f)
    cell = int((x + 4.0) * 2 ** resolution)
    exact = math.log(abs((x + 1.0) / (x - 1.0))) / math.pi
    assert image.samples[cell] == pytest.approx(exact, rel=0.01)


def test_hilbert_transform_squares_to_minus_identity():
    """H(Hf) is close to -f for a smooth bump"""
    f = sample_function("oddbump", DyadicGrid(1), 12, (-8.0,), (8.0,))
    H = HilbertTransform()
    twice = H.apply(H.apply(f))
    assert _relative_l2(twice.samples, -f.samples) <= 0.05


def test_hilbert_transform_is_one_dimensional():
    """Two-dimensional input is refused"""
    with pytest.raises(OperatorError):
        HilbertTransform().apply(_unit("const:1", resolution=3, n=2))


def test_dyadic_fractional_integral_of_constant():
    """Each cell collects |Q|^alpha from every dyadic cube above it"""
    image = DyadicFracIntegral(0.5).apply(_unit("const:1", resolution=3))
    expected = sum(2.0 ** (0.5 * k) for k in range(-3, 1))
    assert np.allclose(image.samples, expected)


def test_riesz_potential_of_indicator():
    """I_1/2 chi_[0,1)(x) = 2(sqrt(x) + sqrt(1-x)) away from the endpoints"""
    resolution = 8
    image = FracIntegral(0.5).apply(_unit("const:1", resolution=resolution))
    cell = 2 ** (resolution - 1)
    x = (cell + 0.5) * 2.0 ** -resolution
    assert image.samples[cell] == pytest.approx(2 * (math.sqrt(x) + math.sqrt(1 - x)), rel=1e-3)


def test_fractional_order_must_be_below_dimension():
    """alpha in (0, n)"""
    with pytest.raises(OperatorError):
        FracIntegral(1.0).apply(_unit("x"))
    with pytest.raises(OperatorError):
        DyadicFracIntegral(0.0).apply(_unit("x"))


@pytest.mark.parametrize("operator", BACKENDS, ids=lambda op: op.describe())
def test_commutator_with_constant_symbol_vanishes(operator):
    """[c, T] f = 0 exactly"""
    spec = CommutatorSpec(_unit("const:3"), operator)
    f = _unit("randpc:7:8")
    assert np.all(commutator_apply(spec, f).samples == 0.0)
    assert np.all(commutator_cauchy(spec, f).samples == 0.0)


@pytest.mark.parametrize("operator", BACKENDS, ids=lambda op: op.describe())
def test_cauchy_contour_matches_direct_commutator(operator):
    """The contour integral reproduces b Tf - T(bf)"""
    spec = CommutatorSpec(_unit("x", resolution=8), operator)
    f = _unit("gauss:0.3", resolution=8)
    direct = commutator_apply(spec, f).samples
    contour = commutator_cauchy(spec, f, epsilon=0.05, nodes=32).samples
    assert _relative_l2(contour, direct) <= 0.01


def test_commutator_needs_matching_cells():
    """Symbol and function must share cells"""
    spec = CommutatorSpec(_unit("x", resolution=5), HilbertTransform())
    with pytest.raises(GridError):
        commutator_apply(spec, _unit("x", resolution=6))


def test_cauchy_contour_needs_nodes():
    """Fewer than 8 nodes is refused"""
    spec = CommutatorSpec(_unit("x"), HilbertTransform())
    with pytest.raises(OperatorError):
        commutator_cauchy(spec, _unit("x"), epsilon=0.05, nodes=4)


def test_parse_operator():
    """Operator ids build the matching backends"""
    assert isinstance(parse_operator("hilbert"), HilbertTransform)
    assert parse_operator("ialpha:0.5") == FracIntegral(0.5)
    assert parse_operator("ialphad:0.25") == DyadicFracIntegral(0.25)
    assert parse_operator("haarshift:petermichl").tau == 2
    for text in ("haarshift:other", "ialpha:x", "riesz"):
        with pytest.raises(OperatorError):
            parse_operator(text)


def test_yano_ratio_is_finite_on_a_cube():
    """Averages of |Hf| over Q are controlled by the L log L norm of f"""
    f = _unit("const:0", resolution=8)
    cube = DyadicCube(f.grid, -2, (1,))
    ratio = yano_ratio(HilbertTransform(), dyadic_cube_indicator(f, cube), cube)
    assert 0 < ratio < math.inf


def test_modular_endpoint_ratio():
    """The level-set ratio is finite and vanishes for constant symbols"""
    f = _unit("randpc:5:16", resolution=8)
    spec = CommutatorSpec(_unit("x", resolution=8), HaarShift.petermichl())
    assert 0 <= modular_endpoint_ratio(spec, f, 0.05) < math.inf
    flat = CommutatorSpec(_unit("const:2", resolution=8), HaarShift.petermichl())
    assert modular_endpoint_ratio(flat, f, 0.05) == 0.0


def test_functional_forms_match_operators():
    """The function wrappers apply the same backends"""
    f = _unit("randpc:11:16")
    assert np.array_equal(hilbert(f).samples, HilbertTransform().apply(f).samples)
    assert np.array_equal(frac_integral(f, 0.5).samples, FracIntegral(0.5).apply(f).samples)
    assert np.array_equal(frac_integral_dyadic(f, 0.5).samples, DyadicFracIntegral(0.5).apply(f).samples)
    shift = HaarShift.petermichl()
    assert np.array_equal(haar_shift_apply(shift, f).samples, shift.apply(f).samples)
