#!/usr/bin/env python3
"""
Tests for BMO, A_p, A_{p,q} and bump constants and for factored weight pairs
"""
import sys
import os

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from cube_families import CubeFamily  # noqa: E402
from dyadic_grid import DyadicGrid  # noqa: E402
from function_families import sample_function  # noqa: E402
from lab_errors import WeightError, YoungFunctionError  # noqa: E402
from orlicz import Composed, LogBump, Power  # noqa: E402
from weight_constants import (  # noqa: E402
    WeightPair,
    ap_constant,
    apq_constant,
    bmo_constant,
    bmo_norm,
    bump_constant,
    bump_products,
    expL_bmo_check,
    factored_pair,
    reverse_factorization_functions,
)


def _sample(function_id, resolution=6, lo=0.0, hi=1.0, n=1):
    return sample_function(function_id, DyadicGrid(n), resolution, (lo,) * n, (hi,) * n)


def test_bmo_of_heaviside():
    """The step at 0 oscillates by 1/2 on [-1,1)"""
    constant = bmo_constant(_sample("heaviside", lo=-1.0))
    assert constant.value == pytest.approx(0.5)
    assert constant.argmax_cube["lo"] == pytest.approx([-1.0])
    assert constant.to_dict()["label"] == "lattice constant"


def test_bmo_of_constant_is_zero():
    """Constants have no oscillation"""
    assert bmo_norm(_sample("const:7")) == 0.0


def test_larger_family_never_lowers_constants():
    """Adding translated cubes can only raise a supremum"""
    b = _sample("log", resolution=7)
    dyadic = bmo_norm(b, CubeFamily.dyadic_only())
    everything = bmo_norm(b, CubeFamily.all_cubes(b))
    assert everything >= dyadic


def test_ap_constant_of_constant_weight():
    """[c]_{A_p} = 1"""
    assert ap_constant(_sample("const:3"), 2.0).value == pytest.approx(1.0)
    assert ap_constant(_sample("const:0.5", n=2, resolution=3), 3.0).value == pytest.approx(1.0)


def test_ap_constant_is_at_least_one():
    """Jensen keeps every A_p product above 1"""
    rng = np.random.default_rng(5)
    for seed in range(10):
        w = _sample(f"randpc:{seed}:16:4", resolution=5)
        p = float(rng.uniform(1.2, 4.0))
        assert ap_constant(w, p).value >= 1.0 - 1e-12


def test_apq_matches_ap_of_power():
    """[w]_{A_{p,q}} = [w^q]_{A_{1+q/p'}}"""
    p, q = 1.5, 4.0
    pc = p / (p - 1.0)
    for seed in range(5):
        w = _sample(f"randpc:{seed}:8:3", resolution=6)
        left = apq_constant(w, p, q).value
        right = ap_constant(w.with_samples(w.samples ** q), 1.0 + q / pc).value
        assert left == pytest.approx(right, rel=1e-6)


def test_weight_errors():
    """Weights vanishing on a cell and p <= 1 are refused"""
    w = _sample("charfn:0:0.5")
    with pytest.raises(WeightError):
        ap_constant(w, 2.0)
    with pytest.raises(WeightError):
        ap_constant(_sample("const:1"), 1.0)
    with pytest.raises(WeightError):
        WeightPair(_sample("const:1"), _sample("const:1"), 2.0, alpha=1.0)


def test_trivial_bump_constant():
    """u = v = 1 with A = t^p and B = t^p' gives 1"""
    one = _sample("const:1")
    pair = WeightPair(one, one, 2.0)
    assert bump_constant(pair, Power(2.0), Power(2.0)).value == pytest.approx(1.0)


def test_bump_constant_scaling_law():
    """[su, tv] = s^(1/p) t^(-1/p) [u, v]"""
    u = _sample("randpc:1:8")
    v = _sample("randpc:2:8")
    p = 2.0
    A, B = LogBump(2.0, 1.5), LogBump(2.0, 1.5)
    base = bump_constant(WeightPair(u, v, p), A, B).value
    scaled = bump_constant(WeightPair(u.with_samples(16 * u.samples), v.with_samples(81 * v.samples), p), A, B)
    assert scaled.value == pytest.approx(base * 16 ** 0.5 / 81 ** 0.5, rel=1e-8)


def test_trivial_factored_pair():
    """w1 = w2 = 1 with t and t gives (1, 1)"""
    one = _sample("const:1")
    pair = factored_pair(one, one, Power(1.0), Power(1.0), 2.0)
    assert np.allclose(pair.u.samples, 1.0)
    assert np.allclose(pair.v.samples, 1.0)


def test_reverse_factorization_functions():
    """A(t^(1/p)) and B(t^(1/p')) undo the powers of the bump functions"""
    phi, psi = reverse_factorization_functions(Power(2.0), Power(2.0), 2.0)
    t = np.array([0.5, 2.0, 3.0])
    assert np.allclose(phi(t), t)
    assert np.allclose(psi(t), t)
    with pytest.raises(YoungFunctionError):
        reverse_factorization_functions(LogBump(2.0, 1.5), Power(2.0), 3.0)


def test_factored_pair_rejects_zero_weight():
    """Weights that vanish identically cannot be factored"""
    with pytest.raises(WeightError):
        factored_pair(_sample("const:1"), _sample("const:0"), Power(1.0), Power(1.0), 2.0)


def _factored_bump(seed, resolution, p=2.0, delta=0.5):
    pc = p / (p - 1.0)
    phi = LogBump(1.0, 2 * p + delta)
    psi = LogBump(1.0, pc + 1.0)
    A, B = Composed(phi, p), Composed(psi, pc)
    w1 = _sample(f"randpc:{seed}:8:4", resolution=resolution)
    w2 = _sample(f"randpc:{seed + 1000}:8:4", resolution=resolution)
    pair = factored_pair(w1, w2, phi, psi, p)
    family = CubeFamily.dyadic_only()
    values, _ = bump_products(pair, A, B, family)
    return values, bump_constant(pair, A, B, family).value


def test_factored_pair_bump_is_finite_and_stable():
    """Factored pairs satisfy the matching bump condition at every resolution"""
    for seed in range(20):
        values, coarse = _factored_bump(seed, 5)
        _, fine = _factored_bump(seed, 6)
        assert np.all(np.isfinite(values))
        assert np.all(values <= 4.0)
        assert 0 < coarse < np.inf
        assert abs(fine - coarse) / coarse < 0.25


def test_expl_bmo_check():
    """Exponential-class oscillation is controlled by the BMO norm"""
    assert expL_bmo_check(_sample("const:2")).value == 0.0
    coarse = expL_bmo_check(_sample("heaviside", resolution=8, lo=-1.0)).value
    fine = expL_bmo_check(_sample("heaviside", resolution=10, lo=-1.0)).value
    assert 0 < coarse < np.inf
    assert fine == pytest.approx(coarse, rel=1e-6)
    log_ratio = expL_bmo_check(_sample("log", resolution=8)).value
    assert 0 < log_ratio < np.inf
