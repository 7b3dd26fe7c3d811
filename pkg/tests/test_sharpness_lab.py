#!/usr/bin/env python3
"""
Tests for slope fitting and the sharpness sweeps
"""
import sys
import os
import math

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lab_errors import ParameterError  # noqa: E402
from sharpness_lab import (  # noqa: E402
    SWEEPS,
    commutator_lower_bound,
    commutator_witness,
    cross_check_resolution,
    radial_orlicz_maximal,
    run_sweep,
    slope_fit,
    sweep_frac_commutator,
    sweep_power_weight,
    sweep_sobolev,
    two_weight_failure,
)


def test_slope_fit_exact_power_laws():
    """Straight lines in log-log coordinates are recovered exactly"""
    fit = slope_fit([(1, 1), (2, 2), (4, 4)])
    assert fit.slope == pytest.approx(1.0)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert slope_fit([(1, 1), (2, 4), (4, 16)]).slope == pytest.approx(2.0)


def test_slope_fit_noisy_power_law():
    """Two percent noise moves the slope by less than 0.05"""
    rng = np.random.default_rng(99)
    x = np.logspace(0, 3, 20)
    y = x ** 1.5 * (1 + rng.uniform(-0.02, 0.02, size=x.size))
    assert slope_fit(list(zip(x, y))).slope == pytest.approx(1.5, abs=0.05)


def test_slope_fit_errors():
    """Too few points, non-positive coordinates and unknown transforms are refused"""
    with pytest.raises(ParameterError):
        slope_fit([(1, 1), (2, 2)])
    with pytest.raises(ParameterError):
        slope_fit([(1, 1), (2, 0), (3, 3)])
    with pytest.raises(ParameterError):
        slope_fit([(1, 1), (2, 2), (3, 3)], transform="semilog")


def test_sobolev_closed_forms():
    """n = 2, p = 1, delta = 1/2 gives sqrt(2 pi) and pi^(3/2)"""
    result = sweep_sobolev(2, 1.0, [0.5], with_constant=False)
    row = result.rows[0]
    assert row["norm_q"] == pytest.approx(math.sqrt(2 * math.pi), rel=1e-6)
    assert row["grad_norm"] == pytest.approx(math.pi ** 1.5, rel=1e-6)
    assert row["norm_q"] == pytest.approx(2.50663, rel=1e-5)
    assert row["grad_norm"] == pytest.approx(5.56833, rel=1e-5)
    assert result.fit is None


@pytest.mark.parametrize("n, p", [(2, 1.0), (3, 1.5)])
def test_sobolev_sharp_exponent(n, p):
    """The Sobolev ratio grows like (1/delta)^(1/n')"""
    result = sweep_sobolev(n, p, with_constant=False)
    assert result.slope == pytest.approx(1.0 - 1.0 / n, rel=0.05)
    for row in result.rows:
        assert row["norm_q"] == pytest.approx(row["norm_q_closed"], rel=1e-6)
        assert row["grad_norm"] == pytest.approx(row["grad_norm_closed"], rel=1e-6)


def test_sobolev_ratio_ignores_weight_scale():
    """Scaling the weight scales both norms alike"""
    plain = sweep_sobolev(2, 1.0, with_constant=False)
    scaled = sweep_sobolev(2, 1.0, with_constant=False, weight_scale=3.0)
    assert scaled.column("ratio") == pytest.approx(plain.column("ratio"), rel=1e-6)
    assert scaled.rows[0]["norm_q"] == pytest.approx(3.0 * plain.rows[0]["norm_q"], rel=1e-6)


def test_sobolev_near_delta_one_is_finite():
    """delta -> 1 gives a finite ratio"""
    row = sweep_sobolev(2, 1.0, [1.0], with_constant=False).rows[0]
    assert 0 < row["ratio"] < math.inf


def test_sobolev_parameter_errors():
    """p must lie in [1, n) and delta in (0, 1]"""
    with pytest.raises(ParameterError):
        sweep_sobolev(2, 2.0)
    with pytest.raises(ParameterError):
        sweep_sobolev(1, 1.0)
    with pytest.raises(ParameterError):
        sweep_sobolev(2, 1.0, [1.5])
    with pytest.raises(ParameterError):
        sweep_sobolev(2, 1.0, [])


def test_power_weight_constant_slope():
    """[w_delta]_{A_{p,q}} grows like (1/delta)^(q/p') at L = 10"""
    result = sweep_power_weight(2, 2.0, 2.0, resolution=10)
    assert result.slope == pytest.approx(result.metadata["expected_slope"], rel=0.10)
    assert result.metadata["expected_slope"] == pytest.approx(1.0)


def test_power_weight_needs_p_above_one():
    """p = 1 has no power-weight sweep"""
    with pytest.raises(ParameterError):
        sweep_power_weight(1, 1.0)


def test_frac_commutator_lower_bound_slope():
    """n = 2, alpha = 1, p = 4/3: the lower-bound ratio grows at least like delta^-1.35"""
    result = sweep_frac_commutator(2, 1.0, 4.0 / 3.0)
    assert result.metadata["q"] == pytest.approx(4.0)
    assert result.slope >= 1.35
    assert result.metadata["fit_f_norm"]["slope"] == pytest.approx(0.75, rel=0.05)
    for row in result.rows:
        assert row["f_norm"] == pytest.approx(row["f_norm_closed"], rel=1e-6)


def test_frac_commutator_parameter_errors():
    """p'/q < 1 and p outside (1, n/alpha) are refused"""
    with pytest.raises(ParameterError):
        sweep_frac_commutator(1, 0.5, 1.5)
    with pytest.raises(ParameterError):
        sweep_frac_commutator(2, 1.0, 2.5)
    with pytest.raises(ParameterError):
        sweep_frac_commutator(2, 2.0, 1.5)


def test_frac_commutator_grid_cross_check():
    """The one-dimensional grid commutator agrees with the radial profile away from the support"""
    check = cross_check_resolution(1, 0.5, 0.4, 8)
    assert check["cells"] > 0
    assert check["max_relative_deviation"] < 0.1


def test_two_weight_failure():
    """The comparison integrals are Cauchy while the u-mass keeps growing"""
    result = two_weight_failure(3, 1.0, 2)
    assert result.metadata["cauchy"]
    assert result.metadata["tail_ratio"] < 1e-3
    assert result.metadata["lhs_growth_factor"] > 1.5
    lhs = result.column("lhs")
    assert all(b > a for a, b in zip(lhs, lhs[1:]))
    for row in result.rows:
        assert row["lhs"] == pytest.approx(row["lhs_closed"], rel=1e-6)
    increments = result.column("rhs_increment")[1:]
    assert all(b < a for a, b in zip(increments, increments[1:]))
    for row in result.rows:
        assert row["witness_lower_bound"] == pytest.approx(1.0, rel=1e-9)
        assert row["past_witness_lower_bound"] > row["witness_lower_bound"] >= 1.0 - 1e-9


def test_commutator_lower_bound_crosses_one_at_witness():
    """The truncated lower bound passes 1 at the witness and keeps growing with Y"""
    n, alpha, bound = 3, 1.0, 0.4
    for rho in (1e10, 1e40):
        threshold = math.log(commutator_witness(n, alpha, rho, bound))
        values = [commutator_lower_bound(n, alpha, rho, threshold + m, bound) for m in (-1.0, 0.0, 1.0, 3.0)]
        assert values[0] < 1.0
        assert values[1] == pytest.approx(1.0, rel=1e-9)
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[3] - values[1] == pytest.approx(3 * values[2] - 3 * values[1], rel=1e-9)


def test_two_weight_parameter_errors():
    """k must be an integer in (1, n/alpha) and radii must start beyond e^e^e"""
    with pytest.raises(ParameterError):
        two_weight_failure(3, 1.0, 3)
    with pytest.raises(ParameterError):
        two_weight_failure(3, 1.0, 2, radii=[1e5, 1e10, 1e20])
    with pytest.raises(ParameterError):
        two_weight_failure(3, 1.0, 2, radii=[1e20, 1e10, 1e40])


def test_orlicz_maximal_tracks_comparison():
    """log M_{Phi_k, k alpha} u follows the comparison with slope one"""
    result = radial_orlicz_maximal(3, 1.0, 2)
    ratios = result.column("ratio")
    assert all(0 < r < math.inf for r in ratios)
    points = list(zip(result.column("log10_comparison"), result.column("log10_maximal")))
    assert slope_fit(points, transform="linear").slope == pytest.approx(1.0, abs=0.1)


def test_sweep_table_and_dispatch(tmp_path):
    """Sweeps dispatch by name and write a CSV with a slope footer"""
    assert set(SWEEPS) == {"sobolev", "frac-commutator", "power-weight", "two-weight", "orlicz-maximal"}
    result = run_sweep("power-weight", n=1, p=2.0, resolution=6)
    path = tmp_path / "sweep.csv"
    text = result.to_csv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert text.splitlines() == lines
    assert lines[0] == "delta,apq_constant"
    assert len(lines) == 1 + len(result.rows) + 1
    assert lines[-1].startswith("#slope,")
    record = result.to_dict()
    assert record["name"] == "power-weight"
    assert record["fit"]["slope"] == result.slope
    with pytest.raises(ParameterError):
        run_sweep("nope")
