"""Sharpness experiments: weighted Sobolev, fractional commutator and two-weight failure.

Each sweep evaluates closed-form radial integrands with
:mod:`radial_quadrature` and reports a :class:`SweepResult` whose fitted
log–log slope is the measured exponent. Grid operators only appear as
low-resolution cross-checks and in the lattice ``A_{p,q}`` constants.

Example:
    >>> from sharpness_lab import sweep_sobolev
    >>> result = sweep_sobolev(2, 1.0, [0.4, 0.2, 0.1, 0.05], with_constant=False)
    >>> round(result.slope, 2)
    0.5
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special

from cube_families import CubeFamily
from dyadic_grid import DyadicCube, DyadicGrid
from function_families import RadialPower, RadialPowerLog, sample_function
from integral_operators import FracIntegral
from lab_config import DEFAULT_SWEEP_RESOLUTION
from lab_errors import ParameterError, QuadratureError
from orlicz import LogBump
from radial_quadrature import (
    RADIAL_RTOL,
    RadialProfile,
    partial_integrals,
    radial_integrate,
    sphere_area,
)
from weight_constants import apq_constant_from_powers

logger = logging.getLogger(__name__)

DEFAULT_DELTAS = (0.4, 0.2, 0.1, 0.05)
DEFAULT_RADII = (1e10, 1e20, 1e40, 1e80)
# r = e^{e^e}, where the two-weight example starts
SUPPORT_START = math.exp(math.exp(math.e))
FIT_CUTOFF = 1e10

_ANGULAR_NODES = 64


# ---------------------------------------------------------------------------
# Results and slope fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual}


def slope_fit(points: Sequence[tuple[float, float]], transform: str = "loglog") -> SlopeFit:
    """Least-squares line through ``points`` after the transform.

    ``transform`` is ``"loglog"`` or ``"linear"``; the residual is the max
    absolute deviation from the fitted line in transformed coordinates.

    Raises:
        ParameterError: With fewer than three points, or a non-positive
            coordinate under the log transform.
    """
    if len(points) < 3:
        raise ParameterError("a slope needs at least three points", field="points", value=len(points))
    data = np.asarray(points, dtype=float)
    if transform == "loglog":
        if np.any(data <= 0):
            raise ParameterError("log–log fits need positive coordinates", field="points",
                                 value=data[np.any(data <= 0, axis=1)].tolist())
        data = np.log(data)
    elif transform != "linear":
        raise ParameterError("unknown transform", field="transform", value=transform)
    x, y = data[:, 0], data[:, 1]
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return SlopeFit(float(slope), float(intercept), residual)


@dataclass(frozen=True)
class SweepResult:
    """Rows of one sweep with the fitted slope.

    Attributes:
        name: Sweep name.
        columns: Column order of ``rows``.
        rows: One dict per grid point.
        fit: Slope fit of the primary pair of columns, if ≥ 3 points.
        metadata: Parameters, runtime and secondary fits.
    """

    name: str
    columns: tuple[str, ...]
    rows: tuple[dict[str, float], ...]
    fit: SlopeFit | None
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def slope(self) -> float | None:
        return self.fit.slope if self.fit else None

    @property
    def residual(self) -> float | None:
        return self.fit.residual if self.fit else None

    def column(self, name: str) -> list[float]:
        return [row[name] for row in self.rows]

    def to_csv(self, path: str | Path | None = None) -> str:
        """CSV with a header row and a final ``#slope,<value>,<residual>`` row."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([repr(float(row[c])) for c in self.columns])
        if self.fit is not None:
            writer.writerow(["#slope", repr(self.fit.slope), repr(self.fit.residual)])
        text = buffer.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
            logger.info("Wrote sweep table", extra={"path": str(path), "rows": len(self.rows)})
        return text

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "rows": [dict(row) for row in self.rows],
            "fit": self.fit.to_dict() if self.fit else None,
            "metadata": self.metadata,
        }


def _fit_or_none(points: list[tuple[float, float]]) -> SlopeFit | None:
    return slope_fit(points) if len(points) >= 3 else None


def _check_deltas(deltas: Sequence[float]) -> tuple[float, ...]:
    deltas = tuple(float(d) for d in deltas)
    if not deltas:
        raise ParameterError("empty δ list", field="deltas", value=deltas)
    for d in deltas:
        if not 0 < d <= 1:
            raise ParameterError("δ must lie in (0, 1]", field="deltas", value=d)
    return deltas


def _conjugate(p: float) -> float:
    return math.inf if p == 1 else p / (p - 1.0)


# ---------------------------------------------------------------------------
# Lattice A_{p,q} constants of power weights
# ---------------------------------------------------------------------------

def origin_cube_family(grid: DyadicGrid, resolution: int) -> CubeFamily:
    """The dyadic cubes ``[0, 2^{-j})^n``, j = 1..L, plus the unit cube."""
    n = grid.dimension
    cubes = tuple(DyadicCube(grid, -j, (0,) * n) for j in range(1, resolution + 1))
    return CubeFamily(dyadic=False, include_domain=True, extra=cubes)


def power_weight_apq(n: int, exponent: float, p: float, q: float, resolution: int) -> float:
    """Lattice ``[w]_{A_{p,q}}`` of ``w = |x|^exponent`` over origin cubes.

    Radial weights are symmetric under coordinate reflections, so the cubes
    ``[−s, s)^n`` give the same averages as ``[0, s)^n``; the sampling box is
    the unit cube with exactly averaged powers.
    """
    grid = DyadicGrid(n)
    lo, hi = (0.0,) * n, (1.0,) * n
    w_q = sample_function(RadialPower(exponent * q), grid, resolution, lo, hi)
    dual_exponent = -exponent if p == 1 else -exponent * _conjugate(p)
    w_dual = sample_function(RadialPower(dual_exponent), grid, resolution, lo, hi)
    return apq_constant_from_powers(w_q, w_dual, p, q, origin_cube_family(grid, resolution)).value


# ---------------------------------------------------------------------------
# Weighted Sobolev inequality
# ---------------------------------------------------------------------------

def sobolev_exponent(n: int, p: float) -> float:
    if not 1 <= p < n:
        raise ParameterError("need 1 ≤ p < n", field="p", value=p)
    return n * p / (n - p)


def sobolev_norm_closed(n: int, p: float, delta: float) -> float:
    """``‖w_δ f_δ‖_{L^q} = (|S^{n−1}|/(qδ))^{1/q}``."""
    q = sobolev_exponent(n, p)
    return (sphere_area(n) / (q * delta)) ** (1.0 / q)


def gradient_norm_closed(n: int, p: float, delta: float) -> float:
    """``‖∇f_δ‖_{L^p(w_δ^p)} = δ^{1−1/p} |S^{n−1}|^{1/p} (Γ(p/n'+1)/p^{p/n'+1})^{1/p}``."""
    a = p * (n - 1.0) / n
    return delta ** (1.0 - 1.0 / p) * (sphere_area(n) * special.gamma(a + 1.0) / p ** (a + 1.0)) ** (1.0 / p)


def sweep_sobolev(
    n: int,
    p: float,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    resolution: int | None = None,
    with_constant: bool = True,
    weight_scale: float = 1.0,
    rtol: float = RADIAL_RTOL,
) -> SweepResult:
    """Weighted Sobolev ratio ``‖w_δ f_δ‖_q / ‖∇f_δ‖_{L^p(w_δ^p)}`` with ``w_δ = |x|^{(δ−n)/q}``.

    The fitted slope is taken against ``1/δ``; with ``with_constant`` the
    lattice ``[w_δ]_{A_{p,q}}`` is added and a second slope against it is
    stored under ``metadata["fit_vs_constant"]``.
    """
    started = time.perf_counter()
    deltas = _check_deltas(deltas)
    if n < 2:
        raise ParameterError("the Sobolev sweep needs n ≥ 2", field="n", value=n)
    q = sobolev_exponent(n, p)
    a = p * (n - 1.0) / n
    resolution = resolution or DEFAULT_SWEEP_RESOLUTION.get(n, 5)
    rows = []
    for delta in deltas:
        weighted = RadialProfile(n, power=delta - n, expdelta=(delta, q), coefficient=weight_scale ** q)
        gradient = RadialProfile(n, power=delta * (a + 1.0) - n, expdelta=(delta, p),
                                 coefficient=delta ** p * weight_scale ** p)
        norm_q = radial_integrate(weighted, rtol=rtol).value ** (1.0 / q)
        grad = radial_integrate(gradient, rtol=rtol).value ** (1.0 / p)
        row = {
            "delta": delta,
            "norm_q": norm_q,
            "norm_q_closed": weight_scale * sobolev_norm_closed(n, p, delta),
            "grad_norm": grad,
            "grad_norm_closed": weight_scale * gradient_norm_closed(n, p, delta),
            "ratio": norm_q / grad,
        }
        if with_constant:
            row["apq_constant"] = power_weight_apq(n, (delta - n) / q, p, q, resolution)
        rows.append(row)
        logger.debug("Sobolev sweep point", extra=row)
    metadata = {"n": n, "p": p, "q": q, "expected_slope": 1.0 - 1.0 / n, "weight_scale": weight_scale,
                "resolution": resolution if with_constant else None}
    if with_constant:
        fit = _fit_or_none([(r["apq_constant"], r["ratio"]) for r in rows])
        metadata["fit_vs_constant"] = fit.to_dict() if fit else None
    metadata["runtime"] = time.perf_counter() - started
    columns = ("delta", "norm_q", "norm_q_closed", "grad_norm", "grad_norm_closed", "ratio")
    columns += ("apq_constant",) if with_constant else ()
    return SweepResult("sobolev", columns, tuple(rows),
                       _fit_or_none([(1.0 / r["delta"], r["ratio"]) for r in rows]), metadata)


# ---------------------------------------------------------------------------
# Fractional commutator [log|x|, I_α] on power weights
# ---------------------------------------------------------------------------

def _frac_exponents(n: int, alpha: float, p: float) -> tuple[float, float]:
    if not 0 < alpha < n:
        raise ParameterError("α must lie in (0, n)", field="alpha", value=alpha)
    if not 1 < p < n / alpha:
        raise ParameterError("need 1 < p < n/α", field="p", value=p)
    q = n * p / (n - alpha * p)
    return q, _conjugate(p)


def angular_kernel(n: int, alpha: float, rho: float, s: np.ndarray) -> np.ndarray:
    """``∫_{S^{n−1}} |ρe − sθ|^{α−n} dθ`` for ``0 ≤ s < ρ``."""
    s = np.asarray(s, dtype=float)
    beta = alpha - 1.0
    if n == 1:
        return (rho - s) ** beta + (rho + s) ** beta
    if n == 3:
        x = s / rho
        with np.errstate(divide="ignore", invalid="ignore"):
            if alpha == 1.0:
                bracket = np.log1p(x) - np.log1p(-x)
            else:
                bracket = (np.expm1(beta * np.log1p(x)) - np.expm1(beta * np.log1p(-x))) / beta
            value = 2.0 * math.pi * rho ** (beta - 1.0) * bracket / x
        return np.where(x > 0, value, 4.0 * math.pi * rho ** (alpha - 3.0))
    nodes, weights = np.polynomial.legendre.leggauss(_ANGULAR_NODES)
    theta = 0.5 * math.pi * (nodes + 1.0)
    w = 0.5 * math.pi * weights * np.sin(theta) ** (n - 2)
    distance2 = rho * rho + s[..., None] ** 2 - 2.0 * rho * s[..., None] * np.cos(theta)
    return sphere_area(n - 1) * np.sum(w * distance2 ** ((alpha - n) / 2.0), axis=-1)


def commutator_profile(n: int, alpha: float, delta: float, rho: float, rtol: float = RADIAL_RTOL) -> float:
    """``[log|·|, I_α] f_δ`` at ``|x| = ρ ≥ 2`` for ``f_δ = |y|^{δ−n} χ_{B(0,1)}``.

    In ``s = e^{−v}`` the value is ``∫_0^∞ (log ρ + v) e^{−δv} K(ρ, e^{−v}) dv``.
    """
    log_rho = math.log(rho)

    def integrand(v: float) -> float:
        return (log_rho + v) * math.exp(-delta * v) * float(angular_kernel(n, alpha, rho, np.exp(-v)))

    peak = max(1.0 / delta - log_rho, 1.0)
    total = 0.0
    for left, right in ((0.0, peak), (peak, math.inf)):
        value, _ = integrate.quad(integrand, left, right, epsabs=0.0, epsrel=rtol, limit=200)
        total += value
    return total


def frac_commutator_norm(n: int, alpha: float, p: float, delta: float,
                         weight_scale: float = 1.0, rtol: float = RADIAL_RTOL) -> float:
    """``‖[b, I_α] f_δ‖_{L^q(w_δ^q; |x| ≥ 2)}`` with ``w_δ = c|x|^{(n−δ)/p'}``."""
    q, pc = _frac_exponents(n, alpha, p)
    exponent = (n - delta) * q / pc + n

    def integrand(u: float) -> float:
        return commutator_profile(n, alpha, delta, math.exp(u), rtol) ** q * math.exp(exponent * u)

    # the integrand behaves like u^q e^{-δ q u / p'}
    peak = max(pc / delta, math.log(2.0) + 1.0)
    total = 0.0
    for left, right in ((math.log(2.0), peak), (peak, math.inf)):
        value, _ = integrate.quad(integrand, left, right, epsabs=0.0, epsrel=1e3 * rtol, limit=200)
        total += value
    if not math.isfinite(total):
        raise QuadratureError("commutator norm quadrature failed", context={"delta": delta})
    return weight_scale * (sphere_area(n) * total) ** (1.0 / q)


def cross_check_resolution(n: int, alpha: float, delta: float, resolution: int,
                           radius: float = 4.0) -> dict:
    """Compare the grid commutator ``b·I_α f − I_α(bf)`` with :func:`commutator_profile`.

    Cells whose centers lie at distance in ``[2, 3]`` from the origin on the
    first coordinate axis are compared; returns the max relative deviation.
    """
    grid = DyadicGrid(n)
    lo, hi = (-radius,) * n, (radius,) * n
    f = sample_function(RadialPower(delta - n, ball=True), grid, resolution, lo, hi)
    bf = sample_function(RadialPowerLog(delta - n, ball=True), grid, resolution, lo, hi)
    b = sample_function("log", grid, resolution, lo, hi)
    operator = FracIntegral(alpha)
    commutator = b.samples * operator.apply(f).samples - operator.apply(bf).samples
    centers = f.axes()
    h = f.cell_size
    first = centers[0]
    picks = np.nonzero((first >= 2.0) & (first <= 3.0))[0]
    # the row of cells just above the axis in the other coordinates
    rest = tuple(int(round(-lo_k / h)) for lo_k in lo[1:])
    deviations = []
    for i in picks:
        cell = (int(i),) + rest
        rho = math.sqrt(sum(c[k] ** 2 for c, k in zip(centers, cell)))
        exact = commutator_profile(n, alpha, delta, rho)
        deviations.append(abs(commutator[cell] - exact) / abs(exact))
    return {"resolution": resolution, "cells": len(deviations), "max_relative_deviation": float(max(deviations))}


def sweep_frac_commutator(
    n: int,
    alpha: float,
    p: float,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    resolution: int | None = None,
    with_constant: bool = False,
    cross_check: bool = False,
    weight_scale: float = 1.0,
    rtol: float = RADIAL_RTOL,
) -> SweepResult:
    """``R(δ) = ‖[b,I_α]f_δ‖_{L^q(w_δ^q)} / ‖f_δ‖_{L^p(w_δ^p)}`` with ``b = log|x|``.

    The numerator is restricted to ``|x| ≥ 2``, a lower bound for the full
    norm, so the fitted slope against ``1/δ`` is a lower estimate of the
    exponent ``2 − α/n``.

    Raises:
        ParameterError: If ``p'/q < 1``; that range follows by duality and is
            not swept.
    """
    started = time.perf_counter()
    deltas = _check_deltas(deltas)
    q, pc = _frac_exponents(n, alpha, p)
    if pc / q < 1:
        raise ParameterError("p'/q < 1: apply the sweep to the dual exponents (q', p')",
                             field="p", value=p)
    resolution = resolution or DEFAULT_SWEEP_RESOLUTION.get(n, 5)
    rows = []
    for delta in deltas:
        f_profile = RadialProfile(n, power=(delta - n) * p + (n - delta) * p / pc,
                                  coefficient=weight_scale ** p, r_hi=1.0)
        f_norm = radial_integrate(f_profile, rtol=rtol).value ** (1.0 / p)
        commutator = frac_commutator_norm(n, alpha, p, delta, weight_scale, rtol)
        row = {
            "delta": delta,
            "f_norm": f_norm,
            "f_norm_closed": weight_scale * (sphere_area(n) / delta) ** (1.0 / p),
            "commutator_norm": commutator,
            "ratio": commutator / f_norm,
        }
        if with_constant:
            row["apq_constant"] = power_weight_apq(n, (n - delta) / pc, p, q, resolution)
        rows.append(row)
        logger.debug("Fractional commutator sweep point", extra=row)
    metadata = {
        "n": n, "alpha": alpha, "p": p, "q": q,
        "target_exponent": 2.0 - alpha / n,
        "sharp_exponent": (2.0 - alpha / n) * max(1.0, pc / q),
        "weight_scale": weight_scale,
    }
    f_fit = _fit_or_none([(1.0 / r["delta"], r["f_norm"]) for r in rows])
    metadata["fit_f_norm"] = f_fit.to_dict() if f_fit else None
    if with_constant:
        fit = _fit_or_none([(1.0 / r["delta"], r["apq_constant"]) for r in rows])
        metadata["fit_constant"] = fit.to_dict() if fit else None
        metadata["resolution"] = resolution
    if cross_check:
        metadata["cross_check"] = cross_check_resolution(n, alpha, deltas[0], min(resolution, 10))
    metadata["runtime"] = time.perf_counter() - started
    columns = ("delta", "f_norm", "f_norm_closed", "commutator_norm", "ratio")
    columns += ("apq_constant",) if with_constant else ()
    return SweepResult("frac-commutator", columns, tuple(rows),
                       _fit_or_none([(1.0 / r["delta"], r["ratio"]) for r in rows]), metadata)


def sweep_power_weight(n: int, p: float, q: float | None = None,
                       deltas: Sequence[float] = DEFAULT_DELTAS, resolution: int = 10) -> SweepResult:
    """Lattice ``[w_δ]_{A_{p,q}}`` of ``w_δ = |x|^{(n−δ)/p'}``; expected slope ``q/p'``."""
    started = time.perf_counter()
    deltas = _check_deltas(deltas)
    if p <= 1:
        raise ParameterError("the power-weight sweep needs p > 1", field="p", value=p)
    q = float(q) if q is not None else p
    pc = _conjugate(p)
    rows = [{"delta": d, "apq_constant": power_weight_apq(n, (n - d) / pc, p, q, resolution)} for d in deltas]
    metadata = {"n": n, "p": p, "q": q, "resolution": resolution, "expected_slope": q / pc,
                "runtime": time.perf_counter() - started}
    return SweepResult("power-weight", ("delta", "apq_constant"), tuple(rows),
                       _fit_or_none([(1.0 / r["delta"], r["apq_constant"]) for r in rows]), metadata)


# ---------------------------------------------------------------------------
# Two-weight failure at δ = 0
# ---------------------------------------------------------------------------

def _check_two_weight(n: int, alpha: float, k: int, radii: Sequence[float]) -> tuple[float, ...]:
    if int(k) != k or not 1 < k < n / alpha:
        raise ParameterError("k must be an integer with 1 < k < n/α", field="k", value=k)
    radii = tuple(float(r) for r in radii)
    if any(r < SUPPORT_START for r in radii):
        raise ParameterError("radii must exceed e^{e^e}", field="radii", value=min(radii))
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ParameterError("radii must increase", field="radii", value=radii)
    return radii


def weight_profile(n: int) -> RadialProfile:
    """``u = 1/(|x|^n log|x| loglog|x|)`` beyond ``e^{e^e}``."""
    return RadialProfile(n, power=-n, log_powers=(-1.0, -1.0, 0.0), r_lo=SUPPORT_START, name="u")


def comparison_profile(n: int, k: int) -> RadialProfile:
    """``f^k M_{kα}(M^{2k−1}u) ≈ logloglog|x| / (|x|^n log|x| (loglog|x|)^k)``."""
    return RadialProfile(n, power=-n, log_powers=(-1.0, -float(k), 1.0), r_lo=SUPPORT_START, name="f^k v")


def _loglog(r: float) -> float:
    return math.log(math.log(r))


def rearranged_potential_bound(n: int, alpha: float, rtol: float = RADIAL_RTOL) -> float:
    """``I_α f*(0) ≥ sup_x I_α f(x)`` for ``f = χ_{|x|>e^{e^e}} / (|x|^α (log|x|)^2 loglog|x|)``.

    ``f*`` is the symmetric decreasing rearrangement: ``f*(s) = f((s^n + r_0^n)^{1/n})``.
    """
    log_r0 = math.log(SUPPORT_START)

    def integrand(u: float) -> float:
        log_r = np.logaddexp(n * u, n * log_r0) / n
        log_f = -alpha * log_r - 2.0 * math.log(log_r) - math.log(math.log(log_r))
        return math.exp(log_f + alpha * u)

    total = 0.0
    for left, right in ((-math.inf, log_r0), (log_r0, math.inf)):
        value, _ = integrate.quad(integrand, left, right, epsabs=0.0, epsrel=rtol, limit=200)
        total += value
    return sphere_area(n) * total


def commutator_lower_bound(n: int, alpha: float, rho: float, logloglog_y: float, bound: float) -> float:
    """Truncated lower bound for ``|[b,I_α]f(x)|`` at ``|x| = ρ`` and truncation ``Y``."""
    scale = 2.0 ** (alpha - n) * sphere_area(n)
    return scale * (logloglog_y - math.log(_loglog(rho))) - math.log(rho) * bound


def commutator_witness(n: int, alpha: float, rho: float, bound: float) -> float:
    """``log log Y`` beyond which the truncated lower bound exceeds 1 at ``|x| = ρ``.

    Uses ``|[b,I_α]f(x)| ≥ 2^{α−n} |S^{n−1}| (logloglog Y − logloglog ρ) − log ρ · I_α f*(0)``.
    """
    scale = 2.0 ** (alpha - n) * sphere_area(n)
    return _loglog(rho) * math.exp((1.0 + bound * math.log(rho)) / scale)


def two_weight_failure(
    n: int,
    alpha: float,
    k: int,
    radii: Sequence[float] = DEFAULT_RADII,
    tail_fraction: float = 1e-3,
    max_tower: int = 4000,
    rtol: float = RADIAL_RTOL,
) -> SweepResult:
    """Failure of the two-weight weak-type bound at δ = 0.

    For each R the u-mass ``LHS(R) = ∫_{e^{e^e}<|x|<R} u`` and the comparison
    integral ``RHS(R) = ∫_{R_0<|x|<R} f^k v`` (``R_0 = 10^{10}``) are reported.
    The RHS partial sums are continued along the squaring tower ``R ↦ R²``
    until the last increment is below ``tail_fraction`` of the total, which
    shows the Cauchy property; the LHS grows like ``logloglog R``.

    Each row also carries the truncation ``log log Y`` at which the commutator
    lower bound reaches 1 at ``|x| = R``, with the bound evaluated there and
    at ``e`` times that truncation.
    """
    started = time.perf_counter()
    radii = _check_two_weight(n, alpha, k, radii)
    u = weight_profile(n)
    rhs_profile = comparison_profile(n, k).restricted(FIT_CUTOFF, math.inf)
    area = sphere_area(n)
    rhs_total = radial_integrate(rhs_profile, rtol=rtol).value
    stops = [_loglog(r) for r in radii]
    rhs = partial_integrals(rhs_profile, stops, variable="loglog", rtol=rtol)
    lhs = partial_integrals(u, stops, variable="loglog", rtol=rtol)
    bound = rearranged_potential_bound(n, alpha, rtol)

    tower_stops = list(stops)
    tower = list(rhs)
    increments = [b - a for a, b in zip(tower, tower[1:])]
    while len(tower_stops) < max_tower and (not increments or increments[-1] >= tail_fraction * rhs_total):
        tower_stops.append(tower_stops[-1] + math.log(2.0))
        extra = partial_integrals(rhs_profile, tower_stops[-2:], variable="loglog", rtol=rtol)
        tower.append(tower[-1] + extra[1] - extra[0])
        increments.append(tower[-1] - tower[-2])

    rows = []
    for i, (r, t) in enumerate(zip(radii, stops)):
        witness = commutator_witness(n, alpha, r, bound)
        rows.append({
            "log10_radius": math.log10(r),
            "loglog_radius": t,
            "lhs": lhs[i],
            "lhs_closed": area * (math.log(t) - 1.0),
            "rhs": rhs[i],
            "rhs_increment": rhs[i] - rhs[i - 1] if i else rhs[i],
            "witness_loglog_y": witness,
            "witness_lower_bound": commutator_lower_bound(n, alpha, r, math.log(witness), bound),
            "past_witness_lower_bound": commutator_lower_bound(n, alpha, r, math.log(witness) + 1.0, bound),
        })
    monotone = all(b < a for a, b in zip(increments, increments[1:]))
    metadata = {
        "n": n, "alpha": alpha, "k": k,
        "fit_cutoff": FIT_CUTOFF,
        "rhs_total": rhs_total,
        "tower_steps": len(tower_stops),
        "tower_last_loglog": tower_stops[-1],
        "tower_last_increment": increments[-1] if increments else None,
        "tail_ratio": increments[-1] / rhs_total if increments else None,
        "cauchy": bool(monotone and increments and increments[-1] < tail_fraction * rhs_total),
        "lhs_growth_factor": lhs[-1] / lhs[0] if lhs[0] > 0 else math.inf,
        "potential_bound": bound,
        "runtime": time.perf_counter() - started,
    }
    logger.info("Two-weight failure sweep", extra={"cauchy": metadata["cauchy"],
                                                   "lhs_growth_factor": metadata["lhs_growth_factor"]})
    columns = ("log10_radius", "loglog_radius", "lhs", "lhs_closed", "rhs", "rhs_increment",
               "witness_loglog_y", "witness_lower_bound", "past_witness_lower_bound")
    fit = _fit_or_none([(math.log(r["loglog_radius"]) - 1.0, r["lhs"]) for r in rows])
    return SweepResult("two-weight", columns, tuple(rows), fit, metadata)


def radial_orlicz_maximal(
    n: int,
    alpha: float,
    k: int,
    radii: Sequence[float] = DEFAULT_RADII,
    rtol: float = RADIAL_RTOL,
) -> SweepResult:
    """Origin-ball lower bound of ``M_{Φ_k,kα} u`` against its closed-form comparison.

    With ``Φ_k(t) = t log(e+t)^{2k−1}`` and ``B = B(0, 2ρ)`` the Luxemburg norm
    solves ``(1/Λ) ∫_B u log(e + u|B|/Λ)^{2k−1} = 1`` with ``Λ = λ|B|``; all of
    it runs in ``t = loglog r``. The ratio to
    ``(log ρ)^{2k−1} logloglog ρ / ρ^{n−kα}`` is reported per radius.
    """
    started = time.perf_counter()
    radii = _check_two_weight(n, alpha, k, radii)
    phi = LogBump(1.0, 2.0 * k - 1.0)
    area = sphere_area(n)
    rows = []
    for rho in radii:
        log_ball = math.log(area / n) + n * math.log(2.0 * rho)
        t_hi = _loglog(2.0 * rho)

        def mass(log_lam: float) -> float:
            def integrand(t: float) -> float:
                log_u = -n * math.exp(t) - t - math.log(t)
                return np.logaddexp(1.0, log_u + log_ball - log_lam) ** (2 * k - 1) / t

            value, _ = integrate.quad(integrand, 1.0, t_hi, epsabs=0.0, epsrel=rtol, limit=200)
            return math.log(area * value) - log_lam

        low = math.log(area * math.log(t_hi))
        high = low + 1.0
        while mass(high) > 0:
            high += 2.0 * (high - low)
        log_lam = optimize.brentq(mass, low, high, xtol=1e-12)
        log_maximal = (k * alpha / n - 1.0) * log_ball + log_lam
        log_rho = math.log(rho)
        log_comparison = ((2 * k - 1) * math.log(log_rho) + math.log(math.log(math.log(log_rho)))
                          - (n - k * alpha) * log_rho)
        rows.append({
            "log10_radius": math.log10(rho),
            "log10_maximal": log_maximal / math.log(10.0),
            "log10_comparison": log_comparison / math.log(10.0),
            "ratio": math.exp(log_maximal - log_comparison),
        })
    ratios = [r["ratio"] for r in rows]
    metadata = {"n": n, "alpha": alpha, "k": k, "young": phi.describe(),
                "ratio_spread": max(ratios) / min(ratios), "runtime": time.perf_counter() - started}
    fit = _fit_or_none([(r["log10_radius"], r["ratio"]) for r in rows])
    return SweepResult("orlicz-maximal", ("log10_radius", "log10_maximal", "log10_comparison", "ratio"),
                       tuple(rows), fit, metadata)


SWEEPS: dict[str, Callable[..., SweepResult]] = {
    "sobolev": sweep_sobolev,
    "frac-commutator": sweep_frac_commutator,
    "power-weight": sweep_power_weight,
    "two-weight": two_weight_failure,
    "orlicz-maximal": radial_orlicz_maximal,
}


def run_sweep(name: str, **params: Any) -> SweepResult:
    """Dispatch a sweep by name.

    Raises:
        ParameterError: For an unknown sweep name.
    """
    try:
        sweep = SWEEPS[name]
    except KeyError:
        raise ParameterError("unknown sweep", field="sweep", value=name) from None
    return sweep(**params)
