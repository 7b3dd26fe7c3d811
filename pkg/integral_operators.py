"""Integral operators on cell-averaged functions and their commutators.

Operators:
    * :class:`HilbertTransform`: ``(1/π) p.v.∫ f(y)/(x-y) dy`` in 1-D, with the
      exact cell-to-cell interaction integrals.
    * :class:`HaarShift`: dyadic shift ``Σ_Q <f, h_Q> g_Q`` of order τ.
    * :class:`FracIntegral`: convolution with ``|x|^{α-n}``.
    * :class:`DyadicFracIntegral`: ``Σ_Q |Q|^{α/n} ⨍_Q f · χ_Q``.

Every operator maps a :class:`~dyadic_grid.SampledFunction` to one on the
same cells; values outside the domain are treated as zero (compact support).

Example:
    >>> from dyadic_grid import DyadicGrid
    >>> from function_families import sample_function
    >>> from integral_operators import HilbertTransform
    >>> f = sample_function("charfn:-1:1", DyadicGrid(1), 8, (-4.0,), (4.0,))
    >>> Hf = HilbertTransform().apply(f)
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, signal

from dyadic_grid import (
    DyadicCube,
    SampledFunction,
    block_mean_pyramid,
    tile_blocks,
    untile_blocks,
    upsample,
)
from lab_errors import GridError, OperatorError
from orlicz import LogBump, luxemburg_norm
from weight_constants import bmo_norm

logger = logging.getLogger(__name__)


class LinearOperator:
    """Base class; subclasses implement :meth:`apply`."""

    name = "operator"

    def apply(self, f: SampledFunction) -> SampledFunction:
        raise NotImplementedError

    def adjoint(self) -> LinearOperator:
        raise OperatorError(f"{self.name} has no adjoint implemented")

    def describe(self) -> str:
        return self.name

    def __call__(self, f: SampledFunction) -> SampledFunction:
        return self.apply(f)


def hilbert_cell_kernel(d: np.ndarray) -> np.ndarray:
    """∫₀¹∫₀¹ du dv / (d + u − v) for integer offsets d (zero on the diagonal)."""
    d = np.asarray(d, dtype=float)

    def xlogx(z: np.ndarray) -> np.ndarray:
        a = np.abs(z)
        return np.where(a > 0, z * np.log(np.where(a > 0, a, 1.0)), 0.0)

    return xlogx(d + 1) + xlogx(d - 1) - 2 * xlogx(d)


@dataclass(frozen=True)
class HilbertTransform(LinearOperator):
    sign: float = 1.0
    name = "hilbert"

    def apply(self, f: SampledFunction) -> SampledFunction:
        """Cell-averaged principal-value convolution.

        Raises:
            OperatorError: If f is not one-dimensional.
        """
        if f.dimension != 1:
            raise OperatorError("the Hilbert transform is one-dimensional", context={"n": f.dimension})
        n_cells = f.shape[0]
        offsets = np.arange(-(n_cells - 1), n_cells)
        kernel = hilbert_cell_kernel(offsets) / math.pi
        full = signal.fftconvolve(f.samples, kernel, mode="full")
        return f.with_samples(self.sign * full[n_cells - 1:2 * n_cells - 1])

    def adjoint(self) -> HilbertTransform:
        return HilbertTransform(-self.sign)


@dataclass(frozen=True)
class HaarShift(LinearOperator):
    """Dyadic shift with the same (h, g) pattern on every cube.

    ``h_pattern`` and ``g_pattern`` hold the values of ``|Q|^{1/2} h_Q`` and
    ``|Q|^{1/2} g_Q`` on the ``2^{τn}`` subcubes of generation τ (array of
    shape ``(2**τ,)*n``).

    Attributes:
        tau: Order τ ≥ 1.
        h_pattern: Scaled h_Q on the subcubes.
        g_pattern: Scaled g_Q on the subcubes.
        window: Optional inclusive level window ``(l_min, l_max)``.
    """

    tau: int
    h_pattern: np.ndarray = field(repr=False)
    g_pattern: np.ndarray = field(repr=False)
    window: tuple[int, int] | None = None
    name = "haarshift"

    def __post_init__(self) -> None:
        h = np.asarray(self.h_pattern, dtype=float)
        g = np.asarray(self.g_pattern, dtype=float)
        if self.tau < 1:
            raise OperatorError("shift order must be at least 1", context={"tau": self.tau})
        side = 2 ** self.tau
        if h.shape != g.shape or any(s != side for s in h.shape):
            raise OperatorError("patterns must live on the 2^(τn) subcubes",
                                context={"tau": self.tau, "shape": h.shape})
        for label, pattern in (("h", h), ("g", g)):
            if np.max(np.abs(pattern)) > 1 + 1e-12:
                raise OperatorError(f"{label}_Q exceeds |Q|^(-1/2) in sup norm")
            if abs(pattern.sum()) > 1e-12 * pattern.size:
                raise OperatorError(f"{label}_Q must have mean zero")
        object.__setattr__(self, "h_pattern", h)
        object.__setattr__(self, "g_pattern", g)

    @classmethod
    def petermichl(cls, window: tuple[int, int] | None = None) -> HaarShift:
        """τ = 2 rule with h_Q the Haar function and g_Q = 2^{-1/2}(h_{Q-} − h_{Q+})."""
        return cls(2, np.array([1.0, 1.0, -1.0, -1.0]), np.array([1.0, -1.0, -1.0, 1.0]), window)

    @property
    def dimension(self) -> int:
        return self.h_pattern.ndim

    def with_window(self, window: tuple[int, int] | None) -> HaarShift:
        return HaarShift(self.tau, self.h_pattern, self.g_pattern, window)

    def adjoint(self) -> HaarShift:
        return HaarShift(self.tau, self.g_pattern, self.h_pattern, self.window)

    def level_window(self, f: SampledFunction) -> tuple[int, int]:
        finest = -f.resolution + self.tau
        coarsest = f.dyadic_level_range()[1]
        if self.window is None:
            return finest, coarsest
        lo, hi = self.window
        if lo < finest or hi < lo:
            raise OperatorError(
                "level window is finer than the resolution allows",
                context={"window": self.window, "finest": finest},
            )
        return lo, hi

    def level_terms(self, f: SampledFunction) -> list[tuple[int, np.ndarray]]:
        """Per-level contributions ``Σ_{|Q| = 2^{kn}} <f,h_Q> g_Q`` on the domain cells."""
        if f.dimension != self.dimension:
            raise OperatorError("shift and function differ in dimension",
                                context={"shift": self.dimension, "function": f.dimension})
        lo, hi = self.level_window(f)
        padded, crop = _pad_to_level(f, hi)
        n = f.dimension
        sub = 2 ** self.tau
        terms = []
        for level in range(lo, hi + 1):
            side = 2 ** (level + f.resolution)
            blocks = tile_blocks(padded, side)
            averages = blocks
            while averages.shape[1] > sub:
                averages = block_mean_pyramid(averages)
            coeff = np.tensordot(averages, self.h_pattern, axes=n) / sub ** n
            pieces = coeff.reshape((-1,) + (1,) * n) * self.g_pattern[None]
            terms.append((level, untile_blocks(upsample(pieces, side // sub), padded.shape)[crop]))
        return terms

    def apply(self, f: SampledFunction) -> SampledFunction:
        total = np.zeros(f.shape)
        for _, term in self.level_terms(f):
            total += term
        return f.with_samples(total)

    def truncated_max(self, f: SampledFunction) -> SampledFunction:
        """``sup_l |Σ_{level ≥ l} <f,h_Q> g_Q|`` over the window."""
        running = np.zeros(f.shape)
        best = np.zeros(f.shape)
        for _, term in sorted(self.level_terms(f), key=lambda item: -item[0]):
            running = running + term
            np.maximum(best, np.abs(running), out=best)
        return f.with_samples(best)

    def describe(self) -> str:
        return f"haarshift:tau={self.tau}"


def haar_shift_apply(shift: HaarShift, f: SampledFunction,
                     window: tuple[int, int] | None = None) -> SampledFunction:
    return shift.with_window(window or shift.window).apply(f)


def haar_shift_truncated_max(shift: HaarShift, f: SampledFunction) -> SampledFunction:
    return shift.truncated_max(f)


@functools.lru_cache(maxsize=64)
def _near_kernel(abs_offset: tuple[int, ...], alpha: float) -> float:
    """κ(d) = ∫_{[-1,1]^n} Π(1−|z_k|) |d+z|^{α−n} dz for |d|_∞ ≤ 2, n ≥ 2."""
    n = len(abs_offset)
    d = np.asarray(abs_offset, dtype=float)
    beta = alpha - n

    def integrand(*z: float) -> float:
        weight = 1.0
        r2 = 0.0
        for dk, zk in zip(d, z):
            weight *= 1.0 - abs(zk)
            r2 += (dk + zk) ** 2
        return weight * r2 ** (beta / 2.0) if r2 > 0 else 0.0

    # split every axis at the kink 0 and at the singular coordinate −d_k
    edges = []
    for dk in d:
        cuts = sorted({-1.0, 0.0, 1.0} | ({-dk} if -1.0 < -dk < 1.0 else set()))
        edges.append(list(zip(cuts[:-1], cuts[1:])))
    if max(abs_offset) >= 2:
        return _gauss_box(integrand, edges)
    total = 0.0
    for box in itertools.product(*edges):
        value, _ = integrate.nquad(integrand, list(box), opts={"limit": 100, "epsabs": 1e-11, "epsrel": 1e-9})
        total += value
    return total


def _gauss_box(integrand: Callable[..., float], edges: list[list[tuple[float, float]]], order: int = 16) -> float:
    xi, wi = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for box in itertools.product(*edges):
        nodes = [0.5 * (b - a) * xi + 0.5 * (a + b) for a, b in box]
        weights = [0.5 * (b - a) * wi for a, b in box]
        for index in itertools.product(range(order), repeat=len(box)):
            w = 1.0
            point = []
            for axis, i in enumerate(index):
                w *= weights[axis][i]
                point.append(nodes[axis][i])
            total += w * integrand(*point)
    return total


def frac_cell_kernel(n: int, alpha: float, radius: int) -> np.ndarray:
    """Cell interaction kernel κ(d) for offsets |d_k| ≤ radius (array of side 2·radius+1)."""
    axis = np.arange(-radius, radius + 1, dtype=float)
    if n == 1:
        a = alpha - 1.0

        def psi(z: np.ndarray) -> np.ndarray:
            return np.abs(z) ** (a + 2.0) / ((a + 1.0) * (a + 2.0))

        exact = psi(axis + 1) + psi(axis - 1) - 2 * psi(axis)
        with np.errstate(divide="ignore"):
            far = np.abs(axis) ** a + a * (a - 1.0) / 12.0 * np.abs(axis) ** (a - 2.0)
        return np.where(np.abs(axis) <= 1000, exact, far)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    r = np.sqrt(sum(m * m for m in mesh))
    beta = alpha - n
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = r ** beta + beta * (beta + n - 2.0) / 12.0 * r ** (beta - 2.0)
    near = min(radius, 2)
    for index in itertools.product(range(-near, near + 1), repeat=n):
        key = tuple(sorted(abs(i) for i in index))
        kernel[tuple(radius + i for i in index)] = _near_kernel(key, float(alpha))
    return kernel


@dataclass(frozen=True)
class FracIntegral(LinearOperator):
    """Riesz potential ``I_α f(x) = ∫ f(y) |x−y|^{α−n} dy``."""

    alpha: float
    name = "ialpha"

    def apply(self, f: SampledFunction) -> SampledFunction:
        n = f.dimension
        if not 0 < self.alpha < n:
            raise OperatorError("alpha must lie in (0, n)", context={"alpha": self.alpha, "n": n})
        radius = max(f.shape) - 1
        kernel = frac_cell_kernel(n, self.alpha, radius)
        full = signal.fftconvolve(f.samples, kernel, mode="full")
        crop = tuple(slice(radius, radius + s) for s in f.shape)
        return f.with_samples(f.cell_size ** self.alpha * full[crop])

    def adjoint(self) -> FracIntegral:
        return self

    def describe(self) -> str:
        return f"ialpha:{self.alpha:g}"


@dataclass(frozen=True)
class DyadicFracIntegral(LinearOperator):
    """``Σ_Q |Q|^{α/n} ⨍_Q f · χ_Q`` over a dyadic level window."""

    alpha: float
    window: tuple[int, int] | None = None
    name = "ialphad"

    def apply(self, f: SampledFunction) -> SampledFunction:
        if not 0 < self.alpha < f.dimension:
            raise OperatorError("alpha must lie in (0, n)", context={"alpha": self.alpha})
        finest, coarsest = f.dyadic_level_range()
        lo, hi = self.window if self.window is not None else (finest, coarsest)
        if lo < finest or hi < lo:
            raise OperatorError("level window outside the resolution range",
                                context={"window": (lo, hi), "finest": finest})
        padded, crop = _pad_to_level(f, hi)
        total = np.zeros(padded.shape)
        for level in range(lo, hi + 1):
            side = 2 ** (level + f.resolution)
            means = tile_blocks(padded, side).reshape(-1, side ** f.dimension).mean(axis=1)
            pieces = np.broadcast_to(means.reshape((-1,) + (1,) * f.dimension),
                                     (len(means),) + (side,) * f.dimension)
            total += (side * f.cell_size) ** self.alpha * untile_blocks(pieces, padded.shape)
        return f.with_samples(total[crop])

    def adjoint(self) -> DyadicFracIntegral:
        return self

    def describe(self) -> str:
        return f"ialphad:{self.alpha:g}"


def hilbert(f: SampledFunction) -> SampledFunction:
    return HilbertTransform().apply(f)


def frac_integral(f: SampledFunction, alpha: float) -> SampledFunction:
    return FracIntegral(alpha).apply(f)


def frac_integral_dyadic(f: SampledFunction, alpha: float,
                         window: tuple[int, int] | None = None) -> SampledFunction:
    return DyadicFracIntegral(alpha, window).apply(f)


@dataclass(frozen=True)
class CommutatorSpec:
    """Symbol b and base operator T of ``[b, T]``."""

    symbol: SampledFunction
    operator: LinearOperator

    def apply(self, f: SampledFunction) -> SampledFunction:
        return commutator_apply(self, f)

    def describe(self) -> str:
        return f"[b,{self.operator.describe()}]"


def _centered_symbol(spec: CommutatorSpec, f: SampledFunction) -> np.ndarray:
    spec.symbol.require_same_cells(f)
    b = spec.symbol.samples
    # [b - c, T] = [b, T]; centring makes constant symbols vanish exactly
    return b - b.flat[0]


def commutator_apply(spec: CommutatorSpec, f: SampledFunction) -> SampledFunction:
    """``b·Tf − T(b·f)``.

    Raises:
        GridError: If b and f live on different cells.
    """
    b = _centered_symbol(spec, f)
    T = spec.operator
    tf = T.apply(f).samples
    tbf = T.apply(f.with_samples(b * f.samples)).samples
    return f.with_samples(b * tf - tbf)


def commutator_cauchy(
    spec: CommutatorSpec,
    f: SampledFunction,
    epsilon: float | None = None,
    nodes: int = 32,
) -> SampledFunction:
    """Contour form ``(1/2πi)∮_{|ζ|=ε} e^{ζb} T(e^{−ζb} f) / ζ² dζ`` by the trapezoid rule.

    Args:
        spec: Symbol and operator.
        f: Input function.
        epsilon: Contour radius; defaults to ``2^{-(n+2)} / (2 ‖b‖_BMO)``.
        nodes: Number M ≥ 8 of equispaced contour nodes.

    Raises:
        OperatorError: On too few nodes or overflow of ``e^{±εb}``.
    """
    if nodes < 8:
        raise OperatorError("the contour rule needs at least 8 nodes", context={"nodes": nodes})
    b = _centered_symbol(spec, f)
    if epsilon is None:
        norm = bmo_norm(spec.symbol)
        if norm == 0:
            return f.with_samples(np.zeros(f.shape))
        epsilon = 2.0 ** -(f.dimension + 2) / (2.0 * norm)
    if epsilon * np.max(np.abs(b)) > 700.0:
        raise OperatorError("e^(±εb) overflows on the domain",
                            context={"epsilon": epsilon, "max_b": float(np.max(np.abs(b)))})
    T = spec.operator
    total = np.zeros(f.shape, dtype=complex)
    for m in range(nodes):
        zeta = epsilon * np.exp(2j * math.pi * m / nodes)
        inner = np.exp(-zeta * b) * f.samples
        image = T.apply(f.with_samples(inner.real)).samples + 1j * T.apply(f.with_samples(inner.imag)).samples
        total += np.exp(zeta * b) * image / zeta
    result = total / nodes
    logger.debug("Contour commutator", extra={"epsilon": epsilon, "nodes": nodes,
                                              "imag_max": float(np.max(np.abs(result.imag)))})
    return f.with_samples(result.real)


def parse_operator(text: str) -> LinearOperator:
    """``hilbert``, ``haarshift:petermichl``, ``ialpha:<α>`` or ``ialphad:<α>``."""
    name, *params = text.strip().split(":")
    try:
        if name == "hilbert" and not params:
            return HilbertTransform()
        if name == "haarshift" and params == ["petermichl"]:
            return HaarShift.petermichl()
        if name == "ialpha" and len(params) == 1:
            return FracIntegral(float(params[0]))
        if name == "ialphad" and len(params) == 1:
            return DyadicFracIntegral(float(params[0]))
    except ValueError as exc:
        raise OperatorError(f"bad operator parameter in '{text}'") from exc
    raise OperatorError(f"unknown operator '{text}'", context={"id": text})


@dataclass(frozen=True)
class NormEstimate:
    value: float
    rayleigh: float
    power_iteration: float
    dictionary_size: int


def operator_norm_estimate(
    operator: LinearOperator,
    template: SampledFunction,
    seed: int = 0,
    dictionary_size: int = 24,
    iterations: int = 40,
) -> NormEstimate:
    """L² operator norm surrogate: dictionary Rayleigh quotients and power iteration on T*T."""
    rng = np.random.default_rng(seed)
    adjoint = operator.adjoint()
    best = 0.0
    dictionary = [rng.standard_normal(template.shape) for _ in range(dictionary_size // 2)]
    for level in range(template.dyadic_level_range()[0] + 2, template.dyadic_level_range()[1] + 1):
        cube = template.cube_of_cell((0,) * template.dimension, level)
        try:
            block = np.zeros(template.shape)
            block[template.cube_slices(cube)] = 1.0
        except GridError:
            continue
        dictionary.append(block)
        if len(dictionary) >= dictionary_size:
            break
    for vector in dictionary:
        norm = np.linalg.norm(vector)
        if norm == 0:
            continue
        image = operator.apply(template.with_samples(vector)).samples
        best = max(best, float(np.linalg.norm(image) / norm))
    vector = rng.standard_normal(template.shape)
    estimate = 0.0
    for _ in range(iterations):
        vector = vector / np.linalg.norm(vector)
        image = operator.apply(template.with_samples(vector))
        back = adjoint.apply(image).samples
        estimate = math.sqrt(max(float(np.vdot(vector, back)), 0.0))
        if not np.any(back):
            break
        vector = back
    value = max(best, estimate)
    logger.info("Operator norm estimated", extra={"operator": operator.describe(), "value": value})
    return NormEstimate(value, best, estimate, len(dictionary))


def yano_ratio(operator: LinearOperator, f: SampledFunction, cube) -> float:
    """``⨍_Q |Tf| / ‖f‖_{L log L, Q}`` for f supported in Q."""
    mean_abs = float(np.mean(np.abs(operator.apply(f).restrict(cube))))
    denominator = luxemburg_norm(f, cube, LogBump(1.0, 1.0))
    return 0.0 if denominator == 0 else mean_abs / denominator


def modular_endpoint_ratio(spec: CommutatorSpec, f: SampledFunction, lam: float) -> float:
    """``|{|[b,T]f| > λ}| / (‖b‖_BMO ∫ Φ(|f|/λ))`` with Φ(t) = t log(e+t)."""
    level_set = float(np.sum(np.abs(commutator_apply(spec, f).samples) > lam)) * f.cell_volume
    modular = float(np.sum(LogBump(1.0, 1.0)(np.abs(f.samples) / lam))) * f.cell_volume
    scale = bmo_norm(spec.symbol) * modular
    return 0.0 if scale == 0 else level_set / scale


def _pad_to_level(f: SampledFunction, level: int) -> tuple[np.ndarray, tuple[slice, ...]]:
    """Zero-pad the samples to the union of level-``level`` dyadic cubes meeting the domain."""
    side = 2 ** (level + f.resolution)
    if side < 1:
        raise OperatorError("level finer than the grid", context={"level": level})
    pads, crop = [], []
    for c0, n_cells in zip(f.lo_cells, f.shape):
        start = (c0 // side) * side
        stop = -(-(c0 + n_cells) // side) * side
        pads.append((c0 - start, stop - c0 - n_cells))
        crop.append(slice(c0 - start, c0 - start + n_cells))
    return np.pad(f.samples, pads), tuple(crop)


def dyadic_cube_indicator(f: SampledFunction, cube: DyadicCube) -> SampledFunction:
    values = np.zeros(f.shape)
    values[f.cube_slices(cube)] = 1.0
    return f.with_samples(values)
