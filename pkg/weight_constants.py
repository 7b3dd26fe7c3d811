"""Weight characteristics computed as maxima over a finite cube family.

Every supremum over cubes is realized on a :class:`~cube_families.CubeFamily`
(default: every dyadic cube contained in the domain plus the domain itself),
so the reported numbers are lattice constants: deterministic lower estimates
of the continuous suprema.

Example:
    >>> from dyadic_grid import DyadicGrid
    >>> from function_families import sample_function
    >>> from weight_constants import ap_constant
    >>> w = sample_function("const:3", DyadicGrid(1), 6, (0.0,), (1.0,))
    >>> ap_constant(w, 2.0).value
    1.0
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from cube_families import CubeFamily, cube_from_start, cube_record
from dyadic_grid import SampledFunction
from lab_errors import WeightError
from orlicz import Composed, ExpL, YoungFunction, luxemburg_values, orlicz_maximal

logger = logging.getLogger(__name__)

__all__ = [
    "CubeFamily", "WeightConstant", "WeightPair", "bmo_norm", "bmo_constant", "ap_constant",
    "apq_constant", "apq_constant_from_powers", "bump_constant", "bump_products",
    "factored_pair", "reverse_factorization_functions", "expL_bmo_check",
]


@dataclass(frozen=True)
class WeightConstant:
    """A lattice constant with the cube where the maximum is attained."""

    value: float
    argmax_cube: dict | None
    resolution: int
    cubes: int

    def to_dict(self) -> dict:
        return {
            "constant": self.value,
            "argmax_cube": self.argmax_cube,
            "resolution": self.resolution,
            "cubes": self.cubes,
            "label": "lattice constant",
        }


@dataclass(frozen=True)
class WeightPair:
    """Two-weight pair (u, v) with exponents p, q and fractional order α."""

    u: SampledFunction
    v: SampledFunction
    p: float
    q: float | None = None
    alpha: float = 0.0

    def __post_init__(self) -> None:
        self.u.require_same_cells(self.v)
        if self.q is None:
            object.__setattr__(self, "q", self.p)
        if not (self.p >= 1 and self.q >= 1):
            raise WeightError("exponents must be at least 1", context={"p": self.p, "q": self.q})
        if not 0 <= self.alpha < self.u.dimension:
            raise WeightError("alpha must lie in [0, n)", context={"alpha": self.alpha})
        if np.any(self.u.samples < 0) or not np.any(self.u.samples > 0):
            raise WeightError("u must be nonnegative and positive somewhere")


def _conjugate(p: float) -> float:
    return np.inf if p == 1 else p / (p - 1.0)


def _require_positive(w: SampledFunction, name: str = "w") -> None:
    bad = np.argwhere(w.samples <= 0)
    if len(bad):
        raise WeightError(
            f"{name} must be positive on every cell",
            context={"cell": [int(i) for i in bad[0]], "cells": len(bad)},
        )


def _sup_over_family(
    arrays: Sequence[np.ndarray],
    template: SampledFunction,
    family: CubeFamily | None,
    per_cube: Callable[[np.ndarray, int], np.ndarray],
) -> WeightConstant:
    """Maximize ``per_cube(blocks, side)`` over the family.

    ``blocks`` has shape (c, m, k): c cubes, m cells, k stacked arrays.
    """
    family = family or CubeFamily()
    stacked = np.stack(arrays, axis=-1)
    best, best_cube, count = -np.inf, None, 0
    for batch in family.batches(template):
        for rows, blocks in batch.chunks(stacked, chunk_points=2 ** 22 // len(arrays)):
            values = per_cube(blocks, batch.side)
            count += len(values)
            if len(values) == 0:
                continue
            i = int(np.nanargmax(values))
            if values[i] > best:
                best = float(values[i])
                best_cube = cube_record(cube_from_start(template, batch.starts[rows][i], batch.side))
    return WeightConstant(best, best_cube, template.resolution, count)


def bmo_constant(b: SampledFunction, family: CubeFamily | None = None) -> WeightConstant:
    """``sup_Q ⨍_Q |b − a_b(Q)|`` with its argmax cube."""

    def oscillation(blocks: np.ndarray, side: int) -> np.ndarray:
        values = blocks[..., 0]
        return np.mean(np.abs(values - values.mean(axis=1, keepdims=True)), axis=1)

    return _sup_over_family([b.samples], b, family, oscillation)


def bmo_norm(b: SampledFunction, family: CubeFamily | None = None) -> float:
    return bmo_constant(b, family).value


def ap_constant(w: SampledFunction, p: float, family: CubeFamily | None = None) -> WeightConstant:
    """``sup_Q (⨍w)(⨍w^{1−p'})^{p−1}``.

    Raises:
        WeightError: If w ≤ 0 on a cell or p ≤ 1.
    """
    if p <= 1:
        raise WeightError("A_p needs p > 1", context={"p": p})
    _require_positive(w)
    dual = w.samples ** (1.0 - _conjugate(p))

    def product(blocks: np.ndarray, side: int) -> np.ndarray:
        return blocks[..., 0].mean(axis=1) * blocks[..., 1].mean(axis=1) ** (p - 1.0)

    return _sup_over_family([w.samples, dual], w, family, product)


def apq_constant(w: SampledFunction, p: float, q: float, family: CubeFamily | None = None) -> WeightConstant:
    """``sup_Q (⨍w^q)(⨍w^{−p'})^{q/p'}`` from cellwise powers of w.

    For p = 1 the second factor is ``(ess sup_Q w^{-1})^q``.
    """
    _require_positive(w)
    if p == 1:
        return apq_constant_from_powers(w.with_samples(w.samples ** q), w.with_samples(1.0 / w.samples),
                                        p, q, family)
    pc = _conjugate(p)
    return apq_constant_from_powers(w.with_samples(w.samples ** q), w.with_samples(w.samples ** -pc),
                                    p, q, family)


def apq_constant_from_powers(
    w_q: SampledFunction,
    w_dual: SampledFunction,
    p: float,
    q: float,
    family: CubeFamily | None = None,
) -> WeightConstant:
    """A_{p,q} from cell averages of ``w^q`` and ``w^{−p'}`` (``w^{-1}`` when p = 1).

    Exactly averaged powers keep the blow-up of singular weights that
    cellwise powers of cell averages lose.
    """
    w_q.require_same_cells(w_dual)
    _require_positive(w_q, "w^q")
    _require_positive(w_dual, "w^(-p')")
    if p < 1 or q <= 0:
        raise WeightError("need p >= 1 and q > 0", context={"p": p, "q": q})
    pc = _conjugate(p)

    def product(blocks: np.ndarray, side: int) -> np.ndarray:
        first = blocks[..., 0].mean(axis=1)
        if p == 1:
            return first * blocks[..., 1].max(axis=1) ** q
        return first * blocks[..., 1].mean(axis=1) ** (q / pc)

    constant = _sup_over_family([w_q.samples, w_dual.samples], w_q, family, product)
    logger.debug("A_{p,q} constant", extra={"p": p, "q": q, "value": constant.value})
    return constant


def bump_products(
    pair: WeightPair,
    A: YoungFunction,
    B: YoungFunction,
    family: CubeFamily | None = None,
) -> tuple[np.ndarray, list]:
    """Per-cube values ``|Q|^{α/n+1/q−1/p} ‖u^{1/q}‖_{A,Q} ‖v^{−1/p}‖_{B,Q}``.

    Returns:
        ``(values, cubes)`` aligned arrays over the whole family.

    Raises:
        WeightError: If v vanishes on a cell (degenerate v).
    """
    _require_positive(pair.v, "v")
    u_root = pair.u.samples ** (1.0 / pair.q)
    v_root = pair.v.samples ** (-1.0 / pair.p)
    exponent = pair.alpha / pair.u.dimension + 1.0 / pair.q - 1.0 / pair.p
    h = pair.u.cell_size
    family = family or CubeFamily()
    stacked = np.stack([u_root, v_root], axis=-1)
    values, cubes = [], []
    for batch in family.batches(pair.u):
        scale = (batch.side * h) ** (pair.u.dimension * exponent)
        for rows, blocks in batch.chunks(stacked, chunk_points=2 ** 21):
            norms_u = luxemburg_values(blocks[..., 0], A, exact_power=True)
            norms_v = luxemburg_values(blocks[..., 1], B, exact_power=True)
            values.append(scale * norms_u * norms_v)
            cubes.extend(cube_from_start(pair.u, start, batch.side) for start in batch.starts[rows])
    return np.concatenate(values), cubes


def bump_constant(
    pair: WeightPair,
    A: YoungFunction,
    B: YoungFunction,
    family: CubeFamily | None = None,
) -> WeightConstant:
    """``[u, v]_{p,A,B}``, with the fractional factor when α > 0 or p ≠ q."""
    values, cubes = bump_products(pair, A, B, family)
    i = int(np.argmax(values))
    constant = WeightConstant(float(values[i]), cube_record(cubes[i]), pair.u.resolution, len(values))
    logger.info("Bump constant", extra={"A": A.describe(), "B": B.describe(), "value": constant.value})
    return constant


def reverse_factorization_functions(A: YoungFunction, B: YoungFunction,
                                    p: float) -> tuple[YoungFunction, YoungFunction]:
    """Return ``Φ(t) = A(t^{1/p})`` and ``Ψ(t) = B(t^{1/p'})``."""
    return Composed(A, 1.0 / p), Composed(B, 1.0 - 1.0 / p)


def factored_pair(
    w1: SampledFunction,
    w2: SampledFunction,
    phi: YoungFunction,
    psi: YoungFunction,
    p: float,
    alpha: float = 0.0,
    family: CubeFamily | None = None,
) -> WeightPair:
    """``(w1 (M_{Ψ,α} w2)^{1−p}, (M_{Φ,α} w1) w2^{1−p})``.

    The maximal operators run over ``family`` (dyadic cubes by default).

    Raises:
        WeightError: If the maximal function of w2 vanishes where w1 > 0, or
            w2 vanishes on a cell.
    """
    w1.require_same_cells(w2)
    if np.any(w1.samples < 0) or np.any(w2.samples < 0):
        raise WeightError("factored pairs need nonnegative weights")
    if not (np.any(w1.samples > 0) and np.any(w2.samples > 0)):
        raise WeightError("weights must not vanish identically")
    family = family or CubeFamily.dyadic_only()
    m_psi = orlicz_maximal(w2, psi, alpha, family=family).samples
    m_phi = orlicz_maximal(w1, phi, alpha, family=family).samples
    bad = np.argwhere((m_psi <= 0) & (w1.samples > 0))
    if len(bad):
        raise WeightError("M_{Ψ,α} w2 vanishes on a cell where w1 > 0",
                          context={"cell": [int(i) for i in bad[0]]})
    _require_positive(w2, "w2")
    with np.errstate(divide="ignore"):
        u = w1.samples * np.where(m_psi > 0, m_psi, 1.0) ** (1.0 - p)
    v = m_phi * w2.samples ** (1.0 - p)
    return WeightPair(w1.with_samples(u), w1.with_samples(v), p, p, alpha)


def expL_bmo_check(b: SampledFunction, family: CubeFamily | None = None) -> WeightConstant:
    """``max_Q ‖b − a_b(Q)‖_{exp L, Q} / ‖b‖_BMO``; zero for constant b."""
    norm = bmo_norm(b, family)
    if norm == 0:
        return WeightConstant(0.0, None, b.resolution, 0)
    expl = ExpL()

    def ratio(blocks: np.ndarray, side: int) -> np.ndarray:
        values = blocks[..., 0]
        centered = values - values.mean(axis=1, keepdims=True)
        return luxemburg_values(centered, expl) / norm

    return _sup_over_family([b.samples], b, family, ratio)
