"""Young functions, associates, Luxemburg norms and Orlicz maximal operators.

Families:
    * ``Power(r, scale)``: ``scale * t**r``.
    * ``LogBump(r, s)``: ``t**r * log(e+t)**s``.
    * ``Quotient(r, s)``: ``t**r / log(e+t)**s``.
    * ``ExpL``: ``e**t - 1``; its associate is ``ExpLAssociate``.
    * ``Composed(base, c)``: ``base(t**c)``.
    * ``Legendre(base)``: the exact associate ``sup_s (s t - base(s))``,
      evaluated through the parametrization ``(base'(s), s base'(s) - base(s))``.

Example:
    >>> from orlicz import LogBump, luxemburg_values
    >>> import numpy as np
    >>> round(float(luxemburg_values(np.ones((1, 8)), LogBump(1, 1))[0]), 4)
    1.3133
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from cube_families import CubeFamily
from dyadic_grid import Cube, SampledFunction
from function_families import evaluate_parameter
from lab_errors import NonFiniteSamplesError, YoungFunctionError

logger = logging.getLogger(__name__)

E = math.e
BISECTION_RTOL = 1e-10
_T_MIN, _T_MAX = 1e-300, 1e300


class YoungFunction:
    """Convex growth function Φ with Φ(0) = 0 and Φ(t)/t → ∞."""

    family = "young"

    def __call__(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def asymptotics(self) -> tuple[float, float] | None:
        """Exponents (r, s) with Φ(t) ≈ t^r log(t)^s at infinity; None if exponential."""
        raise YoungFunctionError(f"no symbolic asymptotics for {self.describe()}")

    def describe(self) -> str:
        return self.family

    def inverse(self, y: np.ndarray) -> np.ndarray:
        """Φ⁻¹ by vectorized bisection in log space."""
        y = np.asarray(y, dtype=float)
        return _solve_increasing(self, y)

    def superlinear(self) -> bool:
        return True


@dataclass(frozen=True)
class Power(YoungFunction):
    r: float
    scale: float = 1.0
    family = "power"

    def __post_init__(self) -> None:
        if self.r < 1 or not self.scale > 0:
            raise YoungFunctionError("Power needs r >= 1 and a positive scale",
                                     context={"r": self.r, "scale": self.scale})

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.scale * np.asarray(t, dtype=float) ** self.r

    def derivative(self, t: np.ndarray) -> np.ndarray:
        return self.scale * self.r * np.asarray(t, dtype=float) ** (self.r - 1)

    def inverse(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=float) / self.scale) ** (1.0 / self.r)

    def asymptotics(self) -> tuple[float, float]:
        return self.r, 0.0

    def superlinear(self) -> bool:
        return self.r > 1

    def describe(self) -> str:
        if self.scale == 1.0:
            return f"power:{self.r:g}"
        return f"power:{self.r:g}*{self.scale:g}"


@dataclass(frozen=True)
class LogBump(YoungFunction):
    r: float
    s: float
    family = "logbump"

    def __post_init__(self) -> None:
        if self.r < 1 or (self.r == 1 and self.s <= 0):
            raise YoungFunctionError("LogBump needs r > 1, or r = 1 with s > 0",
                                     context={"r": self.r, "s": self.s})

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t ** self.r * np.log(E + t) ** self.s

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        log = np.log(E + t)
        return self.r * t ** (self.r - 1) * log ** self.s + self.s * t ** self.r * log ** (self.s - 1) / (E + t)

    def asymptotics(self) -> tuple[float, float]:
        return self.r, self.s

    def describe(self) -> str:
        return f"logbump:{self.r:g}:{self.s:g}"


@dataclass(frozen=True)
class Quotient(YoungFunction):
    r: float
    s: float
    family = "quotient"

    def __post_init__(self) -> None:
        if self.r <= 1:
            raise YoungFunctionError("Quotient needs r > 1", context={"r": self.r, "s": self.s})

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return t ** self.r / np.log(E + t) ** self.s

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        log = np.log(E + t)
        return self.r * t ** (self.r - 1) / log ** self.s - self.s * t ** self.r / (log ** (self.s + 1) * (E + t))

    def asymptotics(self) -> tuple[float, float]:
        return self.r, -self.s

    def describe(self) -> str:
        return f"quotient:{self.r:g}:{self.s:g}"


@dataclass(frozen=True)
class ExpL(YoungFunction):
    family = "expl"

    def __call__(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.expm1(np.asarray(t, dtype=float))

    def derivative(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(t, dtype=float))

    def inverse(self, y: np.ndarray) -> np.ndarray:
        return np.log1p(np.asarray(y, dtype=float))

    def asymptotics(self) -> None:
        return None


@dataclass(frozen=True)
class ExpLAssociate(YoungFunction):
    """``t log t - t + 1`` for t ≥ 1, zero below; the associate of ``e^t - 1``."""

    family = "expl_associate"

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        safe = np.maximum(t, 1.0)
        return np.where(t > 1.0, safe * np.log(safe) - safe + 1.0, 0.0)

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.where(t > 1.0, np.log(np.maximum(t, 1.0)), 0.0)

    def asymptotics(self) -> tuple[float, float]:
        return 1.0, 1.0


@dataclass(frozen=True)
class Composed(YoungFunction):
    """``base(t**c)``; used for the reverse-factorization functions A(t^{1/p})."""

    base: YoungFunction
    c: float
    family = "composed"

    def __post_init__(self) -> None:
        asym = self.base.asymptotics()
        if asym is not None and asym[0] * self.c < 1:
            raise YoungFunctionError("composition is not superlinear",
                                     context={"base": self.base.describe(), "c": self.c})

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.base(np.asarray(t, dtype=float) ** self.c)

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0, self.base.derivative(t ** self.c) * self.c * t ** (self.c - 1), 0.0)

    def inverse(self, y: np.ndarray) -> np.ndarray:
        return self.base.inverse(y) ** (1.0 / self.c)

    def asymptotics(self) -> tuple[float, float] | None:
        asym = self.base.asymptotics()
        return None if asym is None else (asym[0] * self.c, asym[1])

    def describe(self) -> str:
        return f"({self.base.describe()})∘t^{self.c:g}"


@dataclass(frozen=True)
class Legendre(YoungFunction):
    """Exact associate of ``base`` computed numerically."""

    base: YoungFunction
    family = "legendre"

    def _parametrize(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        slope = self.base.derivative(s)
        return slope, s * slope - self.base(s)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        floor = float(self.base.derivative(np.array(0.0)))
        s = _solve_increasing(self.base.derivative, np.maximum(t, floor))
        value = s * t - self.base(s)
        return np.where(t > floor, np.maximum(value, 0.0), 0.0)

    def derivative(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        floor = float(self.base.derivative(np.array(0.0)))
        s = _solve_increasing(self.base.derivative, np.maximum(t, floor))
        return np.where(t > floor, s, 0.0)

    def inverse(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)

        def legendre_value(s: np.ndarray) -> np.ndarray:
            return self._parametrize(s)[1]

        s = _solve_increasing(legendre_value, y)
        return np.where(y > 0, self.base.derivative(s), 0.0)

    def asymptotics(self) -> tuple[float, float] | None:
        asym = self.base.asymptotics()
        if asym is None:
            return 1.0, 1.0
        r, s = asym
        if r == 1:
            return None
        r_conj = r / (r - 1)
        return r_conj, -s * (r_conj - 1)

    def describe(self) -> str:
        return f"associate({self.base.describe()})"


def associate(phi: YoungFunction) -> YoungFunction:
    """Return Φ̄(t) = sup_s (st − Φ(s)).

    Closed forms for ``Power`` and ``ExpL``; other families get the exact
    numeric Legendre transform.

    Raises:
        YoungFunctionError: For functions without superlinear growth.
    """
    if not phi.superlinear():
        raise YoungFunctionError("associate requires Φ(t)/t → ∞", context={"phi": phi.describe()})
    if isinstance(phi, Power):
        r, c = phi.r, phi.scale
        return Power(r / (r - 1.0), (r - 1.0) / r * (c * r) ** (-1.0 / (r - 1.0)))
    if isinstance(phi, ExpL):
        return ExpLAssociate()
    if isinstance(phi, ExpLAssociate):
        return ExpL()
    if isinstance(phi, Legendre):
        return phi.base
    return Legendre(phi)


def equivalent_associate(phi: YoungFunction) -> YoungFunction:
    """Parametric family equivalent to Φ̄ at infinity (t^{r'} log^{-s(r'-1)})."""
    asym = phi.asymptotics()
    if asym is None:
        return ExpLAssociate()
    r, s = asym
    if r == 1:
        return ExpL()
    r_conj = r / (r - 1.0)
    s_conj = -s * (r_conj - 1.0)
    if s_conj == 0:
        return Power(r_conj)
    return LogBump(r_conj, s_conj) if s_conj > 0 else Quotient(r_conj, -s_conj)


class TailDiagnosis(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    MARGINAL = "marginal"


def bp_tail_exponent(phi: YoungFunction, p: float) -> TailDiagnosis:
    """Classify ``∫^∞ Φ(t)/t^p dt/t`` from the family's exponents (r, s).

    Converges iff r < p, or r = p and s < −1. The borderline r = p, s = −1
    (divergence at a log-log rate) is reported as ``marginal``.

    Raises:
        YoungFunctionError: If the family has no power-log exponents, as for
            the exponential class.
    """
    asym = phi.asymptotics()
    if asym is None:
        raise YoungFunctionError(
            f"{phi.describe()} has no (r, s) exponents; its B_p tail cannot be classified",
            context={"phi": phi.describe(), "p": p},
        )
    r, s = asym
    if math.isclose(r, p, rel_tol=1e-12):
        if math.isclose(s, -1.0, rel_tol=1e-12):
            return TailDiagnosis.MARGINAL
        return TailDiagnosis.CONVERGES if s < -1 else TailDiagnosis.DIVERGES
    return TailDiagnosis.CONVERGES if r < p else TailDiagnosis.DIVERGES


def parse_young(text: str, variables: dict[str, float] | None = None) -> YoungFunction:
    """Parse ``power:r``, ``logbump:r:s``, ``quotient:r:s``, ``llogl`` or ``expl``."""
    name, *raw = text.strip().split(":")
    try:
        params = [evaluate_parameter(p, variables) for p in raw]
    except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
        raise YoungFunctionError(f"bad Young function parameters in '{text}'") from exc
    expected = {"power": 1, "logbump": 2, "quotient": 2, "llogl": 0, "expl": 0}
    if name not in expected:
        raise YoungFunctionError(f"unknown Young function family '{name}'", context={"id": text})
    if len(params) != expected[name]:
        raise YoungFunctionError(f"'{name}' takes {expected[name]} parameter(s)", context={"id": text})
    if name == "power":
        return Power(params[0])
    if name == "logbump":
        return LogBump(*params)
    if name == "quotient":
        return Quotient(*params)
    if name == "llogl":
        return LogBump(1.0, 1.0)
    return ExpL()


def luxemburg_values(
    blocks: np.ndarray,
    phi: YoungFunction,
    rtol: float = BISECTION_RTOL,
    exact_power: bool = False,
) -> np.ndarray:
    """Luxemburg norms of many cubes at once.

    Args:
        blocks: Array (C, m) of the cell values of C cubes with m cells each.
        phi: Young function.
        rtol: Relative width at which bisection stops.
        exact_power: Use the closed form for ``Power`` instead of bisection.

    Returns:
        Array (C,) with inf{λ > 0 : mean Φ(|f|/λ) ≤ 1}; 0 on zero blocks.
    """
    a = np.abs(np.asarray(blocks, dtype=float))
    if not np.all(np.isfinite(a)):
        raise NonFiniteSamplesError("non-finite samples on cube", context={"count": int(np.sum(~np.isfinite(a)))})
    if exact_power and isinstance(phi, Power):
        return (phi.scale * np.mean(a ** phi.r, axis=1)) ** (1.0 / phi.r)
    top = a.max(axis=1)
    live = top > 0
    result = np.zeros(len(a))
    if not np.any(live):
        return result
    a, top = a[live], top[live]
    m = a.shape[1]
    hi = top / float(phi.inverse(np.array(1.0)))
    lo = top / float(phi.inverse(np.array(float(m))))
    log_lo, log_hi = np.log(lo), np.log(hi)

    def excess(log_lam: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.mean(phi(a / np.exp(log_lam)[:, None]), axis=1) - 1.0

    # widen in case rounding leaves the root outside
    for _ in range(60):
        bad_hi = excess(log_hi) > 0
        bad_lo = excess(log_lo) < 0
        if not (bad_hi.any() or bad_lo.any()):
            break
        log_hi = np.where(bad_hi, log_hi + 1.0, log_hi)
        log_lo = np.where(bad_lo, log_lo - 1.0, log_lo)
    steps = int(math.ceil(math.log2(max(float(np.max(log_hi - log_lo)), 1e-300) / rtol))) + 1
    for _ in range(max(steps, 1)):
        mid = 0.5 * (log_lo + log_hi)
        above = excess(mid) > 0
        log_lo = np.where(above, mid, log_lo)
        log_hi = np.where(above, log_hi, mid)
    result[live] = np.exp(log_hi)
    return result


def luxemburg_norm(f: SampledFunction, cube: Cube, phi: YoungFunction, rtol: float = BISECTION_RTOL) -> float:
    """‖f‖_{Φ,Q} by monotone bisection on λ."""
    block = f.restrict(cube).reshape(1, -1)
    return float(luxemburg_values(block, phi, rtol)[0])


def orlicz_maximal(
    f: SampledFunction,
    phi: YoungFunction,
    alpha: float = 0.0,
    flavor: str = "dyadic",
    family: CubeFamily | None = None,
    rtol: float = BISECTION_RTOL,
) -> SampledFunction:
    """Per-cell supremum of ``|Q|^{α/n} ‖f‖_{Φ,Q}`` over the cubes containing the cell.

    Args:
        f: Input function.
        phi: Young function.
        alpha: Fractional order in [0, n).
        flavor: ``"dyadic"`` (dyadic cubes in the domain) or ``"all-cubes"``
            (every dyadic side translated on the cell lattice).
        family: Explicit family overriding ``flavor``.
        rtol: Bisection tolerance.
    """
    if not 0 <= alpha < f.dimension:
        raise YoungFunctionError("alpha must lie in [0, n)", context={"alpha": alpha})
    if family is None:
        if flavor == "dyadic":
            family = CubeFamily.dyadic_only()
        elif flavor == "all-cubes":
            family = CubeFamily.all_cubes(f)
        else:
            raise YoungFunctionError(f"unknown maximal flavor '{flavor}'")
    out = np.zeros(f.shape)
    h = f.cell_size
    for batch in family.batches(f):
        values = np.empty(batch.count)
        for rows, blocks in batch.chunks(f.samples):
            values[rows] = luxemburg_values(blocks, phi, rtol, exact_power=True)
        if alpha:
            values *= (batch.side * h) ** alpha
        batch.paint_max(out, values)
    logger.debug("Orlicz maximal evaluated", extra={"phi": phi.describe(), "alpha": alpha})
    return f.with_samples(out)


def _solve_increasing(func: Callable[[np.ndarray], np.ndarray], targets: np.ndarray) -> np.ndarray:
    """Solve ``func(x) = target`` for increasing ``func`` on (0, ∞), elementwise."""
    targets = np.asarray(targets, dtype=float)
    flat = targets.reshape(-1)
    result = np.zeros_like(flat)
    live = flat > 0
    if not np.any(live):
        return result.reshape(targets.shape)
    y = flat[live]
    log_lo = np.full(y.shape, -2.0)
    log_hi = np.full(y.shape, 2.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(2000):
            low_bad = func(np.exp(log_lo)) > y
            high_bad = ~(func(np.exp(log_hi)) >= y)
            if not (low_bad.any() or high_bad.any()):
                break
            log_lo = np.where(low_bad, np.maximum(log_lo * 2.0 - 1.0, math.log(_T_MIN)), log_lo)
            log_hi = np.where(high_bad, np.minimum(log_hi * 2.0 + 1.0, math.log(_T_MAX)), log_hi)
        steps = int(math.ceil(math.log2(float(np.max(log_hi - log_lo)) / 1e-15))) + 1
        for _ in range(steps):
            mid = 0.5 * (log_lo + log_hi)
            above = func(np.exp(mid)) >= y
            log_hi = np.where(above, mid, log_hi)
            log_lo = np.where(above, log_lo, mid)
    result[live] = np.exp(0.5 * (log_lo + log_hi))
    return result.reshape(targets.shape)
