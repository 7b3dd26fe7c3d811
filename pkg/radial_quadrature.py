"""High-dynamic-range quadrature of radial profiles.

A :class:`RadialProfile` is a product of closed-form radial factors

    g(r) = c · r^a · (log r)^{e1} (log log r)^{e2} (log log log r)^{e3} · exp(−κ r^δ)

restricted to ``[r_lo, r_hi]``. :func:`radial_integrate` evaluates
``|S^{n−1}| ∫ g(r) r^{n−1} dr`` in the variable ``u = log r`` or, for
supports reaching astronomically far, ``t = log log r``, so radii like
``10^80`` and beyond cost nothing. The integrand is kept in log form until
the final exponential.

Example:
    >>> from radial_quadrature import parse_profile, radial_integrate
    >>> g = parse_profile("power:delta-n*expdelta:delta:q", 2, {"delta": 0.5, "q": 2})
    >>> round(radial_integrate(g).value, 6)
    6.283185
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import integrate, special

from function_families import evaluate_parameter
from lab_errors import ParameterError, QuadratureError

logger = logging.getLogger(__name__)

RADIAL_RTOL = 1e-8

# r at which log^{(d)} r first becomes positive
_TOWER = (1.0, math.e, math.exp(math.e))


def sphere_area(n: int) -> float:
    """``|S^{n−1}|``, with ``|S^0| = 2``."""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


class Convergence(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"


@dataclass(frozen=True)
class RadialProfile:
    """Closed-form radial rule ``g`` on ``[r_lo, r_hi]``.

    Attributes:
        dimension: n.
        power: Exponent a of ``r``.
        log_powers: Exponents of ``log r``, ``log log r``, ``log log log r``.
        expdelta: ``(δ, κ)`` for the factor ``exp(−κ r^δ)``, or ``None``.
        coefficient: Positive constant factor c.
        r_lo: Lower end of the support.
        r_hi: Upper end of the support (may be ``inf``).
    """

    dimension: int
    power: float = 0.0
    log_powers: tuple[float, float, float] = (0.0, 0.0, 0.0)
    expdelta: tuple[float, float] | None = None
    coefficient: float = 1.0
    r_lo: float = 0.0
    r_hi: float = math.inf
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ParameterError("dimension must be positive", field="dimension", value=self.dimension)
        if not 0 <= self.r_lo < self.r_hi:
            raise ParameterError("empty radial support", field="support", value=(self.r_lo, self.r_hi))
        if self.coefficient < 0:
            raise ParameterError("coefficient must be nonnegative", field="coefficient", value=self.coefficient)
        if self.expdelta is not None and not (self.expdelta[0] > 0 and self.expdelta[1] > 0):
            raise ParameterError("expdelta needs δ > 0 and κ > 0", field="expdelta", value=self.expdelta)
        depth = self.log_depth
        if depth and self.r_lo < _TOWER[depth - 1]:
            raise ParameterError(
                "iterated logarithms need the support to start beyond their zero",
                field="r_lo", value=self.r_lo,
            )

    @property
    def log_depth(self) -> int:
        """Deepest iterated logarithm carrying a nonzero exponent."""
        return max((d + 1 for d, e in enumerate(self.log_powers) if e != 0), default=0)

    def times(self, other: RadialProfile) -> RadialProfile:
        return RadialProfile(
            self.dimension,
            self.power + other.power,
            tuple(a + b for a, b in zip(self.log_powers, other.log_powers)),
            _merge_expdelta(self.expdelta, other.expdelta),
            self.coefficient * other.coefficient,
            max(self.r_lo, other.r_lo),
            min(self.r_hi, other.r_hi),
        )

    def restricted(self, lo: float, hi: float) -> RadialProfile:
        return replace(self, r_lo=max(self.r_lo, lo), r_hi=min(self.r_hi, hi))

    def log_density(self, u: np.ndarray, log_u: np.ndarray | None = None) -> np.ndarray:
        """``log(g(e^u) e^{nu})``; ``log_u`` may be passed when ``u`` itself would overflow."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.coefficient == 0:
                return np.full(u.shape, -np.inf)
            out = np.full(u.shape, math.log(self.coefficient))
            effective = self.power + self.dimension
            if effective:
                out = out + effective * u
            if self.log_depth:
                inner = np.log(u) if log_u is None else np.asarray(log_u, dtype=float)
                for depth, exponent in enumerate(self.log_powers[:self.log_depth]):
                    if depth:
                        inner = np.log(inner)
                    if exponent:
                        out = out + exponent * inner
            if self.expdelta is not None:
                delta, kappa = self.expdelta
                out = out - kappa * np.exp(delta * u)
        return out

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.log(r)
            values = np.exp(self.log_density(u) - self.dimension * u)
        return np.where((r >= self.r_lo) & (r <= self.r_hi), values, 0.0)

    def describe(self) -> str:
        if self.name:
            return self.name
        parts = [f"power:{self.power:g}"]
        for label, e in zip(("log", "loglog", "logloglog"), self.log_powers):
            if e:
                parts.append(f"{label}:{e:g}")
        if self.expdelta is not None:
            parts.append(f"expdelta:{self.expdelta[0]:g}:{self.expdelta[1]:g}")
        return "*".join(parts)


def _merge_expdelta(a, b):
    if a is None or b is None:
        return a or b
    if a[0] != b[0]:
        raise ParameterError("cannot merge exp factors with different δ", field="expdelta", value=(a, b))
    return (a[0], a[1] + b[1])


def parse_profile(text: str, dimension: int, variables: dict[str, float] | None = None) -> RadialProfile:
    """Parse ``*``-joined factors into a profile.

    Factors: ``power:a``, ``log:e``, ``loglog:e``, ``logloglog:e``,
    ``logpower:e1[,e2[,e3]]``, ``expdelta:δ[:κ]``, ``const:c``,
    ``cutoff:R0`` (support starts at R0) and ``upto:R1``. Parameters may use
    ``n``, ``e``, ``^`` for powers and any supplied variables.

    Raises:
        ParameterError: For unknown factors or malformed parameters.
    """
    names = {"n": float(dimension), "e": math.e, **(variables or {})}
    power, coefficient, r_lo, r_hi = 0.0, 1.0, 0.0, math.inf
    logs = [0.0, 0.0, 0.0]
    expdelta = None
    for token in filter(None, (t.strip() for t in text.split("*"))):
        kind, *raw = token.split(":")
        try:
            values = [evaluate_parameter(v.replace("^", "**"), names) for part in raw for v in part.split(",")]
        except (ValueError, SyntaxError, KeyError, ZeroDivisionError, OverflowError) as exc:
            raise ParameterError(f"bad radial factor parameter ({exc})", field="profile", value=token) from exc
        if kind == "power" and len(values) == 1:
            power += values[0]
        elif kind in ("log", "loglog", "logloglog") and len(values) == 1:
            logs[("log", "loglog", "logloglog").index(kind)] += values[0]
        elif kind == "logpower" and 1 <= len(values) <= 3:
            for depth, value in enumerate(values):
                logs[depth] += value
        elif kind == "expdelta" and len(values) in (1, 2):
            expdelta = _merge_expdelta(expdelta, (values[0], values[1] if len(values) == 2 else 1.0))
        elif kind == "const" and len(values) == 1:
            coefficient *= values[0]
        elif kind == "cutoff" and len(values) == 1:
            r_lo = max(r_lo, values[0])
        elif kind == "upto" and len(values) == 1:
            r_hi = min(r_hi, values[0])
        else:
            raise ParameterError("unknown radial factor", field="profile", value=token)
    return RadialProfile(dimension, power, tuple(logs), expdelta, coefficient, r_lo, r_hi, name=text)


# ---------------------------------------------------------------------------
# Tail analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailLaw:
    """Growth law ``G(R) = (log^{(depth)} R)^exponent`` of divergent partial integrals.

    ``depth`` 0 stands for a pure power ``R^exponent``.
    """

    depth: int
    exponent: float

    def describe(self) -> str:
        variable = ["R", "log R", "loglog R", "logloglog R", "loglogloglog R"][self.depth]
        return f"({variable})^{self.exponent:g}"


def tail_law(profile: RadialProfile) -> TailLaw | None:
    """Symbolic behavior of ``∫^R g(r) r^{n−1} dr`` as ``R → ∞``; ``None`` when it converges."""
    if profile.expdelta is not None or profile.coefficient == 0:
        return None
    effective = profile.power + profile.dimension
    if effective > 0:
        return TailLaw(0, effective)
    if effective < 0:
        return None
    # Bertrand scale in u = log r
    for depth, exponent in enumerate(profile.log_powers, start=1):
        if exponent > -1:
            return TailLaw(depth, exponent + 1.0)
        if exponent < -1:
            return None
    return TailLaw(4, 1.0)


def origin_integrable(profile: RadialProfile) -> bool:
    if profile.r_lo > 0 or profile.coefficient == 0:
        return True
    return profile.power + profile.dimension > 0


def classify(profile: RadialProfile) -> Convergence:
    """Symbolic convergence of the profile on its support."""
    if not origin_integrable(profile):
        return Convergence.DIVERGES
    if math.isinf(profile.r_hi) and tail_law(profile) is not None:
        return Convergence.DIVERGES
    return Convergence.CONVERGES


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialIntegral:
    """Result of :func:`radial_integrate`.

    Attributes:
        value: ``|S^{n−1}| ∫ g r^{n−1} dr`` (``inf`` when divergent).
        status: Convergence status.
        variable: Substitution used, ``"log"`` or ``"loglog"``.
        error: Absolute error estimate from the adaptive rule.
        growth: For divergent tails, the law and the fitted coefficient with
            the sampled partial integrals.
    """

    value: float
    status: Convergence
    variable: str
    error: float = 0.0
    growth: dict | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "status": self.status.value, "variable": self.variable,
                "error": self.error, "growth": self.growth}


def _substitution(profile: RadialProfile) -> str:
    if profile.expdelta is None and profile.r_lo >= math.e and (
        math.isinf(profile.r_hi) or math.log(profile.r_hi) / math.log(profile.r_lo) > 50.0
    ):
        return "loglog"
    return "log"


def _log_integrand(profile: RadialProfile, variable: str):
    if variable == "log":
        return profile.log_density
    return lambda t: profile.log_density(np.exp(t), t) + t


def _limits(profile: RadialProfile, variable: str) -> tuple[float, float]:
    lo, hi = profile.r_lo, profile.r_hi
    with np.errstate(divide="ignore"):
        u_lo = -math.inf if lo == 0 else math.log(lo)
        u_hi = math.inf if math.isinf(hi) else math.log(hi)
    if variable == "log":
        return u_lo, u_hi
    return math.log(u_lo), (math.inf if math.isinf(u_hi) else math.log(u_hi))


def _integrate_log_form(log_f, a: float, b: float, rtol: float) -> tuple[float, float]:
    """``∫_a^b exp(log_f)`` split at the mode of the integrand."""
    if a >= b:
        return 0.0, 0.0
    lo, hi = max(a, -745.0), min(b, 745.0)
    grid = np.linspace(lo, hi, 4001) if lo < hi else np.array([lo])
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.nan_to_num(np.asarray(log_f(grid), dtype=float), nan=-np.inf)
    if not np.any(np.isfinite(values)):
        return 0.0, 0.0
    mode = float(grid[int(np.argmax(values))])
    shift = float(np.max(values))

    def func(x: float) -> float:
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            value = float(np.exp(log_f(np.asarray(x)) - shift))
        return value if math.isfinite(value) else 0.0

    total, error = 0.0, 0.0
    pieces = [(a, mode), (mode, b)] if a < mode < b else [(a, b)]
    for left, right in pieces:
        value, err = integrate.quad(func, left, right, epsabs=0.0, epsrel=rtol, limit=400)
        total += value
        error += err
    scale = math.exp(shift) if shift < 709 else math.inf
    return total * scale, error * scale


def partial_integrals(profile: RadialProfile, stops: list[float], variable: str = "loglog",
                      rtol: float = RADIAL_RTOL) -> list[float]:
    """Cumulative ``|S^{n−1}| ∫ g r^{n−1} dr`` from the support start to each stop.

    Stops are given in the substituted variable (``log r`` or ``log log r``).
    """
    log_f = _log_integrand(profile, variable)
    a, _ = _limits(profile, variable)
    area = sphere_area(profile.dimension)
    out, running, left = [], 0.0, a
    for stop in stops:
        value, _ = _integrate_log_form(log_f, left, stop, rtol)
        running += value
        out.append(area * running)
        left = stop
    return out


def _growth(profile: RadialProfile, law: TailLaw, rtol: float) -> dict:
    """Sample partial integrals and fit ``I(R) ≈ c·G(R) + d``."""
    if law.depth == 0:
        variable = "log"
        a = _limits(profile, variable)[0]
        start = a if math.isfinite(a) else 0.0
        stops = [start + math.log(10.0) * k for k in range(1, 7)]
        law_values = [math.exp(law.exponent * s) for s in stops]
        radii = [f"exp({s:g})" for s in stops]
    else:
        variable = "loglog" if law.depth >= 2 and profile.r_lo >= math.e else "log"
        a = _limits(profile, variable)[0]
        stops = [a + 2.0 ** j for j in range(10)]
        # variable value log^{(depth)} R expressed from the substituted coordinate
        offset = 2 if variable == "loglog" else 1
        law_values = []
        for s in stops:
            x = s
            for _ in range(law.depth - offset):
                x = math.log(x) if x > 0 else -math.inf
            if law.depth < offset:
                x = math.exp(x)
            law_values.append(x ** law.exponent if x > 0 else 0.0)
        radii = [f"{variable}={s:g}" for s in stops]
    partials = partial_integrals(profile, stops, variable, rtol)
    design = np.column_stack([law_values, np.ones(len(law_values))])
    (coef, intercept), *_ = np.linalg.lstsq(design, np.array(partials), rcond=None)
    return {
        "law": law.describe(),
        "coefficient": float(coef),
        "intercept": float(intercept),
        "radii": radii,
        "partials": partials,
    }


def radial_integrate(
    profile: RadialProfile,
    window: tuple[float, float] | None = None,
    rtol: float = RADIAL_RTOL,
) -> RadialIntegral:
    """``|S^{n−1}| ∫ g(r) r^{n−1} dr`` over the support intersected with ``window``.

    Divergent integrals are not evaluated; they come back as ``inf`` with
    the growth law of the partial integrals.

    Raises:
        QuadratureError: If the adaptive rule returns a non-finite value on a
            convergent integral.
    """
    if window is not None:
        profile = profile.restricted(*window)
    variable = _substitution(profile)
    status = classify(profile)
    if status is Convergence.DIVERGES:
        growth = None
        law = tail_law(profile)
        if origin_integrable(profile) and law is not None:
            growth = _growth(profile, law, rtol)
        logger.info("Radial integral diverges", extra={"profile": profile.describe(), "growth": growth})
        return RadialIntegral(math.inf, status, variable, math.inf, growth)
    if profile.coefficient == 0:
        return RadialIntegral(0.0, status, variable)
    a, b = _limits(profile, variable)
    value, error = _integrate_log_form(_log_integrand(profile, variable), a, b, rtol)
    area = sphere_area(profile.dimension)
    if not math.isfinite(value):
        raise QuadratureError("radial quadrature returned a non-finite value",
                              context={"profile": profile.describe(), "variable": variable})
    logger.debug("Radial integral", extra={"profile": profile.describe(), "value": area * value})
    return RadialIntegral(area * value, status, variable, area * error)
