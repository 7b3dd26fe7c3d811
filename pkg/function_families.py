"""Built-in analytic functions and their exact cell averages.

Each family is addressed by a string id such as ``power:-0.5`` or
``charfn:-1:1``; :func:`sample_function` turns an id into a
:class:`~dyadic_grid.SampledFunction` holding true cell averages. Smooth
families use tensor Gauss–Legendre rules; ``power`` and ``log`` use their
homogeneity on the cells touching the origin and refined rules next to it, so
singular weights such as ``|x|^(δ-n)`` keep their blow-up on the grid.

Parameters may be arithmetic expressions over named variables, e.g.
``power:(n-delta)/p'`` with ``variables={"n": 2, "delta": 0.2, "p'": 4}``.

Example:
    >>> from dyadic_grid import DyadicGrid
    >>> from function_families import sample_function
    >>> f = sample_function("x", DyadicGrid(1), 10, (0.0,), (1.0,))
    >>> round(f.samples.mean(), 12)
    0.5
"""

from __future__ import annotations

import ast
import functools
import logging
import math
import operator
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from dyadic_grid import DyadicGrid, SampledFunction
from lab_errors import FunctionFamilyError, GridError

logger = logging.getLogger(__name__)

_GAUSS_ORDER = 4
_REFINE = 8
_NEAR_CELLS = 2.0
_CHUNK_POINTS = 2 ** 22


class AnalyticFunction:
    """A real function on R^n that can report exact cell averages."""

    name = "function"

    def averages(self, template: SampledFunction) -> np.ndarray:
        raise NotImplementedError

    def power(self, exponent: float) -> AnalyticFunction:
        """Return ``|self|**exponent`` when the family is closed under powers."""
        raise FunctionFamilyError(self.name, "family is not closed under powers")


@dataclass(frozen=True)
class Constant(AnalyticFunction):
    value: float
    name = "const"

    def averages(self, template: SampledFunction) -> np.ndarray:
        return np.full(template.shape, float(self.value))

    def power(self, exponent: float) -> AnalyticFunction:
        return Constant(abs(self.value) ** exponent)


@dataclass(frozen=True)
class Indicator(AnalyticFunction):
    """Indicator of the cube ``[a, b)^n``."""

    a: float
    b: float
    name = "charfn"

    def averages(self, template: SampledFunction) -> np.ndarray:
        factors = [_overlap_fraction(template, axis, self.a, self.b) for axis in range(template.dimension)]
        return _outer(factors)

    def power(self, exponent: float) -> AnalyticFunction:
        if exponent <= 0:
            return super().power(exponent)
        return self


@dataclass(frozen=True)
class Heaviside(AnalyticFunction):
    """Indicator of ``x_1 >= 0``."""

    name = "heaviside"

    def averages(self, template: SampledFunction) -> np.ndarray:
        frac = _overlap_fraction(template, 0, 0.0, math.inf)
        return _broadcast_axis(frac, 0, template.shape)


@dataclass(frozen=True)
class Coordinate(AnalyticFunction):
    axis: int = 0
    name = "coord"

    def averages(self, template: SampledFunction) -> np.ndarray:
        if self.axis >= template.dimension:
            raise FunctionFamilyError(f"coord:{self.axis}", "axis exceeds the dimension")
        return _broadcast_axis(template.axes()[self.axis], self.axis, template.shape)


@dataclass(frozen=True)
class HaarFunction(AnalyticFunction):
    """L²-normalized Haar function of the standard dyadic interval of level k, index m."""

    level: int
    index: int
    name = "haar"

    def averages(self, template: SampledFunction) -> np.ndarray:
        if template.dimension != 1:
            raise FunctionFamilyError("haar", "Haar functions are one-dimensional")
        side = 2.0 ** self.level
        lo = side * self.index
        mid, hi = lo + side / 2, lo + side
        left = _overlap_fraction(template, 0, lo, mid)
        right = _overlap_fraction(template, 0, mid, hi)
        return (left - right) / math.sqrt(side)


@dataclass(frozen=True)
class RadialPower(AnalyticFunction):
    """``|x|**exponent``, optionally cut to the unit ball."""

    exponent: float
    ball: bool = False
    name = "power"

    def averages(self, template: SampledFunction) -> np.ndarray:
        n = template.dimension
        if self.exponent <= -n:
            raise FunctionFamilyError(f"power:{self.exponent}", "exponent must exceed -n for local integrability")
        a = self.exponent

        def pointwise(r: np.ndarray) -> np.ndarray:
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.where(r > 0, r ** a, 0.0 if a > 0 else np.inf)
            if self.ball:
                values = np.where(r < 1.0, values, 0.0)
            return values

        def origin_cell(h: float) -> float:
            if self.ball and h * math.sqrt(n) > 1.0:
                raise GridError("origin cell must lie inside the unit ball", context={"cell": h})
            return h ** a * unit_cube_power_mean(n, a)

        return _radial_averages(template, pointwise, origin_cell, sphere_edge=self.ball)

    def power(self, exponent: float) -> AnalyticFunction:
        return RadialPower(self.exponent * exponent, self.ball)


@dataclass(frozen=True)
class RadialPowerLog(AnalyticFunction):
    """``|x|**exponent * log|x|``, optionally cut to the unit ball."""

    exponent: float
    ball: bool = False
    name = "powerlog"

    def averages(self, template: SampledFunction) -> np.ndarray:
        n = template.dimension
        a = self.exponent
        if a <= -n:
            raise FunctionFamilyError(f"powerlog:{a}", "exponent must exceed -n for local integrability")

        def pointwise(r: np.ndarray) -> np.ndarray:
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.where(r > 0, r ** a * np.log(r), 0.0 if a > 0 else -np.inf)
            if self.ball:
                values = np.where(r < 1.0, values, 0.0)
            return values

        def origin_cell(h: float) -> float:
            if self.ball and h * math.sqrt(n) > 1.0:
                raise GridError("origin cell must lie inside the unit ball", context={"cell": h})
            # d/da of the homogeneous mean h^a I_n(a)
            step = 1e-5
            slope = (unit_cube_power_mean(n, a + step) - unit_cube_power_mean(n, a - step)) / (2 * step)
            return h ** a * (math.log(h) * unit_cube_power_mean(n, a) + slope)

        return _radial_averages(template, pointwise, origin_cell, sphere_edge=self.ball)


@dataclass(frozen=True)
class RadialLog(AnalyticFunction):
    """``log|x|``."""

    name = "log"

    def averages(self, template: SampledFunction) -> np.ndarray:
        n = template.dimension

        def pointwise(r: np.ndarray) -> np.ndarray:
            with np.errstate(divide="ignore"):
                return np.log(r)

        return _radial_averages(template, pointwise, lambda h: math.log(h) + unit_cube_log_mean(n))


@dataclass(frozen=True)
class SmoothFunction(AnalyticFunction):
    """Bounded function given pointwise; averaged with Gauss–Legendre rules."""

    pointwise: Callable[..., np.ndarray]
    name: str = "smooth"
    refine_origin: bool = False

    def averages(self, template: SampledFunction) -> np.ndarray:
        values = _gauss_averages(template, self.pointwise)
        if self.refine_origin:
            for cell in _cells_near_point(template, np.zeros(template.dimension), _NEAR_CELLS):
                values[cell] = _refined_cell_average(template, cell, self.pointwise)
        return values


@dataclass(frozen=True)
class RandomPiecewiseConstant(AnalyticFunction):
    """Seeded positive function, constant on a ``pieces^n`` partition of the domain."""

    seed: int
    pieces: int
    spread: float = 1.0
    name = "randpc"

    def averages(self, template: SampledFunction) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        if any(s % self.pieces for s in template.shape):
            raise FunctionFamilyError(f"randpc:{self.seed}:{self.pieces}", "pieces must divide the cells per axis")
        values = np.exp(self.spread * rng.standard_normal((self.pieces,) * template.dimension))
        for axis, s in enumerate(template.shape):
            values = np.repeat(values, s // self.pieces, axis=axis)
        return values


def _bump(*coords: np.ndarray) -> np.ndarray:
    r2 = sum(c * c for c in coords)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(r2 < 1.0, np.exp(-1.0 / np.maximum(1.0 - r2, 1e-300)), 0.0)


def _odd_bump(*coords: np.ndarray) -> np.ndarray:
    return coords[0] * _bump(*coords)


def parse_function(function_id: str, variables: dict[str, float] | None = None) -> AnalyticFunction:
    """Build the analytic function named by ``function_id``.

    Supported ids: ``const:c``, ``charfn:a:b``, ``heaviside``, ``x``,
    ``coord:i``, ``haar:k:m``, ``power:a``, ``powerball:a``, ``powerlogball:a``, ``log``,
    ``bump``, ``oddbump``, ``gauss:s``, ``expdelta:d``, ``randpc:seed:pieces[:spread]``.

    Raises:
        FunctionFamilyError: For unknown ids or malformed parameters.
    """
    name, *raw = function_id.strip().split(":")
    try:
        params = [evaluate_parameter(p, variables) for p in raw]
    except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
        raise FunctionFamilyError(function_id, f"bad parameter ({exc})") from exc

    def need(count: int) -> list[float]:
        if len(params) != count:
            raise FunctionFamilyError(function_id, f"expected {count} parameter(s)")
        return params

    if name == "const":
        return Constant(need(1)[0])
    if name == "charfn":
        a, b = need(2)
        return Indicator(a, b)
    if name == "heaviside":
        need(0)
        return Heaviside()
    if name == "x":
        need(0)
        return Coordinate(0)
    if name == "coord":
        return Coordinate(int(need(1)[0]))
    if name == "haar":
        k, m = need(2)
        return HaarFunction(int(k), int(m))
    if name == "power":
        return RadialPower(need(1)[0])
    if name == "powerball":
        return RadialPower(need(1)[0], ball=True)
    if name == "powerlogball":
        return RadialPowerLog(need(1)[0], ball=True)
    if name == "log":
        need(0)
        return RadialLog()
    if name == "bump":
        need(0)
        return SmoothFunction(_bump, "bump")
    if name == "oddbump":
        need(0)
        return SmoothFunction(_odd_bump, "oddbump")
    if name == "gauss":
        (s,) = need(1)
        return SmoothFunction(lambda *c: np.exp(-sum(x * x for x in c) / (s * s)), "gauss")
    if name == "expdelta":
        (d,) = need(1)
        if not 0 < d:
            raise FunctionFamilyError(function_id, "delta must be positive")
        return SmoothFunction(
            lambda *c: np.exp(-np.sqrt(sum(x * x for x in c)) ** d),
            "expdelta",
            refine_origin=True,
        )
    if name == "randpc":
        if len(params) not in (2, 3):
            raise FunctionFamilyError(function_id, "expected seed, pieces and optional spread")
        spread = params[2] if len(params) == 3 else 1.0
        return RandomPiecewiseConstant(int(params[0]), int(params[1]), spread)
    raise FunctionFamilyError(function_id, "unknown family")


def sample_function(
    function_id: str | AnalyticFunction,
    grid: DyadicGrid,
    resolution: int,
    lo: Sequence[float],
    hi: Sequence[float],
    variables: dict[str, float] | None = None,
) -> SampledFunction:
    """Sample a family on the box ``[lo, hi)`` at resolution L."""
    function = function_id if isinstance(function_id, AnalyticFunction) else parse_function(function_id, variables)
    template = SampledFunction.from_box(grid, resolution, lo, hi)
    values = function.averages(template)
    logger.debug("Sampled function", extra={"function": str(function_id), "cells": values.size})
    return template.with_samples(values)


def sample_like(function_id: str | AnalyticFunction, template: SampledFunction,
                variables: dict[str, float] | None = None) -> SampledFunction:
    function = function_id if isinstance(function_id, AnalyticFunction) else parse_function(function_id, variables)
    return template.with_samples(function.averages(template))


_BINARY = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_ALIASES = {"δ": "delta", "α": "alpha", "p'": "pp", "q'": "qq", "n'": "nn"}


def evaluate_parameter(text: str, variables: dict[str, float] | None = None) -> float:
    """Evaluate an arithmetic parameter such as ``4/3`` or ``(n-delta)/p'``."""
    for alias, plain in _ALIASES.items():
        text = text.replace(alias, plain)
    names = {}
    for key, value in (variables or {}).items():
        names[_ALIASES.get(key, key)] = float(value)
    tree = ast.parse(text.strip(), mode="eval")

    def walk(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Name):
            return names[node.id]
        raise ValueError(f"unsupported expression element {type(node).__name__}")

    return walk(tree)


@functools.lru_cache(maxsize=256)
def unit_cube_power_mean(n: int, a: float) -> float:
    """Mean of ``|x|**a`` over ``[0,1)^n`` for ``a > -n``."""
    if n == 1:
        return 1.0 / (a + 1.0)
    face = _face_integral(n, lambda s2: (1.0 + s2) ** (a / 2.0))
    return n / (n + a) * face


@functools.lru_cache(maxsize=16)
def unit_cube_log_mean(n: int) -> float:
    """Mean of ``log|x|`` over ``[0,1)^n``."""
    if n == 1:
        return -1.0
    return -1.0 / n + 0.5 * _face_integral(n, np.log1p)


def _face_integral(n: int, g: Callable[[np.ndarray], np.ndarray]) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(24)
    nodes, weights = 0.5 * (nodes + 1.0), 0.5 * weights
    mesh = np.meshgrid(*([nodes] * (n - 1)), indexing="ij")
    w = np.ones_like(mesh[0])
    for wi in np.meshgrid(*([weights] * (n - 1)), indexing="ij"):
        w = w * wi
    s2 = sum(m * m for m in mesh)
    return float(np.sum(w * g(s2)))


def _overlap_fraction(template: SampledFunction, axis: int, a: float, b: float) -> np.ndarray:
    h = template.cell_size
    lo = template.lo[axis] + h * np.arange(template.shape[axis])
    return np.clip(np.minimum(lo + h, b) - np.maximum(lo, a), 0.0, h) / h


def _outer(factors: list[np.ndarray]) -> np.ndarray:
    out = factors[0]
    for factor in factors[1:]:
        out = np.multiply.outer(out, factor)
    return out


def _broadcast_axis(values: np.ndarray, axis: int, shape: tuple[int, ...]) -> np.ndarray:
    view = [1] * len(shape)
    view[axis] = shape[axis]
    return np.broadcast_to(values.reshape(view), shape).copy()


def _gauss_averages(template: SampledFunction, pointwise: Callable[..., np.ndarray]) -> np.ndarray:
    """Tensor Gauss–Legendre cell averages, chunked along the first axis."""
    n = template.dimension
    xi, wi = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    h = template.cell_size
    centers = template.axes()
    nodes = [(c[:, None] + 0.5 * h * xi[None, :]).ravel() for c in centers]
    weight = _outer([wi / 2.0] * n)
    rest = int(np.prod(template.shape[1:])) * _GAUSS_ORDER ** n
    rows = max(1, _CHUNK_POINTS // max(rest, 1))
    out = np.empty(template.shape)
    for start in range(0, template.shape[0], rows):
        stop = min(template.shape[0], start + rows)
        axis0 = nodes[0][start * _GAUSS_ORDER:stop * _GAUSS_ORDER]
        coords = np.meshgrid(axis0, *nodes[1:], indexing="ij", sparse=True)
        values = pointwise(*coords)
        values = np.broadcast_to(values, tuple(len(c) for c in [axis0, *nodes[1:]]))
        split = values.reshape([v for s in [stop - start, *template.shape[1:]] for v in (s, _GAUSS_ORDER)])
        order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        out[start:stop] = np.tensordot(split.transpose(order), weight, axes=n)
    return out


def _refined_cell_average(template: SampledFunction, cell: tuple[int, ...],
                          pointwise: Callable[..., np.ndarray]) -> float:
    n = template.dimension
    h = template.cell_size
    xi, wi = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    sub = h / _REFINE
    axes = []
    for axis, index in enumerate(cell):
        lo = template.lo[axis] + h * index
        centers = lo + sub * (np.arange(_REFINE) + 0.5)
        axes.append((centers[:, None] + 0.5 * sub * xi[None, :]).ravel())
    weights_1d = np.tile(wi / 2.0, _REFINE) / _REFINE
    coords = np.meshgrid(*axes, indexing="ij", sparse=True)
    values = np.broadcast_to(pointwise(*coords), tuple(len(a) for a in axes))
    return float(np.sum(values * _outer([weights_1d] * n)))


def _cells_near_point(template: SampledFunction, point: np.ndarray, radius_cells: float) -> list[tuple[int, ...]]:
    h = template.cell_size
    ranges = []
    for axis in range(template.dimension):
        u = (point[axis] - template.lo[axis]) / h
        first = max(0, int(math.floor(u - radius_cells)) - 1)
        last = min(template.shape[axis] - 1, int(math.ceil(u + radius_cells)))
        if first > last:
            return []
        ranges.append(range(first, last + 1))
    cells = []
    for cell in np.ndindex(*[len(r) for r in ranges]):
        index = tuple(r[i] for r, i in zip(ranges, cell))
        gap = 0.0
        for axis, i in enumerate(index):
            lo = template.lo[axis] + h * i
            gap += max(lo - point[axis], 0.0, point[axis] - lo - h) ** 2
        if math.sqrt(gap) <= radius_cells * h:
            cells.append(index)
    return cells


def _origin_vertex(template: SampledFunction) -> tuple[int, ...] | None:
    """Cell-unit position of the origin if it lies in the closed domain.

    Raises:
        GridError: When the origin is in the closed domain but not a cell vertex.
    """
    h = template.cell_size
    position = []
    for axis in range(template.dimension):
        u = -template.lo[axis] / h
        if u < -1e-9 or u > template.shape[axis] + 1e-9:
            return None
        position.append(u)
    if any(abs(u - round(u)) > 1e-9 for u in position):
        raise GridError(
            "singular point must sit on a cell vertex",
            context={"origin_cells": position},
        )
    return tuple(int(round(u)) for u in position)


def _radial_averages(
    template: SampledFunction,
    pointwise_radial: Callable[[np.ndarray], np.ndarray],
    origin_cell: Callable[[float], float],
    sphere_edge: bool = False,
) -> np.ndarray:
    """Cell averages of a radial function singular at the origin."""
    n = template.dimension
    h = template.cell_size

    def pointwise(*coords: np.ndarray) -> np.ndarray:
        return pointwise_radial(np.sqrt(sum(c * c for c in coords)))

    vertex = _origin_vertex(template)
    near = set(_cells_near_point(template, np.zeros(n), _NEAR_CELLS))
    touching = set()
    if vertex is not None:
        for offset in np.ndindex(*([2] * n)):
            cell = tuple(v - 1 + o for v, o in zip(vertex, offset))
            if all(0 <= c < s for c, s in zip(cell, template.shape)):
                touching.add(cell)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        values = _gauss_averages(template, pointwise)
        if sphere_edge:
            near |= set(_cells_near_sphere(template))
        for cell in near - touching:
            values[cell] = _refined_cell_average(template, cell, pointwise)
    for cell in touching:
        values[cell] = origin_cell(h)
    return values


def _cells_near_sphere(template: SampledFunction) -> list[tuple[int, ...]]:
    """Cells crossed by the unit sphere."""
    h = template.cell_size
    lows = np.meshgrid(*[template.lo[a] + h * np.arange(s) for a, s in enumerate(template.shape)],
                       indexing="ij", sparse=True)
    nearest = sum(np.maximum(np.maximum(lo - 0.0, 0.0 - lo - h), 0.0) ** 2 for lo in lows)
    farthest = sum(np.maximum(np.abs(lo), np.abs(lo + h)) ** 2 for lo in lows)
    crossing = (nearest < 1.0) & (farthest > 1.0)
    return [tuple(int(i) for i in idx) for idx in np.argwhere(crossing)]
