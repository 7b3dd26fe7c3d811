"""Medians, rearrangements, local mean oscillation and stopping-time decompositions.

Everything here works relative to a root cube Q made of ``2**J`` cells per
side; D(Q) are the cubes obtained from Q by repeated bisection, whether or not
Q itself is a cube of the ambient dyadic grid. All quantities are exact on
the cell grid: rearrangements sort cell values with their cell volume as
multiplicity, and every set is a union of cells.

Conventions:
    * medians take the lower admissible value (sorted index ⌈N/2⌉ − 1);
    * rearrangements are left-continuous, so ``f*(t)`` is the value
      exceeded by ``|f|`` on the first ⌈t/|cell|⌉ cells of the sorted list;
    * ``ω_λ(f, Q)`` is half the width of the shortest value window holding
      at least ``N − ⌈λN⌉ + 1`` of the N cells.

Example:
    >>> from dyadic_grid import DyadicGrid, DyadicCube
    >>> from function_families import sample_function
    >>> from oscillation import local_oscillation
    >>> f = sample_function("x", DyadicGrid(1), 10, (0.0,), (1.0,))
    >>> round(local_oscillation(f, DyadicCube(DyadicGrid(1), 0, (0,)), 0.25), 3)
    0.375
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from cube_families import CubeBatch, cube_from_start, cube_record
from dyadic_grid import (
    Cube,
    DyadicCube,
    SampledFunction,
    block_mean_pyramid,
    tile_blocks,
    untile_blocks,
    upsample,
)
from integral_operators import CommutatorSpec, HaarShift, commutator_apply
from lab_errors import DecompositionError, ParameterError
from orlicz import LogBump, luxemburg_norm
from weight_constants import bmo_norm

logger = logging.getLogger(__name__)

SHARP_LAMBDA = 0.25

_EPS = 1e-9


# ---------------------------------------------------------------------------
# Row-wise primitives on blocks of shape (C, m)
# ---------------------------------------------------------------------------

def lower_median_rows(blocks: np.ndarray) -> np.ndarray:
    m = blocks.shape[1]
    k = math.ceil(m / 2) - 1
    return np.partition(blocks, k, axis=1)[:, k]


def rearrangement_rows(blocks: np.ndarray, cells: float) -> np.ndarray:
    """Left-continuous rearrangement of ``|blocks|`` at ``cells`` cell masses."""
    m = blocks.shape[1]
    k = min(m - 1, max(0, math.ceil(cells - _EPS) - 1))
    # k-th largest is the (m-1-k)-th smallest
    return np.partition(np.abs(blocks), m - 1 - k, axis=1)[:, m - 1 - k]


def oscillation_rows(blocks: np.ndarray, lam: float) -> np.ndarray:
    m = blocks.shape[1]
    window = min(m, max(1, m - math.ceil(lam * m - _EPS) + 1))
    ordered = np.sort(blocks, axis=1)
    widths = ordered[:, window - 1:] - ordered[:, :m - window + 1]
    return widths.min(axis=1) / 2.0


def _check_lambda(lam: float) -> None:
    if not 0 < lam < 1:
        raise ParameterError("λ must lie in (0, 1)", field="lambda", value=lam)


# ---------------------------------------------------------------------------
# Single-cube operations
# ---------------------------------------------------------------------------

def median(f: SampledFunction, cells: np.ndarray | Cube | None = None) -> float:
    """Lower median of f on a cell set.

    Args:
        f: Sampled function (equal cell volumes).
        cells: Boolean mask of ``f.shape``, a cube, or ``None`` for the domain.

    Raises:
        ParameterError: If the cell set is empty.
    """
    if cells is None:
        values = f.samples.ravel()
    elif isinstance(cells, np.ndarray):
        values = f.samples[cells.astype(bool)]
    else:
        values = f.restrict(cells).ravel()
    if values.size == 0:
        raise ParameterError("median of an empty cell set", field="cells", value=0)
    return float(lower_median_rows(values[None, :])[0])


def rearrangement_value(f: SampledFunction, cube: Cube, t: float) -> float:
    """``(f χ_Q)*(t)`` for ``t ∈ (0, |Q|)``.

    Raises:
        ParameterError: If t is outside ``(0, |Q|)``.
    """
    if not 0 < t < cube.volume:
        raise ParameterError("t must lie in (0, |Q|)", field="t", value=t)
    values = f.restrict(cube).reshape(1, -1)
    return float(rearrangement_rows(values, t / f.cell_volume)[0])


def local_oscillation(f: SampledFunction, cube: Cube, lam: float) -> float:
    """``ω_λ(f, Q) = inf_c ((f − c)χ_Q)*(λ|Q|)``."""
    _check_lambda(lam)
    return float(oscillation_rows(f.restrict(cube).reshape(1, -1), lam)[0])


# ---------------------------------------------------------------------------
# Root handling
# ---------------------------------------------------------------------------

def _root_block(f: SampledFunction, root: Cube | None) -> tuple[np.ndarray, tuple[int, ...], int]:
    if root is None:
        root = f.domain_cube()
    slices = f.cube_slices(root)
    side = slices[0].stop - slices[0].start
    if side & (side - 1):
        raise DecompositionError("root cube side must be a power of two cells",
                                 context={"side_cells": side})
    return f.samples[slices], tuple(s.start for s in slices), side


def _on_root(f: SampledFunction, start: Sequence[int], values: np.ndarray) -> SampledFunction:
    lo_cells = tuple(c0 + s for c0, s in zip(f.lo_cells, start))
    return SampledFunction(f.grid, f.resolution, lo_cells, values)


def _sharp_max_array(values: np.ndarray, lam: float) -> np.ndarray:
    n = values.ndim
    side = values.shape[0]
    best = np.zeros(values.shape)
    while side > 1:
        tiles = tile_blocks(values, side)
        osc = oscillation_rows(tiles.reshape(len(tiles), -1), lam)
        painted = untile_blocks(upsample(osc.reshape((-1,) + (1,) * n), side), values.shape)
        np.maximum(best, painted, out=best)
        side //= 2
    return best


def local_sharp_max(f: SampledFunction, root: Cube | None = None, lam: float = SHARP_LAMBDA) -> SampledFunction:
    """``M^{♯,d}_{λ,Q} f``: per cell, the max of ``ω_λ`` over the cubes of D(Q) containing it.

    The result lives on the cells of the root cube.
    """
    _check_lambda(lam)
    values, start, _ = _root_block(f, root)
    return _on_root(f, start, _sharp_max_array(values, lam))


def _pyramid(values: np.ndarray) -> list[np.ndarray]:
    """Block means from coarsest (one block per batch row) to finest; batch axis first."""
    levels = [values]
    while levels[-1].shape[1] > 1:
        levels.append(block_mean_pyramid(levels[-1]))
    return levels[::-1]


def _stopping_cubes(values: np.ndarray, threshold: float, include_top: bool) -> list[tuple[int, np.ndarray]]:
    """Maximal sub-blocks whose mean exceeds ``threshold``.

    ``values`` has shape (B, S, ..., S). Returns ``(side, hits)`` pairs where
    ``hits`` rows are ``(batch, position...)`` in units of ``side``.
    """
    S = values.shape[1]
    pyramid = _pyramid(values)
    covered = np.zeros(pyramid[0].shape, dtype=bool)
    found = []
    for j, means in enumerate(pyramid):
        side = S >> j
        if j > 0:
            covered = upsample(covered, 2)
        if j == 0 and not include_top:
            continue
        selected = (means > threshold) & ~covered
        hits = np.argwhere(selected)
        if len(hits):
            found.append((side, hits))
        covered |= selected
    return found


# ---------------------------------------------------------------------------
# Decomposition trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeCube:
    """One cube ``Q_j^k`` of a decomposition, in root-local cell offsets."""

    level: int
    start: tuple[int, ...]
    side: int
    statistic: float
    parent: int | None
    cube: Cube

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(s, s + self.side) for s in self.start)


@dataclass(frozen=True)
class DecompositionTree:
    """Disjoint cube families ``{Q_j^k}``, k ≥ 1, inside a root cube.

    Attributes:
        root: The root cube Q.
        root_side: Root side in cells.
        mode: ``"lerner"`` or ``"cz"``.
        levels: ``levels[k-1]`` holds the cubes of level k.
        base: Height base a for CZ trees.
        heights: CZ height per level.
        root_statistic: ``m_f(Q)`` (Lerner) or ``a_f(Q)`` (CZ).
        constant: Empirical ĉ of the pointwise bound (Lerner only).
    """

    root: Cube
    root_side: int
    dimension: int
    mode: str
    levels: tuple[tuple[TreeCube, ...], ...]
    base: float | None = None
    heights: tuple[float, ...] = ()
    root_statistic: float = 0.0
    constant: float | None = None
    resolution: int = field(default=0, compare=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.root_side,) * self.dimension

    def omega(self, k: int) -> np.ndarray:
        """Mask of ``Ω_k`` on the root cells (empty beyond the last level)."""
        mask = np.zeros(self.shape, dtype=bool)
        if 1 <= k <= len(self.levels):
            for cube in self.levels[k - 1]:
                mask[cube.slices()] = True
        return mask

    def carved_sets(self) -> list[list[np.ndarray]]:
        """``E_j^k = Q_j^k \\ Ω_{k+1}`` as masks, per level."""
        out = []
        for k, level in enumerate(self.levels, start=1):
            below = self.omega(k + 1)
            sets = []
            for cube in level:
                mask = np.zeros(self.shape, dtype=bool)
                mask[cube.slices()] = True
                sets.append(mask & ~below)
            out.append(sets)
        return out

    def check_invariants(self) -> dict[str, bool]:
        """Evaluate the tree invariants exactly on the cells."""
        nested = half = disjoint_levels = True
        omegas = [self.omega(k) for k in range(1, len(self.levels) + 2)]
        for k, level in enumerate(self.levels, start=1):
            nested &= not np.any(omegas[k] & ~omegas[k - 1])
            count = np.zeros(self.shape, dtype=int)
            for cube in level:
                count[cube.slices()] += 1
                inside = int(np.count_nonzero(omegas[k][cube.slices()]))
                half &= 2 * inside <= cube.side ** self.dimension
            disjoint_levels &= bool(np.all(count <= 1))
        coverage = np.zeros(self.shape, dtype=int)
        mass = True
        for level, sets in zip(self.levels, self.carved_sets()):
            for cube, carved in zip(level, sets):
                coverage += carved
                mass &= cube.side ** self.dimension <= 2 * int(np.count_nonzero(carved))
        return {
            "nested": bool(nested),
            "disjoint_cubes": bool(disjoint_levels),
            "half_overlap": bool(half),
            "carved_disjoint": bool(np.all(coverage <= 1)),
            "carved_mass": bool(mass),
        }

    def to_record(self) -> dict:
        """Nested JSON record ``{level, index, median|average, children}``."""
        key = "median" if self.mode == "lerner" else "average"
        children: list[list[dict]] = [[] for _ in self.levels] + [[]]
        for k in range(len(self.levels), 0, -1):
            for i, cube in enumerate(self.levels[k - 1]):
                record = {
                    "level": k,
                    "index": cube_record(cube.cube),
                    key: cube.statistic,
                    "children": [c for c, parent in children[k] if parent == i],
                }
                if self.mode == "cz":
                    record["height"] = self.heights[k - 1]
                children[k - 1].append((record, cube.parent))
        record = {
            "mode": self.mode,
            "level": 0,
            "index": cube_record(self.root),
            key: self.root_statistic,
            "children": [c for c, _ in children[0]],
        }
        if self.mode == "cz":
            record["base"] = self.base
        if self.constant is not None:
            record["empirical_constant"] = self.constant
        return record

    def empirical_constant(self) -> float | None:
        return self.constant


@dataclass(frozen=True)
class CZCubes:
    """Calderón–Zygmund cubes at one height."""

    height: float
    cubes: tuple[TreeCube, ...]
    root_selected: bool
    mask: np.ndarray = field(repr=False)


def _tree_cubes(f: SampledFunction, root_start: Sequence[int], found, level: int) -> list[TreeCube]:
    out = []
    for side, hits in found:
        for row in hits:
            start = tuple(int(p) * side for p in row[1:])
            absolute = [a + s for a, s in zip(root_start, start)]
            out.append(TreeCube(level, start, side, 0.0, None, cube_from_start(f, absolute, side)))
    return out


def cz_cubes(f: SampledFunction, height: float, root: Cube | None = None) -> CZCubes:
    """Maximal cubes of D(Q) whose average exceeds ``height``.

    When the root average already exceeds the height the root alone is
    returned with ``root_selected`` set.

    Raises:
        ParameterError: If f takes negative values or height ≤ 0.
    """
    if height <= 0:
        raise ParameterError("height must be positive", field="height", value=height)
    values, start, side = _root_block(f, root)
    if np.any(values < 0):
        raise ParameterError("Calderón–Zygmund cubes need f ≥ 0", field="f", value=float(values.min()))
    found = _stopping_cubes(values[None], height, include_top=True)
    cubes = _tree_cubes(f, start, found, 1)
    mask = np.zeros(values.shape, dtype=bool)
    averages = []
    for cube in cubes:
        mask[cube.slices()] = True
        averages.append(float(values[cube.slices()].mean()))
    cubes = [TreeCube(c.level, c.start, c.side, a, None, c.cube) for c, a in zip(cubes, averages)]
    root_selected = len(cubes) == 1 and cubes[0].side == side
    if root_selected:
        logger.info("Root average exceeds the height", extra={"height": height, "average": averages[0]})
    return CZCubes(height, tuple(cubes), root_selected, mask)


def dyadic_maximal(f: SampledFunction, root: Cube | None = None) -> SampledFunction:
    """``M^d f`` relative to D(Q), on the root cells."""
    values, start, _ = _root_block(f, root)
    best = np.full(values.shape, -np.inf)
    for means in _pyramid(np.abs(values)[None]):
        np.maximum(best, upsample(means, values.shape[0] // means.shape[1])[0], out=best)
    return _on_root(f, start, best)


def cz_decompose(f: SampledFunction, base: float | None = None, root: Cube | None = None) -> DecompositionTree:
    """CZ cubes at the heights ``a^k`` from just above the root average up to max f.

    The default base is ``a = 4^n``; the first height is the least power of a
    not below the root average, so no level selects the root.
    """
    values, start, side = _root_block(f, root)
    n = values.ndim
    a = float(base) if base is not None else 4.0 ** n
    if a <= 2.0 ** n:
        raise ParameterError("height base must exceed 2^n", field="base", value=a)
    root_cube = cube_from_start(f, start, side)
    top = float(values.max())
    mean = float(values.mean())
    if top <= 0:
        return DecompositionTree(root_cube, side, n, "cz", (), a, (), mean, resolution=f.resolution)
    if np.any(values < 0):
        raise ParameterError("Calderón–Zygmund cubes need f ≥ 0", field="f", value=float(values.min()))
    k = math.ceil(math.log(mean) / math.log(a))
    while a ** k < mean:
        k += 1
    while a ** (k - 1) >= mean:
        k -= 1
    levels, heights = [], []
    previous: list[TreeCube] = []
    while a ** k < top:
        found = cz_cubes(f, a ** k, root_cube)
        level = []
        for cube in found.cubes:
            parent = None
            for i, p in enumerate(previous):
                if all(ps <= cs < ps + p.side for ps, cs in zip(p.start, cube.start)):
                    parent = i
                    break
            level.append(TreeCube(len(levels) + 1, cube.start, cube.side, cube.statistic, parent, cube.cube))
        if level:
            levels.append(tuple(level))
            heights.append(a ** k)
            previous = level
        k += 1
    logger.info("CZ decomposition", extra={"levels": len(levels), "base": a})
    return DecompositionTree(root_cube, side, n, "cz", tuple(levels), a, tuple(heights), mean,
                             resolution=f.resolution)


def _lerner_step(values: np.ndarray, group: list[tuple[int, tuple[int, ...]]], side: int):
    """Medians of the grouped cubes and their stopping children.

    Returns ``(medians, children)`` where children are ``(row, start, side)``.
    """
    n = values.ndim
    starts = np.array([s for _, s in group], dtype=int).reshape(-1, n)
    batch = CubeBatch(side, starts)
    medians = np.empty(len(group))
    children = []
    m = side ** n
    threshold = 2.0 ** (-n - 1)
    for rows, blocks in batch.chunks(values):
        med = lower_median_rows(blocks)
        medians[rows] = med
        deviation = np.abs(blocks - med[:, None])
        gamma = rearrangement_rows(deviation, 2.0 ** (-n - 2) * m)
        exceed = (deviation > gamma[:, None]).astype(float).reshape((-1,) + (side,) * n)
        for sub, hits in _stopping_cubes(exceed, threshold, include_top=False):
            for hit in hits:
                row = rows.start + int(hit[0])
                origin = starts[row]
                child = tuple(int(o) + int(p) * sub for o, p in zip(origin, hit[1:]))
                children.append((row, child, sub))
    return medians, children


def lerner_decompose(f: SampledFunction, root: Cube | None = None) -> DecompositionTree:
    """Stopping-time decomposition of ``f − m_f(Q)`` with its empirical constant.

    For each selected cube P (the root first) the exceptional set
    ``E_P = {|f − m_f(P)| > ((f − m_f(P))χ_P)*(2^{−n−2}|P|)}`` is formed and
    the children of P are the maximal cubes R of D(P) with
    ``|E_P ∩ R| > 2^{−n−1}|R|``. The returned tree carries
    ``ĉ = max |f − m_f(Q)| / (M^♯_{1/4,Q} f + Σ ω_{2^{−n−2}}(f, R̂) χ_R)``
    with R̂ the dyadic parent of R and 0/0 read as 0.
    """
    values, start, side = _root_block(f, root)
    n = values.ndim
    root_cube = cube_from_start(f, start, side)
    root_median, pending = _lerner_step(values, [(0, (0,) * n)], side)
    pending = [(None, child, sub) for _, child, sub in pending]
    levels: list[tuple[TreeCube, ...]] = []
    while pending:
        k = len(levels) + 1
        groups: dict[int, list[tuple[int, tuple[int, ...]]]] = defaultdict(list)
        for i, (_, child, sub) in enumerate(pending):
            groups[sub].append((i, child))
        medians = np.empty(len(pending))
        upcoming = []
        for sub, group in groups.items():
            group_medians, children = _lerner_step(values, group, sub)
            for (i, _), value in zip(group, group_medians):
                medians[i] = value
            upcoming.extend((group[row][0], child, csub) for row, child, csub in children)
        level = []
        for i, (parent, child, sub) in enumerate(pending):
            absolute = [a + s for a, s in zip(start, child)]
            level.append(TreeCube(k, child, sub, float(medians[i]), parent, cube_from_start(f, absolute, sub)))
        levels.append(tuple(level))
        pending = upcoming
    constant = _lerner_constant(values, float(root_median[0]), levels)
    logger.info("Lerner decomposition", extra={"levels": len(levels), "constant": constant})
    return DecompositionTree(root_cube, side, n, "lerner", tuple(levels), None, (),
                             float(root_median[0]), constant, resolution=f.resolution)


def _lerner_constant(values: np.ndarray, root_median: float, levels) -> float:
    n = values.ndim
    lam = 2.0 ** (-n - 2)
    bound = _sharp_max_array(values, SHARP_LAMBDA)
    by_side: dict[int, list[TreeCube]] = defaultdict(list)
    for level in levels:
        for cube in level:
            by_side[cube.side].append(cube)
    for sub, cubes in by_side.items():
        parent_side = 2 * sub
        parents = np.array([[(s // parent_side) * parent_side for s in c.start] for c in cubes], dtype=int)
        osc = np.empty(len(cubes))
        for rows, blocks in CubeBatch(parent_side, parents).chunks(values):
            osc[rows] = oscillation_rows(blocks, lam)
        for cube, value in zip(cubes, osc):
            bound[cube.slices()] += value
    numerator = np.abs(values - root_median)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(numerator == 0, 0.0, numerator / bound)
    return float(ratio.max())


def commutator_oscillation_ratio(spec: CommutatorSpec, f: SampledFunction, cube: DyadicCube,
                                 lam: float = SHARP_LAMBDA) -> float:
    """``ω_λ([b,T^d]f, Q) / (‖b‖_BMO (‖f‖_{L log L, Q^τ} + inf_Q T^d_* f))`` for a Haar shift T^d.

    Raises:
        ParameterError: If the operator is not a Haar shift.
        GridError: If ``Q^τ`` leaves the domain.
    """
    shift = spec.operator
    if not isinstance(shift, HaarShift):
        raise ParameterError("the oscillation bound is stated for Haar shifts", field="operator",
                             value=spec.operator.describe())
    _check_lambda(lam)
    top = cube.ancestor(shift.tau)
    numerator = local_oscillation(commutator_apply(spec, f), cube, lam)
    truncated = float(shift.truncated_max(f).restrict(cube).min())
    scale = bmo_norm(spec.symbol) * (luxemburg_norm(f, top, LogBump(1.0, 1.0)) + truncated)
    if numerator == 0:
        return 0.0
    return math.inf if scale == 0 else numerator / scale
