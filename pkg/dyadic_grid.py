"""Dyadic cube geometry and cell-averaged sampled functions.

A :class:`DyadicGrid` fixes the dimension n, a scale r and a shift β; its
cubes at level k are ``r*(2**k * m + [β, β+1)^n)``. A :class:`SampledFunction`
stores one cell average per cell of side ``r * 2**-L`` over a box made of whole
cells, so every dyadic cube of level ≥ −L inside the box is a union of cells
and its average is exact.

Example:
    >>> import numpy as np
    >>> from dyadic_grid import DyadicGrid, DyadicCube, SampledFunction, average
    >>> grid = DyadicGrid(1)
    >>> f = SampledFunction.from_box(grid, 10, lo=(0.0,), hi=(1.0,), samples=np.full(1024, 5.0))
    >>> average(f, DyadicCube(grid, 0, (0,)))
    5.0
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np

from lab_errors import GridError, NonFiniteSamplesError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DyadicGrid:
    """Dyadic lattice ``r * D^β`` in dimension n.

    Attributes:
        dimension: Spatial dimension n.
        scale: Positive scale r.
        shift: Shift vector β.
    """

    dimension: int
    scale: float = 1.0
    shift: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise GridError("dimension must be positive", context={"dimension": self.dimension})
        if not self.scale > 0:
            raise GridError("scale must be positive", context={"scale": self.scale})
        shift = self.shift if self.shift is not None else (0.0,) * self.dimension
        if len(shift) != self.dimension:
            raise GridError("shift length must equal the dimension", context={"shift": shift})
        object.__setattr__(self, "shift", tuple(float(b) for b in shift))

    @property
    def origin(self) -> np.ndarray:
        """Common corner of the lattice, ``r * β``."""
        return self.scale * np.asarray(self.shift)

    def cube_at(self, point: Sequence[float], level: int) -> DyadicCube:
        """Return the cube of the given level containing ``point``."""
        side = self.scale * 2.0 ** level
        index = tuple(int(math.floor((x - o) / side)) for x, o in zip(point, self.origin))
        return DyadicCube(self, level, index)


@dataclass(frozen=True)
class LatticeCube:
    """Axis-parallel cube ``lo + [0, side)^n``, not necessarily dyadic."""

    lo: tuple[float, ...]
    side: float

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return self.side ** self.dimension

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(x + self.side for x in self.lo)

    def to_record(self) -> dict:
        return {"lo": list(self.lo), "side": self.side}


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of ``grid`` at ``level`` with integer ``index`` m."""

    grid: DyadicGrid
    level: int
    index: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))
        if len(self.index) != self.grid.dimension:
            raise GridError("index length must equal the dimension", context={"index": self.index})

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @property
    def side(self) -> float:
        return self.grid.scale * 2.0 ** self.level

    @property
    def volume(self) -> float:
        return self.side ** self.dimension

    @property
    def lo(self) -> tuple[float, ...]:
        scale, shift = self.grid.scale, self.grid.shift
        return tuple(scale * (2.0 ** self.level * m + b) for m, b in zip(self.index, shift))

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(x + self.side for x in self.lo)

    def parent(self) -> DyadicCube:
        return DyadicCube(self.grid, self.level + 1, tuple(m >> 1 for m in self.index))

    def ancestor(self, tau: int) -> DyadicCube:
        """Return Q^τ, the dyadic cube containing Q with ``|Q^τ| = 2^{τn}|Q|``."""
        if tau < 0:
            raise GridError("ancestor order must be nonnegative", context={"tau": tau})
        return DyadicCube(self.grid, self.level + tau, tuple(m >> tau for m in self.index))

    def children(self) -> list[DyadicCube]:
        """The 2^n children in lexicographic order of their offsets."""
        offsets = itertools.product((0, 1), repeat=self.dimension)
        return [
            DyadicCube(self.grid, self.level - 1, tuple(2 * m + e for m, e in zip(self.index, off)))
            for off in offsets
        ]

    def contains(self, other: DyadicCube) -> bool:
        if other.grid != self.grid or other.level > self.level:
            return False
        return other.ancestor(self.level - other.level).index == self.index

    def as_lattice(self) -> LatticeCube:
        return LatticeCube(self.lo, self.side)

    def to_record(self) -> dict:
        return {"level": self.level, "index": list(self.index), "lo": list(self.lo), "side": self.side}


Cube = Union[DyadicCube, LatticeCube]


@dataclass(frozen=True)
class CubeRelatives:
    parent: DyadicCube
    children: list[DyadicCube]
    ancestor: DyadicCube


def cube_relatives(cube: DyadicCube, tau: int) -> CubeRelatives:
    """Return the parent, the 2^n children and the τ-fold ancestor of ``cube``."""
    return CubeRelatives(cube.parent(), cube.children(), cube.ancestor(tau))


@dataclass(frozen=True)
class Box:
    """Half-open axis-parallel box ``[lo, hi)``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise GridError("box corners differ in dimension", context={"lo": self.lo, "hi": self.hi})
        if any(h <= lo for lo, h in zip(self.lo, self.hi)):
            raise GridError("box is empty", context={"lo": self.lo, "hi": self.hi})


def cubes_touching(grid: DyadicGrid, domain: Box, levels: Sequence[int]) -> Iterator[DyadicCube]:
    """Yield every cube of ``grid`` meeting ``domain`` at the given levels, each once.

    Levels are visited in increasing order; within a level the indices run
    lexicographically.
    """
    origin = grid.origin
    for level in sorted(set(int(k) for k in levels)):
        side = grid.scale * 2.0 ** level
        ranges = []
        for lo, hi, o in zip(domain.lo, domain.hi, origin):
            first = math.floor((lo - o) / side)
            last = math.ceil((hi - o) / side) - 1
            ranges.append(range(first, last + 1))
        for index in itertools.product(*ranges):
            yield DyadicCube(grid, level, index)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Cell averages of a real function on a box of whole cells.

    Attributes:
        grid: The dyadic grid the cells belong to.
        resolution: L; cells have side ``r * 2**-L`` (dyadic level −L).
        lo_cells: Integer cell coordinates of the box corner relative to the
            lattice origin ``r*β``.
        samples: Array of shape ``(N_1, ..., N_n)`` of cell averages.
    """

    grid: DyadicGrid
    resolution: int
    lo_cells: tuple[int, ...]
    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != self.grid.dimension:
            samples = samples.reshape(self.shape_hint(samples))
        if not np.all(np.isfinite(samples)):
            raise NonFiniteSamplesError(
                "sampled function holds non-finite values",
                context={"count": int(np.sum(~np.isfinite(samples)))},
            )
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "lo_cells", tuple(int(c) for c in self.lo_cells))

    def shape_hint(self, samples: np.ndarray) -> tuple[int, ...]:
        count = samples.size
        side = round(count ** (1.0 / self.grid.dimension))
        if side ** self.grid.dimension != count:
            raise GridError("samples do not form a cube of cells", context={"size": count})
        return (side,) * self.grid.dimension

    @classmethod
    def from_box(
        cls,
        grid: DyadicGrid,
        resolution: int,
        lo: Sequence[float],
        hi: Sequence[float],
        samples: np.ndarray | None = None,
    ) -> SampledFunction:
        """Create a function on the box ``[lo, hi)``; both corners must be cell vertices."""
        h = grid.scale * 2.0 ** -resolution
        lo_cells, shape = [], []
        for a, b, o in zip(lo, hi, grid.origin):
            ca, cb = (a - o) / h, (b - o) / h
            if not (_is_integer(ca) and _is_integer(cb)) or cb <= ca:
                raise GridError(
                    "domain corners must be cell vertices",
                    context={"lo": list(lo), "hi": list(hi), "cell": h},
                )
            lo_cells.append(int(round(ca)))
            shape.append(int(round(cb - ca)))
        data = np.zeros(shape) if samples is None else np.asarray(samples, dtype=float).reshape(shape)
        return cls(grid, resolution, tuple(lo_cells), data)

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return self.samples.shape

    @property
    def cell_size(self) -> float:
        return self.grid.scale * 2.0 ** -self.resolution

    @property
    def cell_volume(self) -> float:
        return self.cell_size ** self.dimension

    @property
    def lo(self) -> tuple[float, ...]:
        h = self.cell_size
        return tuple(o + h * c for o, c in zip(self.grid.origin, self.lo_cells))

    @property
    def hi(self) -> tuple[float, ...]:
        h = self.cell_size
        return tuple(x + h * s for x, s in zip(self.lo, self.shape))

    @property
    def domain(self) -> Box:
        return Box(self.lo, self.hi)

    def axes(self) -> list[np.ndarray]:
        """Cell centers along each axis."""
        h = self.cell_size
        return [lo + h * (np.arange(s) + 0.5) for lo, s in zip(self.lo, self.shape)]

    def integral(self) -> float:
        return float(self.samples.sum() * self.cell_volume)

    def with_samples(self, samples: np.ndarray) -> SampledFunction:
        return SampledFunction(self.grid, self.resolution, self.lo_cells, np.asarray(samples).reshape(self.shape))

    def same_cells(self, other: SampledFunction) -> bool:
        return (
            self.grid == other.grid
            and self.resolution == other.resolution
            and self.lo_cells == other.lo_cells
            and self.shape == other.shape
        )

    def require_same_cells(self, other: SampledFunction) -> None:
        if not self.same_cells(other):
            raise GridError(
                "functions live on different cell grids",
                context={"left": (self.resolution, self.lo_cells, self.shape),
                         "right": (other.resolution, other.lo_cells, other.shape)},
            )

    def cube_slices(self, cube: Cube) -> tuple[slice, ...]:
        """Array slices selecting the cells of ``cube``.

        Raises:
            GridError: If the cube is finer than a cell, not cell aligned, or
                not contained in the domain.
        """
        h = self.cell_size
        side_cells = cube.side / h
        if side_cells < 1 - 1e-12 or not _is_integer(side_cells):
            raise GridError(
                "cube is finer than the grid or not a whole number of cells",
                context={"side": cube.side, "cell": h},
            )
        s = int(round(side_cells))
        slices = []
        for x, o, c0, n_cells in zip(cube.lo, self.grid.origin, self.lo_cells, self.shape):
            start = (x - o) / h - c0
            if not _is_integer(start):
                raise GridError("cube corner is not a cell vertex", context={"lo": list(cube.lo)})
            a = int(round(start))
            if a < 0 or a + s > n_cells:
                raise GridError("cube lies outside the domain", context={"lo": list(cube.lo), "side": cube.side})
            slices.append(slice(a, a + s))
        return tuple(slices)

    def restrict(self, cube: Cube) -> np.ndarray:
        return self.samples[self.cube_slices(cube)]

    def cube_of_cell(self, cell: Sequence[int], level: int) -> DyadicCube:
        """Dyadic cube at ``level`` containing the cell with array index ``cell``."""
        shift = self.resolution + level
        if shift < 0:
            raise GridError("level finer than the grid", context={"level": level})
        return DyadicCube(
            self.grid, level, tuple((c0 + c) >> shift for c0, c in zip(self.lo_cells, cell))
        )

    def domain_cube(self) -> LatticeCube:
        """The domain as a cube; raises when the box is not a cube."""
        if len(set(self.shape)) != 1:
            raise GridError("domain is not a cube", context={"shape": self.shape})
        return LatticeCube(self.lo, self.shape[0] * self.cell_size)

    def dyadic_level_range(self) -> tuple[int, int]:
        """Levels (finest, coarsest) of dyadic cubes that fit in the domain."""
        coarsest = -self.resolution
        while True:
            if not any(True for _ in dyadic_starts(self, coarsest + 1)):
                break
            coarsest += 1
        return -self.resolution, coarsest

    def to_csv(self, path: str | Path) -> None:
        """Write the header row ``n,L,lo...,hi...`` and one row per cell."""
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow([self.dimension, self.resolution, *self.lo, *self.hi])
            for value in self.samples.ravel(order="C"):
                writer.writerow([repr(float(value))])
        logger.info("Wrote sampled function", extra={"path": str(path), "cells": self.samples.size})

    @classmethod
    def from_csv(cls, path: str | Path, grid: DyadicGrid | None = None) -> SampledFunction:
        """Read a function written by :meth:`to_csv` (standard grid unless given)."""
        try:
            with open(path, newline="", encoding="utf-8") as handle:
                rows = list(csv.reader(handle))
            header = [float(v) for v in rows[0]]
            n, resolution = int(header[0]), int(header[1])
            lo, hi = header[2:2 + n], header[2 + n:2 + 2 * n]
            values = np.array([float(row[0]) for row in rows[1:] if row])
        except (OSError, IndexError, ValueError) as exc:
            raise GridError(f"malformed sampled-function CSV: {exc}", context={"path": str(path)}) from exc
        grid = grid or DyadicGrid(n)
        function = cls.from_box(grid, resolution, lo, hi)
        if values.size != int(np.prod(function.shape)):
            raise GridError("cell count does not match the header", context={"path": str(path)})
        return function.with_samples(values.reshape(function.shape))


def average(f: SampledFunction, cube: Cube) -> float:
    """Return ``(1/|Q|) ∫_Q f``, exact on cell-aligned cubes."""
    return float(np.mean(f.restrict(cube)))


def dyadic_starts(f: SampledFunction, level: int) -> Iterator[tuple[int, ...]]:
    """Array offsets of the dyadic cubes of ``level`` contained in the domain."""
    s = 2 ** (level + f.resolution)
    axes = []
    for c0, n_cells in zip(f.lo_cells, f.shape):
        first = -(-c0 // s) * s - c0
        axes.append(range(first, n_cells - s + 1, s))
    return itertools.product(*axes)


def block_mean_pyramid(samples: np.ndarray, factor: int = 2) -> np.ndarray:
    """Average ``samples`` over non-overlapping blocks of ``factor`` cells per axis.

    The leading axis is a batch axis; the trailing n axes are pooled.
    """
    batch, *shape = samples.shape
    n = len(shape)
    split = [batch] + [v for s in shape for v in (s // factor, factor)]
    return samples.reshape(split).mean(axis=tuple(range(2, 2 * n + 1, 2)))


def upsample(values: np.ndarray, factor: int, batch: bool = True) -> np.ndarray:
    """Repeat each entry ``factor`` times along every spatial axis."""
    out = values
    start = 1 if batch else 0
    for axis in range(start, values.ndim):
        out = np.repeat(out, factor, axis=axis)
    return out


def _is_integer(value: float, tol: float = 1e-9) -> bool:
    return abs(value - round(value)) <= tol * max(1.0, abs(value))


def tile_blocks(array: np.ndarray, side: int) -> np.ndarray:
    """Split an array whose shape is a multiple of ``side`` into (C, side, ..., side) tiles.

    Tiles are ordered lexicographically by their position.
    """
    n = array.ndim
    counts = [s // side for s in array.shape]
    split = array.reshape([v for c in counts for v in (c, side)])
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return split.transpose(order).reshape((-1,) + (side,) * n)


def untile_blocks(tiles: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`tile_blocks`."""
    n = len(shape)
    side = tiles.shape[1]
    counts = [s // side for s in shape]
    grid = tiles.reshape(counts + [side] * n)
    order = [axis for k in range(n) for axis in (k, n + k)]
    return grid.transpose(order).reshape(tuple(shape))
