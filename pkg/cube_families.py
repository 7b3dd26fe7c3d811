"""Finite cube families over which every supremum in the lab is taken.

Cubes are handled in batches of equal side: a batch is a side length in cells
plus the array offsets of its cubes. Batches can gather their cell blocks and
paint per-cube values back onto the cells as a running maximum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from dyadic_grid import Cube, DyadicCube, LatticeCube, SampledFunction, dyadic_starts
from lab_errors import GridError

logger = logging.getLogger(__name__)

# max number of gathered samples per chunk
CHUNK_POINTS = 2 ** 22


@dataclass(frozen=True)
class CubeBatch:
    """Cubes of one side length, given by their array offsets."""

    side: int
    starts: np.ndarray

    @property
    def count(self) -> int:
        return len(self.starts)

    def chunks(self, samples: np.ndarray, chunk_points: int = CHUNK_POINTS) -> Iterator[tuple[slice, np.ndarray]]:
        """Yield ``(rows, blocks)`` with ``blocks`` of shape (c, side**n, ...).

        Trailing axes of ``samples`` beyond the n spatial ones are carried along.
        """
        n = self.starts.shape[1]
        offsets = np.indices((self.side,) * n).reshape(n, -1)
        rows = max(1, chunk_points // (self.side ** n))
        for first in range(0, self.count, rows):
            part = slice(first, min(self.count, first + rows))
            starts = self.starts[part]
            index = tuple(starts[:, axis][:, None] + offsets[axis][None, :] for axis in range(n))
            yield part, samples[index]

    def paint_max(self, out: np.ndarray, values: np.ndarray) -> None:
        """Raise every cell of ``out`` to the max of ``values`` over batch cubes containing it."""
        n = out.ndim
        marks = np.full(out.shape, -np.inf)
        np.maximum.at(marks, tuple(self.starts[:, axis] for axis in range(n)), values)
        for axis in range(n):
            pad = [(0, 0)] * n
            pad[axis] = (self.side - 1, 0)
            padded = np.pad(marks, pad, constant_values=-np.inf)
            marks = sliding_window_view(padded, self.side, axis=axis).max(axis=-1)
        np.maximum(out, marks, out=out)


@dataclass(frozen=True)
class CubeFamily:
    """The finite family of cubes standing in for "all cubes".

    Attributes:
        levels: Inclusive dyadic level window; ``None`` means every level
            that fits in the domain.
        dyadic: Include the dyadic cubes contained in the domain.
        translate_levels: Levels whose cubes are also taken at every
            lattice translate with step ``translate_step`` cells.
        translate_step: Step in cells; ``None`` uses half the side (at least 1).
            ``all_cubes`` passes 1 so every cell offset is covered.
        include_domain: Include the domain itself when it is a cube.
        extra: Additional cell-aligned cubes.
    """

    levels: tuple[int, int] | None = None
    dyadic: bool = True
    translate_levels: tuple[int, ...] = ()
    translate_step: int | None = None
    include_domain: bool = True
    extra: tuple[Cube, ...] = ()

    @classmethod
    def dyadic_only(cls, levels: tuple[int, int] | None = None) -> CubeFamily:
        return cls(levels=levels, include_domain=False)

    @classmethod
    def all_cubes(cls, f: SampledFunction, step: int = 1) -> CubeFamily:
        """Cubes of every dyadic side translated on the cell lattice."""
        finest, coarsest = f.dyadic_level_range()
        top = finest + int(np.floor(np.log2(min(f.shape))))
        return cls(dyadic=False, translate_levels=tuple(range(finest, top + 1)),
                   translate_step=step, include_domain=True)

    def batches(self, f: SampledFunction) -> list[CubeBatch]:
        n = f.dimension
        out: list[CubeBatch] = []
        if self.dyadic:
            finest, coarsest = f.dyadic_level_range()
            lo, hi = self.levels if self.levels is not None else (finest, coarsest)
            for level in range(max(lo, finest), min(hi, coarsest) + 1):
                starts = np.array(list(dyadic_starts(f, level)), dtype=int).reshape(-1, n)
                if len(starts):
                    out.append(CubeBatch(2 ** (level + f.resolution), starts))
        for level in self.translate_levels:
            side = 2 ** (level + f.resolution)
            if side < 1 or side > min(f.shape):
                continue
            step = self.translate_step or max(1, side // 2)
            axes = [np.arange(0, s - side + 1, step) for s in f.shape]
            grids = np.meshgrid(*axes, indexing="ij")
            out.append(CubeBatch(side, np.stack([g.ravel() for g in grids], axis=1)))
        cubes = list(self.extra)
        if self.include_domain and len(set(f.shape)) == 1:
            cubes.append(f.domain_cube())
        for cube in cubes:
            slices = f.cube_slices(cube)
            out.append(CubeBatch(slices[0].stop - slices[0].start,
                                 np.array([[s.start for s in slices]], dtype=int)))
        if not out:
            raise GridError("cube family is empty on this domain", context={"shape": f.shape})
        return out

    def cubes(self, f: SampledFunction) -> Iterator[Cube]:
        for batch in self.batches(f):
            for start in batch.starts:
                yield cube_from_start(f, start, batch.side)

    def describe(self) -> dict:
        return {
            "levels": list(self.levels) if self.levels else None,
            "dyadic": self.dyadic,
            "translate_levels": list(self.translate_levels),
            "translate_step": self.translate_step,
            "include_domain": self.include_domain,
            "extra": len(self.extra),
        }


def cube_from_start(f: SampledFunction, start: Sequence[int], side: int) -> Cube:
    """Name the cube with array offset ``start`` and ``side`` cells."""
    absolute = [c0 + int(s) for c0, s in zip(f.lo_cells, start)]
    if side & (side - 1) == 0 and all(a % side == 0 for a in absolute):
        level = int(np.log2(side)) - f.resolution
        return DyadicCube(f.grid, level, tuple(a // side for a in absolute))
    h = f.cell_size
    lo = tuple(o + h * a for o, a in zip(f.grid.origin, absolute))
    return LatticeCube(lo, side * h)


def cube_record(cube: Cube) -> dict:
    record = cube.to_record()
    record["kind"] = "dyadic" if isinstance(cube, DyadicCube) else "lattice"
    return record
