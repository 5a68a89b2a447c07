"""Rectilinear state lattices and finite action sets."""
import itertools
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from ras_lab.systems.benchmarks import BenchmarkId, Box
from ras_lab.utils.exceptions import GridIndexError, GridSpecError, ValidationError


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned lattice with ``counts[i]`` evenly spaced nodes per axis.

    Nodes are stored row-major: the last axis varies fastest.
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    counts: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "counts", tuple(int(v) for v in self.counts))
        if not len(self.lower) == len(self.upper) == len(self.counts) > 0:
            raise GridSpecError("Grid bounds and counts must have the same nonzero length.", self.as_dict())
        for low, high, count in zip(self.lower, self.upper, self.counts):
            if not (np.isfinite(low) and np.isfinite(high) and low < high):
                raise GridSpecError("Grid axes need finite bounds with lower < upper.", self.as_dict())
            if count < 2:
                raise GridSpecError("Grid axes need at least 2 nodes.", self.as_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        return cls(lower=tuple(data["lower"]), upper=tuple(data["upper"]), counts=tuple(data["counts"]))

    def as_dict(self) -> Dict[str, Any]:
        return {"lower": list(self.lower), "upper": list(self.upper), "counts": list(self.counts)}

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def low(self) -> np.ndarray:
        return np.asarray(self.lower)

    @property
    def high(self) -> np.ndarray:
        return np.asarray(self.upper)

    @property
    def spacing(self) -> np.ndarray:
        return (self.high - self.low) / (np.asarray(self.counts) - 1)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def strides(self) -> np.ndarray:
        """Flat-index stride of each axis."""
        return np.asarray(
            [int(np.prod(self.counts[axis + 1:])) for axis in range(self.ndim)], dtype=np.intp
        )

    def axis(self, index: int) -> np.ndarray:
        """Node coordinates along one axis."""
        return self.lower[index] + np.arange(self.counts[index]) * self.spacing[index]

    def box(self) -> Box:
        return Box(lower=self.lower, upper=self.upper)


# Default computational domains; the RAS sets of both benchmarks stay interior.
DEFAULT_GRIDS = {
    BenchmarkId.CART2D: GridSpec(lower=(-6.0, -4.0), upper=(6.0, 4.0), counts=(241, 161)),
    BenchmarkId.CHASE4D: GridSpec(
        lower=(-2.0, -2.0, -1.5, -1.5), upper=(2.0, 2.0, 1.5, 1.5), counts=(31, 31, 31, 31)
    ),
}


def node_state(spec: GridSpec, multi_index: Sequence[int]) -> np.ndarray:
    """Coordinates ``lower + index * spacing`` of one node."""
    index = np.asarray(multi_index, dtype=np.intp).reshape(-1)
    if index.shape != (spec.ndim,) or np.any(index < 0) or np.any(index >= np.asarray(spec.counts)):
        raise GridIndexError(
            "Node index out of range.", {"index": index.tolist(), "counts": list(spec.counts)}
        )
    return spec.low + index * spec.spacing


def flat_index(spec: GridSpec, multi_index: Sequence[int]) -> int:
    index = np.asarray(multi_index, dtype=np.intp).reshape(-1)
    if index.shape != (spec.ndim,) or np.any(index < 0) or np.any(index >= np.asarray(spec.counts)):
        raise GridIndexError(
            "Node index out of range.", {"index": index.tolist(), "counts": list(spec.counts)}
        )
    return int(np.dot(index, spec.strides))


def multi_index(spec: GridSpec, flat: int) -> Tuple[int, ...]:
    if not 0 <= flat < spec.size:
        raise GridIndexError("Flat node index out of range.", {"index": flat, "size": spec.size})
    return tuple(int(i) for i in np.unravel_index(flat, spec.shape))


def node_states(spec: GridSpec, nodes: Union[slice, np.ndarray, None] = None) -> np.ndarray:
    """Coordinates of several nodes (all by default), shape ``(k, ndim)``."""
    flat = np.arange(spec.size)[nodes] if nodes is not None else np.arange(spec.size)
    indices = np.stack(np.unravel_index(flat, spec.shape), axis=-1)
    return spec.low + indices * spec.spacing


def action_lattice(bounds: Union[Box, Iterable[Tuple[float, float]]], counts: Sequence[int]) -> np.ndarray:
    """Cartesian product of evenly spaced values per input dimension.

    A count of 1 places a single value at the interval midpoint. Rows come in
    row-major order, so the first dimension varies slowest.
    """
    if isinstance(bounds, Box):
        intervals = list(zip(bounds.lower, bounds.upper))
    else:
        intervals = [tuple(interval) for interval in bounds]
    counts = [int(count) for count in counts]
    if not intervals:
        raise ValidationError("Action bounds are empty.")
    if len(counts) != len(intervals):
        raise ValidationError(
            "One lattice count per input dimension is required.",
            {"dimensions": len(intervals), "counts": counts},
        )
    axes = []
    for (low, high), count in zip(intervals, counts):
        if low > high:
            raise ValidationError("Action interval is empty.", {"lower": low, "upper": high})
        if count < 1:
            raise ValidationError("Lattice counts must be positive.", {"counts": counts})
        axes.append([(low + high) / 2.0] if count == 1 else np.linspace(low, high, count).tolist())
    return np.asarray(list(itertools.product(*axes)), dtype=float)
