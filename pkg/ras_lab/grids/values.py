"""Value storage over a lattice and multilinear interpolation."""
import itertools
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ras_lab.grids.lattice import GridSpec, node_states
from ras_lab.utils.exceptions import GridSpecError


def corner_offsets(ndim: int) -> np.ndarray:
    """Bit patterns of the ``2**ndim`` cell corners, row-major."""
    return np.asarray(list(itertools.product((0, 1), repeat=ndim)), dtype=np.intp)


def stencil(spec: GridSpec, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Flat corner indices and weights interpolating ``points``.

    Coordinates are clamped to the grid box first, so queries outside the
    domain take boundary values. Returns arrays shaped
    ``points.shape[:-1] + (2**ndim,)``; weights are non-negative and sum to one.
    """
    points = np.asarray(points, dtype=float)
    lead = points.shape[:-1]
    flat_points = points.reshape(-1, spec.ndim)
    scaled = (np.clip(flat_points, spec.low, spec.high) - spec.low) / spec.spacing
    base = np.clip(np.floor(scaled).astype(np.intp), 0, np.asarray(spec.counts) - 2)
    frac = np.clip(scaled - base, 0.0, 1.0)

    bits = corner_offsets(spec.ndim)
    indices = (base[:, None, :] + bits[None, :, :]) @ spec.strides
    weights = np.prod(np.where(bits[None, :, :] == 1, frac[:, None, :], 1.0 - frac[:, None, :]), axis=-1)
    return indices.reshape(lead + (len(bits),)), weights.reshape(lead + (len(bits),))


@dataclass(frozen=True, eq=False)
class ValueGrid:
    """Flat row-major node values over a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float).reshape(-1)
        if values.size != self.spec.size:
            raise GridSpecError(
                "Value count does not match the grid.", {"values": int(values.size), "nodes": self.spec.size}
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, spec: GridSpec, func, label: str = "") -> "ValueGrid":
        """Sample a batched state function at every node."""
        return cls(spec, np.asarray(func(node_states(spec)), dtype=float), label)

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.spec.shape)

    def with_values(self, values: np.ndarray, label: str = None) -> "ValueGrid":
        return ValueGrid(self.spec, values, self.label if label is None else label)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return interpolate_many(self, points)

    @property
    def value_range(self) -> float:
        return float(self.values.max() - self.values.min())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def interpolate_many(grid: ValueGrid, points: np.ndarray) -> np.ndarray:
    """Interpolate at a batch of states; the result drops the state axis."""
    indices, weights = stencil(grid.spec, points)
    return np.sum(grid.values[indices] * weights, axis=-1)


def interpolate(grid: ValueGrid, x) -> float:
    return float(interpolate_many(grid, np.asarray(x, dtype=float).reshape(1, grid.spec.ndim))[0])


def sign_agreement(reference: np.ndarray, candidate: np.ndarray, threshold: float = 0.0) -> float:
    """Fraction of entries on the same side of ``threshold`` in both arrays."""
    reference, candidate = np.asarray(reference), np.asarray(candidate)
    return float(np.mean((reference > threshold) == (candidate > threshold)))


def sup_gap(reference: np.ndarray, candidate: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(reference) - np.asarray(candidate))))
