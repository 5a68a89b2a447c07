import numpy as np
import pytest

from ras_lab.grids.lattice import GridSpec, node_states
from ras_lab.grids.values import ValueGrid, interpolate, interpolate_many, sign_agreement, sup_gap
from ras_lab.utils.exceptions import GridSpecError


@pytest.fixture
def plane() -> GridSpec:
    return GridSpec(lower=(-1.0, -2.0), upper=(3.0, 2.0), counts=(9, 11))


def test_value_count_must_match():
    with pytest.raises(GridSpecError):
        ValueGrid(GridSpec(lower=(0.0,), upper=(1.0,), counts=(3,)), np.zeros(4))


class TestInterpolate:
    def test_exact_at_nodes(self, plane: GridSpec):
        grid = ValueGrid(plane, np.random.default_rng(0).normal(size=plane.size))
        np.testing.assert_allclose(interpolate_many(grid, node_states(plane)), grid.values, atol=1e-12)

    def test_midpoint_average(self):
        grid = ValueGrid(GridSpec(lower=(0.0,), upper=(1.0,), counts=(2,)), [0.0, 2.0])
        assert interpolate(grid, [0.5]) == 1.0

    def test_clamps_outside_the_box(self):
        grid = ValueGrid(GridSpec(lower=(0.0,), upper=(4.0,), counts=(5,)), [1.0, 2.0, 3.0, 4.0, 5.0])
        assert interpolate(grid, [14.0]) == 5.0
        assert interpolate(grid, [-3.0]) == 1.0

    def test_exact_for_affine_functions(self):
        rng = np.random.default_rng(5)
        spec = GridSpec(lower=(-2.0, -1.0, 0.0), upper=(2.0, 1.0, 3.0), counts=(7, 5, 9))
        for _ in range(5):
            slope, offset = rng.normal(size=3), rng.normal()
            grid = ValueGrid.from_function(spec, lambda states: states @ slope + offset)
            points = rng.uniform(spec.low, spec.high, (200, 3))
            assert np.max(np.abs(grid(points) - (points @ slope + offset))) <= 1e-12

    def test_bounded_by_enclosing_nodes(self, plane: GridSpec):
        rng = np.random.default_rng(9)
        grid = ValueGrid(plane, rng.normal(size=plane.size))
        points = rng.uniform(plane.low, plane.high, (500, 2))
        values = grid(points)
        cells = np.floor((points - plane.low) / plane.spacing).astype(int)
        array = grid.as_array()
        for point_value, (i, j) in zip(values, cells):
            corners = array[i:i + 2, j:j + 2]
            assert corners.min() - 1e-12 <= point_value <= corners.max() + 1e-12

    def test_batch_shape(self, plane: GridSpec):
        grid = ValueGrid(plane, np.zeros(plane.size))
        assert grid(np.zeros((4, 3, 2))).shape == (4, 3)


def test_value_range_and_finiteness(plane: GridSpec):
    values = np.linspace(-2.0, 3.0, plane.size)
    grid = ValueGrid(plane, values, "H")
    assert grid.value_range == 5.0
    assert grid.is_finite()
    assert not grid.with_values(np.full(plane.size, np.nan)).is_finite()
    assert grid.with_values(values).label == "H"


def test_sign_agreement_and_gap():
    reference = np.array([1.0, -1.0, 0.5, -0.2])
    candidate = np.array([0.9, -1.1, -0.1, -0.3])
    assert sign_agreement(reference, candidate) == 0.75
    assert sup_gap(reference, candidate) == pytest.approx(0.6)
