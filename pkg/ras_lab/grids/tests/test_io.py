import numpy as np
import pytest

from ras_lab.grids.io import read_grid_csv, read_grid_json, read_json_file, write_grid_csv, write_grid_json
from ras_lab.grids.lattice import GridSpec
from ras_lab.grids.values import ValueGrid
from ras_lab.utils.exceptions import ArtifactError, ValidationError


@pytest.fixture
def grid() -> ValueGrid:
    spec = GridSpec(lower=(-6.0, -4.0), upper=(6.0, 4.0), counts=(13, 9))
    values = np.random.default_rng(2).normal(size=spec.size) / 3.0
    return ValueGrid(spec, values, "V")


def test_csv_is_bit_exact(grid: ValueGrid, tmp_path):
    path = write_grid_csv(grid, tmp_path / "v.csv", meta={"config_hash": "abc", "seed": 4})
    loaded, meta = read_grid_csv(path)
    assert loaded.spec == grid.spec
    assert loaded.label == "V"
    assert loaded.values.tobytes() == grid.values.tobytes()
    assert meta == {"config_hash": "abc", "seed": "4"}


def test_json_is_bit_exact(grid: ValueGrid, tmp_path):
    loaded, meta = read_grid_json(write_grid_json(grid, tmp_path / "v.json", meta={"seed": 4}))
    assert loaded.values.tobytes() == grid.values.tobytes()
    assert meta == {"seed": 4}


def test_rewriting_gives_identical_bytes(grid: ValueGrid, tmp_path):
    first = write_grid_csv(grid, tmp_path / "a.csv").read_bytes()
    second = write_grid_csv(read_grid_csv(tmp_path / "a.csv")[0], tmp_path / "b.csv").read_bytes()
    assert first == second


def test_rejects_foreign_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValidationError):
        read_grid_csv(path)


def test_rejects_truncated_csv(grid: ValueGrid, tmp_path):
    path = write_grid_csv(grid, tmp_path / "v.csv")
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-5]) + "\n")
    with pytest.raises(ValidationError):
        read_grid_csv(path)


def test_unparsable_value_is_an_artifact_error(grid: ValueGrid, tmp_path):
    path = write_grid_csv(grid, tmp_path / "v.csv")
    path.write_text(path.read_text().replace(repr(float(grid.values[3])), "nan-ish", 1))
    with pytest.raises(ArtifactError) as excinfo:
        read_grid_csv(path)
    assert excinfo.value.details["path"] == str(path)
    assert excinfo.value.details["reason"].startswith("ValueError")
    assert excinfo.value.exit_code == 2


def test_corrupt_json_is_an_artifact_error(grid: ValueGrid, tmp_path):
    path = write_grid_json(grid, tmp_path / "v.json")
    path.write_text(path.read_text()[:-20])
    with pytest.raises(ArtifactError):
        read_grid_json(path)
    with pytest.raises(ArtifactError) as excinfo:
        read_json_file(path)
    assert excinfo.value.as_dict()["error"] == "artifact"
