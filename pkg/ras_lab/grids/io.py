"""CSV and JSON persistence of value grids.

Floats are written with ``repr`` (shortest round-trip form), so reading a file
back gives bit-identical values.
"""
import csv
import functools
import json
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, TypeVar, Union

import numpy as np

from ras_lab.grids.lattice import GridSpec
from ras_lab.grids.values import ValueGrid
from ras_lab.utils.exceptions import ArtifactError, ValidationError

GRID_FORMAT = "ras-grid"
GRID_FORMAT_VERSION = 1

PathLike = Union[str, Path]
Reader = TypeVar("Reader", bound=Callable[..., Any])


def reads_artifact(reader: Reader) -> Reader:
    """Report parse failures of ``reader(path, ...)`` as :class:`ArtifactError`."""

    @functools.wraps(reader)
    def wrapper(path, *args, **kwargs):
        try:
            return reader(path, *args, **kwargs)
        except (ValueError, IndexError, KeyError, TypeError, csv.Error) as error:
            raise ArtifactError(
                "Malformed artifact file.", {"path": str(path), "reason": f"{type(error).__name__}: {error}"}
            ) from error

    return wrapper  # type: ignore


def format_float(value: float) -> str:
    return repr(float(value))


def write_grid_csv(grid: ValueGrid, path: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    """Header rows (format, label, meta, one row per axis), then one value per row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(["format", GRID_FORMAT, GRID_FORMAT_VERSION])
        writer.writerow(["label", grid.label])
        for key, value in sorted((meta or {}).items()):
            writer.writerow(["meta", key, value])
        for axis, (low, high, count) in enumerate(zip(grid.spec.lower, grid.spec.upper, grid.spec.counts)):
            writer.writerow(["axis", axis, format_float(low), format_float(high), count])
        writer.writerow(["values", grid.spec.size])
        writer.writerows([format_float(value)] for value in grid.values)
    return path


@reads_artifact
def read_grid_csv(path: PathLike) -> Tuple[ValueGrid, Dict[str, str]]:
    path = Path(path)
    meta: Dict[str, str] = {}
    label = ""
    axes = []
    with open(path, newline="") as csv_file:
        reader = csv.reader(csv_file)
        header = next(reader, None)
        if not header or header[:2] != ["format", GRID_FORMAT]:
            raise ArtifactError("Not a value grid CSV file.", {"path": str(path)})
        for row in reader:
            kind = row[0]
            if kind == "label":
                label = row[1]
            elif kind == "meta":
                meta[row[1]] = row[2]
            elif kind == "axis":
                axes.append((float(row[2]), float(row[3]), int(row[4])))
            elif kind == "values":
                count = int(row[1])
                values = np.fromiter((float(line[0]) for line in reader), dtype=float)
                if values.size != count:
                    raise ArtifactError(
                        "Truncated value grid file.",
                        {"path": str(path), "expected": count, "found": int(values.size)},
                    )
                break
        else:
            raise ArtifactError("Value grid file has no values section.", {"path": str(path)})
    spec = GridSpec(
        lower=tuple(axis[0] for axis in axes),
        upper=tuple(axis[1] for axis in axes),
        counts=tuple(axis[2] for axis in axes),
    )
    return ValueGrid(spec, values, label), meta


def grid_to_document(grid: ValueGrid, meta: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        "format": GRID_FORMAT,
        "version": GRID_FORMAT_VERSION,
        "label": grid.label,
        "meta": dict(meta or {}),
        "grid": grid.spec.as_dict(),
        "values": [float(value) for value in grid.values],
    }


def grid_from_document(document: Dict[str, Any]) -> Tuple[ValueGrid, Dict[str, Any]]:
    if document.get("format") != GRID_FORMAT:
        raise ValidationError("Not a value grid document.", {"format": document.get("format")})
    spec = GridSpec.from_dict(document["grid"])
    return ValueGrid(spec, np.asarray(document["values"], dtype=float), document.get("label", "")), document.get(
        "meta", {}
    )


def write_grid_json(grid: ValueGrid, path: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as json_file:
        json.dump(grid_to_document(grid, meta), json_file, sort_keys=True)
        json_file.write("\n")
    return path


@reads_artifact
def read_grid_json(path: PathLike) -> Tuple[ValueGrid, Dict[str, Any]]:
    with open(path) as json_file:
        return grid_from_document(json.load(json_file))


@reads_artifact
def read_json_file(path: PathLike) -> Dict[str, Any]:
    with open(path) as json_file:
        return json.load(json_file)
