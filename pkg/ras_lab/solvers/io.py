"""CSV persistence of tabular policies.

Layout: format and label rows, one ``axis`` row per grid dimension, the two
action lattices (``control`` and ``disturbance`` rows), then a ``nodes`` row
followed by one row per node with the lattice indices and the input vectors
they select.
"""
import csv
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ras_lab.grids.io import PathLike, format_float, reads_artifact
from ras_lab.grids.lattice import GridSpec
from ras_lab.solvers.policies import TabularPolicy
from ras_lab.utils.exceptions import ArtifactError

POLICY_FORMAT = "ras-policy"
POLICY_FORMAT_VERSION = 1


def write_policy_csv(policy: TabularPolicy, path: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(["format", POLICY_FORMAT, POLICY_FORMAT_VERSION])
        writer.writerow(["label", policy.label])
        for key, value in sorted((meta or {}).items()):
            writer.writerow(["meta", key, value])
        for axis, (low, high, count) in enumerate(zip(policy.spec.lower, policy.spec.upper, policy.spec.counts)):
            writer.writerow(["axis", axis, format_float(low), format_float(high), count])
        for row in policy.control_lattice:
            writer.writerow(["control"] + [format_float(v) for v in row])
        for row in policy.disturbance_lattice:
            writer.writerow(["disturbance"] + [format_float(v) for v in row])
        writer.writerow(["nodes", policy.spec.size])
        controls, disturbances = policy.controls, policy.disturbances
        for node in range(policy.spec.size):
            writer.writerow(
                [int(policy.control_index[node]), int(policy.disturbance_index[node])]
                + [format_float(v) for v in controls[node]]
                + [format_float(v) for v in disturbances[node]]
            )
    return path


@reads_artifact
def read_policy_csv(path: PathLike) -> Tuple[TabularPolicy, Dict[str, str]]:
    path = Path(path)
    meta: Dict[str, str] = {}
    label = ""
    axes, control_rows, disturbance_rows = [], [], []
    with open(path, newline="") as csv_file:
        reader = csv.reader(csv_file)
        header = next(reader, None)
        if not header or header[:2] != ["format", POLICY_FORMAT]:
            raise ArtifactError("Not a policy CSV file.", {"path": str(path)})
        for row in reader:
            kind = row[0]
            if kind == "label":
                label = row[1]
            elif kind == "meta":
                meta[row[1]] = row[2]
            elif kind == "axis":
                axes.append((float(row[2]), float(row[3]), int(row[4])))
            elif kind == "control":
                control_rows.append([float(v) for v in row[1:]])
            elif kind == "disturbance":
                disturbance_rows.append([float(v) for v in row[1:]])
            elif kind == "nodes":
                count = int(row[1])
                pairs = np.asarray([(int(line[0]), int(line[1])) for line in reader], dtype=np.intp).reshape(-1, 2)
                if len(pairs) != count:
                    raise ArtifactError(
                        "Truncated policy file.", {"path": str(path), "expected": count, "found": len(pairs)}
                    )
                break
        else:
            raise ArtifactError("Policy file has no nodes section.", {"path": str(path)})
    spec = GridSpec(
        lower=tuple(axis[0] for axis in axes),
        upper=tuple(axis[1] for axis in axes),
        counts=tuple(axis[2] for axis in axes),
    )
    policy = TabularPolicy(
        spec=spec,
        control_lattice=np.asarray(control_rows, dtype=float),
        disturbance_lattice=np.asarray(disturbance_rows, dtype=float),
        control_index=pairs[:, 0],
        disturbance_index=pairs[:, 1],
        label=label,
    )
    return policy, meta
