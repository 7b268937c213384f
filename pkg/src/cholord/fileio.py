"""File formats: delimited matrices, graph/ordering JSON, config sidecars.

CSV dialect: comma separator, ``.`` decimal, UTF-8, optional header detected
by a non-numeric first row. Floats are written with ``repr`` (shortest
round-trip), so identical numbers always produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .cscs import EdgeSet
from .errors import NonNumericData, TooFewRows
from .sem import Ordering, WeightedDag


def fmt_float(x) -> str:
    return repr(float(x))


def read_matrix_csv(path) -> tuple[np.ndarray, tuple[str, ...] | None]:
    """Read a numeric matrix; returns (values, names-or-None)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise TooFewRows(f"{path}: file contains no data rows")
    names: tuple[str, ...] | None = None
    start = 0
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        names = tuple(c.strip() for c in rows[0])
        start = 1
    data = []
    for rix, row in enumerate(rows[start:], start=start + 1):
        parsed = []
        for cix, cell in enumerate(row, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise NonNumericData(
                    f"{path}: cell at row {rix}, column {cix} ({cell!r}) is not numeric"
                ) from None
        data.append(parsed)
    if not data:
        raise TooFewRows(f"{path}: header only, no data rows")
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise NonNumericData(f"{path}: rows have inconsistent column counts {sorted(widths)}")
    X = np.asarray(data, dtype=float)
    if names is not None and len(names) != X.shape[1]:
        raise NonNumericData(f"{path}: header width does not match data width")
    return X, names


def write_matrix_csv(path, X, names=None) -> None:
    X = np.asarray(X, dtype=float)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        if names is not None:
            fh.write(",".join(str(c) for c in names) + "\n")
        for row in X:
            fh.write(",".join(fmt_float(v) for v in row) + "\n")


def write_json(path, obj) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with Path(path).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def write_dag_json(path, dag: WeightedDag) -> None:
    write_json(path, dag.to_json_dict())


def read_dag_json(path) -> WeightedDag:
    return WeightedDag.from_json_dict(read_json(path))


def write_ordering_json(path, ordering: Ordering, f_value: float, diag) -> None:
    write_json(
        path,
        {
            "ordering": list(ordering.perm),
            "f_value": float(f_value),
            "per_step_diag": [float(d) for d in diag],
        },
    )


def read_ordering_json(path) -> Ordering:
    return Ordering(tuple(read_json(path)["ordering"]))


def write_edges_csv(path, edges: EdgeSet) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("parent,child,weight\n")
        for u, v, w in edges.edges:
            fh.write(f"{u},{v},{fmt_float(w)}\n")


def read_edges_csv(path) -> list[tuple[int, int, float]]:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        out = []
        for rix, row in enumerate(reader, start=2):
            try:
                out.append((int(row["parent"]), int(row["child"]), float(row["weight"])))
            except (KeyError, TypeError, ValueError):
                raise NonNumericData(f"{path}: bad edge row {rix}: {row}") from None
    return out


def write_sidecar(primary_path, command: str, config: dict) -> None:
    """Provenance sidecar next to a primary output file.

    Contains only reproduction-relevant values; paths are reduced to
    basenames so reruns in different directories stay byte-identical.
    """
    clean = {}
    for k, v in config.items():
        if isinstance(v, Path):
            v = v.name
        elif isinstance(v, str) and ("/" in v or "\\" in v):
            v = Path(v).name
        clean[k] = v
    write_json(str(primary_path) + ".meta.json", {"command": command, "config": clean})
