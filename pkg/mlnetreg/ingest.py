"""Loading networks and node tables from disk, and writing reports.

All node and layer indices in files are 1-based.  Loaders reject malformed
input instead of repairing it and name the offending line (and column where
one applies).  The exact formats are described in ``docs/file_formats.md``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from mlnetreg.centrality import CommunityStructure
from mlnetreg.exceptions import (
    AsymmetricInput,
    DataError,
    DimensionMismatch,
    IndexOutOfRange,
    ParseError,
)
from mlnetreg.linalg import is_symmetric

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NODE_COLUMN = "node"
COMMUNITY_COLUMN = "community"
SECTOR_COLUMN = "sector"
COUNTRY_COLUMN = "country"
EDGE_LIST_HEADER = ("node_i", "layer_i", "node_j", "layer_j", "weight")


class NetworkFormat(Enum):
    EDGE_LIST = "edgelist"
    DENSE_SUPRA = "dense"


@dataclass(frozen=True)
class DatasetBundle:
    """Everything one real-data regression needs, row-aligned on nodes."""

    supra: np.ndarray
    n_nodes: int
    n_layers: int
    covariates: np.ndarray
    covariate_names: Tuple[str, ...]
    response: np.ndarray
    response_name: str
    communities: CommunityStructure
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        size = self.n_nodes * self.n_layers
        if self.supra.shape != (size, size):
            raise DimensionMismatch(f"network is {self.supra.shape}, expected {(size, size)} for N*L={size}")
        if self.covariates.ndim != 2 or self.covariates.shape[0] != self.n_nodes:
            raise DimensionMismatch(f"covariates have shape {self.covariates.shape}, expected {self.n_nodes} rows")
        if self.covariates.shape[1] != len(self.covariate_names):
            raise DimensionMismatch("one name per covariate column is required")
        if self.response.shape != (self.n_nodes,):
            raise DimensionMismatch(f"response has shape {self.response.shape}, expected ({self.n_nodes},)")
        if self.communities.n_nodes != self.n_nodes:
            raise DimensionMismatch(
                f"communities label {self.communities.n_nodes} nodes, network has {self.n_nodes}"
            )


def _parse_float(cell: str, line: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"expected a number, got {cell.strip()!r}", line=line, column=column) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {cell.strip()!r}", line=line, column=column)
    return value


def _parse_index(cell: str, line: int, column: int, upper: int, what: str) -> int:
    try:
        value = int(cell.strip())
    except ValueError:
        raise ParseError(f"expected an integer {what}, got {cell.strip()!r}", line=line, column=column) from None
    if not 1 <= value <= upper:
        raise IndexOutOfRange(f"line {line}, column {column}: {what} {value} outside 1..{upper}")
    return value - 1


def _data_lines(path: PathLike) -> Iterable[Tuple[int, List[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                raise ParseError("blank line", line=line_no)
            if row[0].lstrip().startswith("#"):
                continue
            yield line_no, row


def load_dense_grid(path: PathLike) -> np.ndarray:
    """Headerless comma-separated numeric grid."""

    rows: List[List[float]] = []
    width: Optional[int] = None
    for line_no, row in _data_lines(path):
        if width is not None and len(row) != width:
            raise ParseError(f"expected {width} fields, got {len(row)}", line=line_no)
        width = len(row)
        rows.append([_parse_float(cell, line_no, column) for column, cell in enumerate(row, start=1)])
    if not rows:
        raise ParseError("file contains no data", line=1)
    return np.array(rows, dtype=np.float64)


def _load_edge_list(path: PathLike, n_nodes: int, n_layers: int) -> np.ndarray:
    size = n_nodes * n_layers
    supra = np.zeros((size, size))
    seen: Dict[Tuple[int, int], Tuple[float, int]] = {}
    first = True
    for line_no, row in _data_lines(path):
        if first and row[0].strip().lower() == EDGE_LIST_HEADER[0]:
            first = False
            continue
        first = False
        if len(row) != 5:
            raise ParseError(f"expected 5 fields (node_i, layer_i, node_j, layer_j, weight), got {len(row)}", line=line_no)
        node_i = _parse_index(row[0], line_no, 1, n_nodes, "node")
        layer_i = _parse_index(row[1], line_no, 2, n_layers, "layer")
        node_j = _parse_index(row[2], line_no, 3, n_nodes, "node")
        layer_j = _parse_index(row[3], line_no, 4, n_layers, "layer")
        weight = _parse_float(row[4], line_no, 5)

        a = layer_i * n_nodes + node_i
        b = layer_j * n_nodes + node_j
        key = (min(a, b), max(a, b))
        if key in seen:
            previous, previous_line = seen[key]
            if previous != weight:
                raise ParseError(
                    f"weight {weight!r} conflicts with {previous!r} given on line {previous_line}",
                    line=line_no,
                    column=5,
                )
            continue
        seen[key] = (weight, line_no)
        supra[a, b] = weight
        supra[b, a] = weight
    if not seen:
        raise ParseError("edge list contains no edges", line=1)
    return supra


def load_network(
    path: PathLike,
    fmt: NetworkFormat,
    n_nodes: int,
    n_layers: int,
    *,
    symmetric: bool = True,
) -> Tuple[np.ndarray, int, int]:
    """Return ``(supra, N, L)``.

    Edge lists accept either orientation of an edge; repeating it with the
    same weight is allowed, with a different weight it is an error.  A dense
    grid must be ``NL x NL`` and, unless ``symmetric`` is false, symmetric.
    """

    if n_nodes < 1 or n_layers < 1:
        raise DimensionMismatch("N and L must both be positive")
    if fmt is NetworkFormat.EDGE_LIST:
        supra = _load_edge_list(path, n_nodes, n_layers)
    else:
        supra = load_dense_grid(path)
        size = n_nodes * n_layers
        if supra.shape != (size, size):
            raise DimensionMismatch(f"grid is {supra.shape[0]}x{supra.shape[1]}, expected {size}x{size}")
        if symmetric and not is_symmetric(supra):
            raise AsymmetricInput(f"{path}: supra matrix is not symmetric")
    logger.info("Loaded %s network from %s (N=%s, L=%s)", fmt.value, path, n_nodes, n_layers)
    return supra, n_nodes, n_layers


def _read_table(path: PathLike) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, skipinitialspace=True, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise ParseError("file is empty", line=1) from None
    except pd.errors.ParserError as exc:
        raise ParseError(str(exc)) from None
    if frame.empty:
        raise ParseError("table has a header but no rows", line=2)
    frame.columns = [str(name).strip() for name in frame.columns]
    return frame


def _numeric_block(frame: pd.DataFrame, names: Sequence[str]) -> np.ndarray:
    positions = {name: index for index, name in enumerate(frame.columns)}
    columns = []
    for name in names:
        raw = frame[name]
        values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(values)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(
                f"expected a number in column {name!r}, got {raw.iloc[row]!r}",
                line=row + 2,
                column=positions[name] + 1,
            )
        columns.append(values)
    return np.column_stack(columns) if columns else np.zeros((len(frame), 0))


def _node_order(frame: pd.DataFrame, key: str) -> np.ndarray:
    """Row order that sorts ``frame`` by its 1-based ``key`` column."""

    nodes = _numeric_block(frame, [key])[:, 0]
    n = nodes.shape[0]
    if not np.array_equal(np.sort(nodes), np.arange(1, n + 1)):
        raise IndexOutOfRange(f"column {key!r} must list every index 1..{n} exactly once")
    return np.argsort(nodes, kind="stable")


def load_covariates(
    path: PathLike,
    *,
    average_by: Optional[str] = None,
) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Headered numeric table; an optional ``node`` column fixes the row order.

    With ``average_by="sector"`` the table is long-format (``sector``, an
    optional ``country`` label, then values) and rows are averaged per sector.
    """

    frame = _read_table(path)
    if average_by is not None:
        if average_by != SECTOR_COLUMN:
            raise ValueError(f"can only average by {SECTOR_COLUMN!r}, got {average_by!r}")
        if SECTOR_COLUMN not in frame.columns:
            raise DataError(f"{path}: averaging by sector needs a {SECTOR_COLUMN!r} column")
        names = [name for name in frame.columns if name not in (SECTOR_COLUMN, COUNTRY_COLUMN)]
        values = pd.DataFrame(_numeric_block(frame, names), columns=names)
        values[SECTOR_COLUMN] = _numeric_block(frame, [SECTOR_COLUMN])[:, 0]
        averaged = values.groupby(SECTOR_COLUMN, sort=True)[names].mean()
        sectors = averaged.index.to_numpy()
        if not np.array_equal(sectors, np.arange(1, sectors.shape[0] + 1)):
            raise IndexOutOfRange(f"{path}: sectors must be numbered 1..N without gaps")
        logger.info("Averaged %s rows into %s sectors", len(frame), len(averaged))
        return averaged.to_numpy(dtype=np.float64), tuple(names)

    names = [name for name in frame.columns if name != NODE_COLUMN]
    matrix = _numeric_block(frame, names)
    if NODE_COLUMN in frame.columns:
        matrix = matrix[_node_order(frame, NODE_COLUMN)]
    return matrix, tuple(names)


def load_response(path: PathLike) -> Tuple[np.ndarray, str]:
    matrix, names = load_covariates(path)
    if len(names) != 1:
        raise DimensionMismatch(f"{path}: response table needs exactly one value column, found {list(names)}")
    return matrix[:, 0], names[0]


def load_communities(path: PathLike, n_communities: Optional[int] = None) -> CommunityStructure:
    frame = _read_table(path)
    if COMMUNITY_COLUMN in frame.columns:
        column = COMMUNITY_COLUMN
    elif len(frame.columns) == 1:
        column = frame.columns[0]
    else:
        raise DataError(f"{path}: expected a {COMMUNITY_COLUMN!r} column")
    labels = _numeric_block(frame, [column])[:, 0]
    rounded = np.rint(labels)
    bad = (rounded != labels) | (rounded < 1)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise ParseError(
            "community labels must be positive integers",
            line=row + 2,
            column=list(frame.columns).index(column) + 1,
        )
    if NODE_COLUMN in frame.columns:
        rounded = rounded[_node_order(frame, NODE_COLUMN)]
    return CommunityStructure.from_labels(rounded.astype(np.int64), n_communities)


def write_supra(path: PathLike, supra) -> None:
    """Dense grid with 17 significant digits, so reloading is bit-exact."""

    np.savetxt(path, np.asarray(supra, dtype=np.float64), delimiter=",", fmt="%.17g", newline="\n")


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        # NaN and infinities are not valid JSON
        return number if math.isfinite(number) else None
    return value


def dumps_report(payload: Mapping[str, Any]) -> str:
    """Key-sorted, indented JSON; NaN and infinities become null."""

    return json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def write_report_json(path: PathLike, payload: Mapping[str, Any]) -> None:
    Path(path).write_text(dumps_report(payload), encoding="utf-8")


def write_csv_table(path: PathLike, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> None:
    frame = pd.DataFrame(list(rows), columns=list(columns) if columns is not None else None)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
