"""Loading, validating and partitioning project metric tables.

A project table is a CSV with one row per class/module: a few identifier
columns (class name, release), numeric code metrics, and a defect count.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    FewerThanTwoProjects,
    IncompatibleSchemas,
    InputError,
    InvalidTargetValue,
    MissingTargetColumn,
    NonNumericFeature,
    TooFewInstances,
)

TARGET_NAMES = ("bug", "bugs", "defects")

# Columns that are numeric-looking in PROMISE exports but are not metrics.
IDENTIFIER_NAMES = frozenset(
    {"name", "name.1", "version", "id", "file", "filename", "class", "classname", "module", "project"}
)

DEFAULT_FRACTIONS = (0.5, 0.25, 0.25)


@dataclass(frozen=True)
class MetricSchema:
    feature_names: tuple[str, ...]
    identifier_columns: tuple[str, ...] = ()
    target_column: str = "bug"

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "identifier_columns", tuple(self.identifier_columns))
        if not self.feature_names:
            raise InputError("schema needs at least one feature")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise InputError(f"duplicate feature names in {self.feature_names}")
        if self.target_column in self.feature_names:
            raise InputError(f"target column {self.target_column!r} is also listed as a feature")

    def index(self, feature: str) -> int:
        try:
            return self.feature_names.index(feature)
        except ValueError:
            raise KeyError(feature) from None


@dataclass(frozen=True)
class Instance:
    identifier: str
    features: tuple[float, ...]
    defect_count: int

    @property
    def defective(self) -> bool:
        return self.defect_count >= 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.features, dtype=float)


@dataclass(frozen=True, eq=False)
class ProjectDataset:
    """An immutable table of instances for one project release.

    Features live in a read-only ``(n, d)`` float array so trees and forests
    can work column-wise; :attr:`instances` gives the row view.
    """

    name: str
    schema: MetricSchema
    identifiers: tuple[str, ...]
    X: np.ndarray
    defect_counts: np.ndarray
    identifier_values: tuple[tuple[str, ...], ...] = field(default=(), repr=False)

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        counts = np.array(self.defect_counts, dtype=np.int64, copy=True)
        if X.ndim != 2 or X.shape[1] != len(self.schema.feature_names):
            raise InputError(f"feature matrix shape {X.shape} does not match schema")
        if len(counts) != len(X) or len(self.identifiers) != len(X):
            raise InputError("identifiers, features and defect counts differ in length")
        if len(X) == 0:
            raise EmptyDataset(f"dataset {self.name!r} has no instances")
        if (counts < 0).any():
            raise InvalidTargetValue("defect counts must be nonnegative")
        if not np.isfinite(X).all():
            raise InputError("feature values must be finite")
        X.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "defect_counts", counts)
        object.__setattr__(self, "identifiers", tuple(self.identifiers))
        if not self.identifier_values:
            object.__setattr__(self, "identifier_values", tuple(() for _ in self.identifiers))

    @classmethod
    def from_arrays(cls, name, feature_names, X, defect_counts, identifiers=None, target_column="bug"):
        X = np.asarray(X, dtype=float)
        if identifiers is None:
            identifiers = [f"{name}:{i}" for i in range(len(X))]
        schema = MetricSchema(tuple(feature_names), ("id",), target_column)
        ids = tuple(str(i) for i in identifiers)
        return cls(name, schema, ids, X, np.asarray(defect_counts), tuple((i,) for i in ids))

    def __len__(self) -> int:
        return len(self.identifiers)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.schema.feature_names

    @property
    def labels(self) -> np.ndarray:
        """Binary defect label per instance (count >= 1)."""
        return self.defect_counts >= 1

    @property
    def defect_ratio(self) -> float:
        return float(self.labels.mean())

    @property
    def instances(self) -> list[Instance]:
        return [self.instance(i) for i in range(len(self))]

    def instance(self, i: int) -> Instance:
        return Instance(self.identifiers[i], tuple(float(v) for v in self.X[i]), int(self.defect_counts[i]))

    def subset(self, indices: Sequence[int], name: str | None = None) -> ProjectDataset:
        idx = np.asarray(indices, dtype=int)
        return ProjectDataset(
            name or self.name,
            self.schema,
            tuple(self.identifiers[i] for i in idx),
            self.X[idx],
            self.defect_counts[idx],
            tuple(self.identifier_values[i] for i in idx),
        )

    def restrict_features(self, feature_names: Sequence[str]) -> ProjectDataset:
        cols = [self.schema.index(f) for f in feature_names]
        schema = MetricSchema(tuple(feature_names), self.schema.identifier_columns, self.schema.target_column)
        return ProjectDataset(
            self.name, schema, self.identifiers, self.X[:, cols], self.defect_counts, self.identifier_values
        )

    def renamed(self, name: str) -> ProjectDataset:
        return ProjectDataset(
            name, self.schema, self.identifiers, self.X, self.defect_counts, self.identifier_values
        )


@dataclass(frozen=True)
class ThreeWaySplit:
    planner_train: ProjectDataset
    oracle_train: ProjectDataset
    test: ProjectDataset


def _parse_float(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _find_target(header: Sequence[str], target: str | None) -> int:
    lowered = [h.strip().lower() for h in header]
    wanted = [target.lower()] if target else list(TARGET_NAMES)
    for name in wanted:
        if name in lowered:
            return lowered.index(name)
    raise MissingTargetColumn(f"no defect column among {wanted}; header is {list(header)}")


def load_csv(
    path: str | os.PathLike,
    schema_hint: MetricSchema | None = None,
    target: str | None = None,
    name: str | None = None,
) -> ProjectDataset:
    """Load one project table.

    Without a ``schema_hint`` the feature columns are inferred: a column is
    an identifier if its header is a known identifier name or if most of its
    cells are not numbers; everything else must parse as a finite number in
    every row. Data rows are numbered from 1 in error messages.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        rows = [[c.strip() for c in row] for row in reader if any(c.strip() for c in row)]
    if not rows:
        raise EmptyDataset(f"{path} has a header but no data rows")
    for k, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise InputError(f"{path}: row {k} has {len(row)} cells, header has {len(header)}")

    if schema_hint is not None:
        target = target or schema_hint.target_column
    t_col = _find_target(header, target)

    if schema_hint is not None:
        missing = [f for f in schema_hint.feature_names if f not in header]
        if missing:
            raise IncompatibleSchemas(f"{path}: missing feature columns {missing}")
        feature_cols = [header.index(f) for f in schema_hint.feature_names]
    else:
        feature_cols = []
        for j, h in enumerate(header):
            if j == t_col or h.lower() in IDENTIFIER_NAMES:
                continue
            numeric = sum(_parse_float(row[j]) is not None for row in rows)
            if 2 * numeric > len(rows):
                feature_cols.append(j)
    id_cols = [j for j in range(len(header)) if j != t_col and j not in feature_cols]

    X = np.empty((len(rows), len(feature_cols)))
    counts = np.empty(len(rows), dtype=np.int64)
    for k, row in enumerate(rows, start=1):
        for c, j in enumerate(feature_cols):
            value = _parse_float(row[j])
            if value is None:
                raise NonNumericFeature(k, header[j], row[j])
            X[k - 1, c] = value
        count = _parse_float(row[t_col])
        if count is None or count < 0 or count != int(count):
            raise InvalidTargetValue(f"row {k}: defect count {row[t_col]!r} is not a nonnegative integer")
        counts[k - 1] = int(count)

    id_values = tuple(tuple(row[j] for j in id_cols) for row in rows)
    # First identifier column whose values are nonempty and unique, else row numbers.
    identifiers = tuple(f"row{k}" for k in range(1, len(rows) + 1))
    for c in range(len(id_cols)):
        column = [v[c] for v in id_values]
        if all(column) and len(set(column)) == len(column):
            identifiers = tuple(column)
            break

    schema = MetricSchema(
        tuple(header[j] for j in feature_cols), tuple(header[j] for j in id_cols), header[t_col]
    )
    return ProjectDataset(name or path.stem, schema, identifiers, X, counts, id_values)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(data: ProjectDataset, path: str | os.PathLike) -> None:
    """Write ``data`` so that :func:`load_csv` reads back the same dataset."""
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    id_cols = list(data.schema.identifier_columns)
    writer.writerow(id_cols + list(data.feature_names) + [data.schema.target_column])
    for i in range(len(data)):
        ids = list(data.identifier_values[i]) if id_cols else []
        writer.writerow(ids + [repr(float(v)) for v in data.X[i]] + [int(data.defect_counts[i])])
    atomic_write_text(path, buf.getvalue())


def _largest_remainder(total: int, fractions: Sequence[float]) -> list[int]:
    quotas = [total * f for f in fractions]
    sizes = [math.floor(q) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda p: (-(quotas[p] - sizes[p]), p))
    for p in order[: total - sum(sizes)]:
        sizes[p] += 1
    return sizes


def three_way_split(
    data: ProjectDataset,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    seed: int = 0,
    stratify: bool = True,
) -> ThreeWaySplit:
    """Partition ``data`` into planner-train, oracle-train and test parts.

    Part sizes follow ``fractions`` by largest remainder. With ``stratify``,
    each class is spread over the parts in proportion, with the rounding of
    the per-class counts constrained to reproduce the overall part sizes.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InputError(f"fractions must be three nonnegative reals summing to 1, got {fractions}")
    n = len(data)
    sizes = _largest_remainder(n, fractions)
    if min(sizes) == 0:
        raise TooFewInstances(f"{n} instances with fractions {fractions} leave an empty part")

    rng = np.random.default_rng(seed)
    parts: list[list[int]] = [[], [], []]
    if stratify:
        labels = data.labels
        classes = [np.flatnonzero(labels), np.flatnonzero(~labels)]
        quotas = [[len(c) * s / n for s in sizes] for c in classes]
        alloc = [[math.floor(q) for q in row] for row in quotas]
        col_left = [sizes[p] - sum(alloc[c][p] for c in range(2)) for p in range(3)]
        for c in range(2):
            frac = [quotas[c][p] - alloc[c][p] for p in range(3)]
            for _ in range(len(classes[c]) - sum(alloc[c])):
                open_parts = [p for p in range(3) if col_left[p] > 0]
                p = max(open_parts, key=lambda q: (frac[q], -q))
                alloc[c][p] += 1
                col_left[p] -= 1
                frac[p] -= 1.0
        for c, members in enumerate(classes):
            shuffled = rng.permutation(members)
            start = 0
            for p in range(3):
                parts[p].extend(shuffled[start : start + alloc[c][p]].tolist())
                start += alloc[c][p]
        for p in range(3):
            if len(set(labels[parts[p]].tolist())) < 2:
                raise TooFewInstances(f"split part {p} would contain only one class")
    else:
        shuffled = rng.permutation(n)
        start = 0
        for p in range(3):
            parts[p] = shuffled[start : start + sizes[p]].tolist()
            start += sizes[p]

    names = ("planner_train", "oracle_train", "test")
    subsets = [data.subset(sorted(parts[p]), f"{data.name}/{names[p]}") for p in range(3)]
    return ThreeWaySplit(*subsets)


def common_features(datasets: Iterable[ProjectDataset]) -> tuple[str, ...]:
    datasets = list(datasets)
    shared = set(datasets[0].feature_names)
    for d in datasets[1:]:
        shared &= set(d.feature_names)
    return tuple(f for f in datasets[0].feature_names if f in shared)


def load_project_family(directory: str | os.PathLike, target: str | None = None) -> list[ProjectDataset]:
    """Load every ``*.csv`` in ``directory`` (lexicographic order) on their shared features."""
    paths = sorted(Path(directory).glob("*.csv"))
    if len(paths) < 2:
        raise FewerThanTwoProjects(f"{directory} holds {len(paths)} CSV file(s); need at least 2")
    family = [load_csv(p, target=target) for p in paths]
    shared = common_features(family)
    if not shared:
        raise IncompatibleSchemas(f"projects in {directory} share no feature columns")
    return [d.restrict_features(shared) for d in family]
