"""Binary-feature dataset loading and the equivalent-points structure.

Samples with identical feature vectors can never be separated by any tree,
so each duplicate group contributes its minority-label count as an
irreducible error floor.  ``build_equivalence_index`` precomputes the group
structure once; the search consults it through each leaf's captured
minority-indicator popcount.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

from .bitvec import BitVector


class DataFormatError(ValueError):
    """Raised for malformed input CSV."""


@dataclass(frozen=True)
class Dataset:
    n_samples: int
    n_features: int
    feature_names: tuple[str, ...]
    columns: tuple[BitVector, ...]
    labels: BitVector

    @property
    def label_one_count(self) -> int:
        return self.labels.count_ones()


@dataclass(frozen=True)
class EquivalenceIndex:
    """Partition of samples into identical-feature-vector classes.

    ``z`` marks exactly the minority-label members of every class; a
    capture vector ANDed with ``z`` counts the unavoidable mistakes among
    captured samples.
    """

    class_of: tuple[int, ...]
    minority_label: tuple[int, ...]
    theta: tuple[Fraction, ...]
    z: BitVector

    @property
    def n_classes(self) -> int:
        return len(self.theta)

    def total_theta(self) -> Fraction:
        return sum(self.theta, Fraction(0))


def from_rows(feature_names, rows, labels) -> Dataset:
    """Build a Dataset from row-major binary features and labels."""
    names = tuple(feature_names)
    n = len(rows)
    m = len(names)
    cols = tuple(
        BitVector.make([rows[i][j] for i in range(n)]) for j in range(m))
    return Dataset(n, m, names, cols, BitVector.make(labels))


def load_csv(source: TextIO | str, label_column: str) -> Dataset:
    """Parse a binary CSV with a header row; every cell must be "0" or "1"."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("empty input: missing header row")
    header = [h.strip() for h in header]
    if label_column not in header:
        raise DataFormatError(f"label column {label_column!r} not in header")
    label_idx = header.index(label_column)
    feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
    if not feature_names:
        raise DataFormatError("no feature columns")
    if len(set(feature_names)) != len(feature_names):
        raise DataFormatError("duplicate feature names in header")
    if any(not name for name in feature_names):
        raise DataFormatError("empty feature name in header")

    rows: list[list[int]] = []
    labels: list[int] = []
    for rownum, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise DataFormatError(
                f"row {rownum}: expected {len(header)} cells, got {len(row)}")
        parsed = []
        for colname, cell in zip(header, row):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise DataFormatError(
                    f"row {rownum}, column {colname!r}: "
                    f"non-binary cell {cell!r}")
            parsed.append(int(cell))
        labels.append(parsed.pop(label_idx))
        rows.append(parsed)
    if not rows:
        raise DataFormatError("no data rows")
    return from_rows(feature_names, rows, labels)


def write_csv(ds: Dataset, label_column: str = "label") -> str:
    """Emit the dataset back to CSV text (round-trip/testing helper)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(ds.feature_names) + [label_column])
    for i in range(ds.n_samples):
        w.writerow([int(c.get(i)) for c in ds.columns]
                   + [int(ds.labels.get(i))])
    return out.getvalue()


def literal_column(ds: Dataset, feature: int, polarity: bool) -> BitVector:
    """Capture vector of a single clause: the column or its complement."""
    if not 0 <= feature < ds.n_features:
        raise IndexError(f"feature index {feature} out of range")
    col = ds.columns[feature]
    return col if polarity else col.invert()


def build_equivalence_index(ds: Dataset) -> EquivalenceIndex:
    """Group samples by exact feature-vector equality.

    Class ids follow first occurrence, so the result is deterministic.
    A class with equally many 0 and 1 labels takes minority label 0; theta
    is invariant to that choice.
    """
    n = ds.n_samples
    key_to_class: dict[tuple[int, ...], int] = {}
    class_of = []
    members: list[list[int]] = []
    for i in range(n):
        key = tuple(int(c.get(i)) for c in ds.columns)
        cid = key_to_class.get(key)
        if cid is None:
            cid = len(members)
            key_to_class[key] = cid
            members.append([])
        class_of.append(cid)
        members[cid].append(i)

    minority = []
    theta = []
    z_bits = [0] * n
    for group in members:
        ones = sum(1 for i in group if ds.labels.get(i))
        zeros = len(group) - ones
        q = 1 if ones < zeros else 0
        minority.append(q)
        minority_count = ones if q == 1 else zeros
        theta.append(Fraction(minority_count, n))
        for i in group:
            if int(ds.labels.get(i)) == q:
                z_bits[i] = 1

    return EquivalenceIndex(
        class_of=tuple(class_of),
        minority_label=tuple(minority),
        theta=tuple(theta),
        z=BitVector.make(z_bits),
    )
