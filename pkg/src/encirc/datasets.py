"""Integer datasets for the regression demo: synthetic generators and the
CSV layout the command line ingests (header row, integer cells, last
column is the target)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

KIND_NUMERICAL = "numerical"
KIND_BINARY = "binary"
KINDS = (KIND_NUMERICAL, KIND_BINARY)

# attribute values stay below 2**7 so 16-bit lanes never overflow the
# 32-bit inner-product aggregates at up to a few hundred rows
VALUE_LIMIT = 1 << 7


class DatasetFormatError(ValueError):
    """Malformed CSV or out-of-contract values."""


@dataclass(frozen=True)
class Dataset:
    """Cleartext design matrix plus target column.

    rows is r x d, row-major; kind 'binary' restricts attributes to {0,1},
    'numerical' to [0, VALUE_LIMIT). Targets are nonnegative integers.
    coefficients carries the generator's ground truth when synthetic.
    """

    names: tuple
    rows: tuple
    target: tuple
    kind: str
    coefficients: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DatasetFormatError(f"unknown value kind {self.kind!r}")
        r = len(self.rows)
        d = len(self.names)
        if not r >= d >= 1:
            raise DatasetFormatError(f"need rows >= attributes >= 1, got r={r}, d={d}")
        if len(self.target) != r:
            raise DatasetFormatError("target length does not match row count")
        limit = 2 if self.kind == KIND_BINARY else VALUE_LIMIT
        for row in self.rows:
            if len(row) != d:
                raise DatasetFormatError("ragged attribute rows")
            for v in row:
                if not isinstance(v, int) or not 0 <= v < limit:
                    raise DatasetFormatError(
                        f"attribute value {v!r} outside [0, {limit}) for kind {self.kind}"
                    )
        for y in self.target:
            if not isinstance(y, int) or y < 0:
                raise DatasetFormatError(f"target value {y!r} is not a nonnegative integer")

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def d(self) -> int:
        return len(self.names)

    def column(self, j: int) -> list:
        return [row[j] for row in self.rows]


def synthesize(
    kind: str,
    rows: int,
    attrs: int,
    *,
    seed: int = 0,
    coefficients: Optional[Sequence[int]] = None,
    noise: int = 0,
) -> Dataset:
    """Random dataset with a known linear target.

    Attribute values are uniform over the kind's range; the target is the
    exact integer combination of the attributes under `coefficients`
    (default: per-attribute values drawn from [1, 8)) plus a uniform
    nonnegative noise term in [0, noise]. noise=0 keeps the system exactly
    solvable, which the recovery checks rely on.
    """
    if kind not in KINDS:
        raise DatasetFormatError(f"unknown value kind {kind!r}")
    if not rows >= attrs >= 1:
        raise DatasetFormatError(f"need rows >= attrs >= 1, got {rows}, {attrs}")
    rng = np.random.default_rng(seed)
    high = 2 if kind == KIND_BINARY else VALUE_LIMIT
    x = rng.integers(0, high, size=(rows, attrs), dtype=np.int64)
    if coefficients is None:
        coefficients = [int(c) for c in rng.integers(1, 8, size=attrs)]
    else:
        coefficients = [int(c) for c in coefficients]
        if len(coefficients) != attrs:
            raise DatasetFormatError("coefficient count does not match attrs")
        if any(c < 0 for c in coefficients):
            raise DatasetFormatError("generator coefficients must be nonnegative")
    y = x @ np.asarray(coefficients, dtype=np.int64)
    if noise:
        y = y + rng.integers(0, noise + 1, size=rows, dtype=np.int64)
    names = tuple(f"x{j + 1}" for j in range(attrs))
    return Dataset(
        names=names,
        rows=tuple(tuple(int(v) for v in row) for row in x),
        target=tuple(int(v) for v in y),
        kind=kind,
        coefficients=tuple(coefficients),
    )


def _parse_cell(text: str, where: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise DatasetFormatError(f"non-integer cell {text!r} at {where}") from None


def read_csv(source, kind: Optional[str] = None) -> Dataset:
    """Parse the documented layout. `source` is a path or a text stream.
    kind=None infers binary iff every attribute cell is 0 or 1."""
    if isinstance(source, (str, bytes)):
        with open(source, "r", newline="") as fh:
            return read_csv(fh, kind)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("empty CSV") from None
    if len(header) < 2:
        raise DatasetFormatError("need at least one attribute column plus the target")
    names = tuple(h.strip() for h in header[:-1])
    rows = []
    target = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise DatasetFormatError(
                f"line {lineno}: expected {len(header)} cells, got {len(record)}"
            )
        rows.append(tuple(_parse_cell(c, f"line {lineno}") for c in record[:-1]))
        target.append(_parse_cell(record[-1], f"line {lineno}"))
    if kind is None:
        flat = [v for row in rows for v in row]
        kind = KIND_BINARY if flat and all(v in (0, 1) for v in flat) else KIND_NUMERICAL
    return Dataset(names=names, rows=tuple(rows), target=tuple(target), kind=kind)


def write_csv(dest, ds: Dataset) -> None:
    """Inverse of read_csv; target column is written last under 'y'."""
    if isinstance(dest, (str, bytes)):
        with open(dest, "w", newline="") as fh:
            write_csv(fh, ds)
            return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow([*ds.names, "y"])
    for row, y in zip(ds.rows, ds.target):
        writer.writerow([*row, y])


def to_csv_text(ds: Dataset) -> str:
    buf = io.StringIO()
    write_csv(buf, ds)
    return buf.getvalue()
