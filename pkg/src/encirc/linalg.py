"""Vectors and matrices of encrypted integers.

Elementwise operations are bit-sliced: the jobs of all elements are
coalesced into the launches of a single scalar operation, so launch
counts are independent of the element count while batch widths grow.

Two matrix products are provided. mat_mul_flat gathers every
(row, column, term) operand pair into two flat vectors and multiplies
them in one vectorized pass; its memory appetite is guarded by a
configurable gate-job ceiling, beyond which it refuses and points at
mat_mul_cannon. mat_mul_cannon is the classical skew-and-rotate schedule
for square matrices: exactly q multiply cycles with gate-free rotations
between them. Dot-product accumulation runs in 2n-bit lanes and the
output cells are truncated back to n bits.
"""

from __future__ import annotations

from typing import Sequence

from .engine import GateEngine
from .integers import (
    EncryptedInt,
    _add_lanes,
    _level_add,
    _mul_lanes,
    decrypt_int,
    encrypt_int,
    trivial_int,
    truncate,
)

DEFAULT_FLAT_JOB_CEILING = 1 << 20


class FlatLaunchTooLarge(ValueError):
    """mat_mul_flat refused: the coalesced AND launch would be too large."""


def _check_items(items: Sequence[EncryptedInt], what: str) -> tuple:
    items = tuple(items)
    if not items:
        raise ValueError(f"{what} needs at least one element")
    engine = items[0].engine
    n = items[0].width
    for v in items:
        if v.engine is not engine:
            raise ValueError(f"mixed engines in one {what}")
        if v.width != n:
            raise ValueError(f"mixed widths in one {what}: {v.width} != {n}")
    return items, engine, n


class EncryptedIntVector:
    """Uniform-width sequence of encrypted integers."""

    __slots__ = ("engine", "items", "width")

    def __init__(self, items: Sequence[EncryptedInt]):
        self.items, self.engine, self.width = _check_items(items, "vector")

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> EncryptedInt:
        return self.items[i]

    def __repr__(self) -> str:
        return f"EncryptedIntVector(len={len(self.items)}, width={self.width})"


class EncryptedMatrix:
    """Row-major matrix of uniform-width encrypted integers."""

    __slots__ = ("engine", "rows", "cols", "data", "width")

    def __init__(self, rows: int, cols: int, data: Sequence[EncryptedInt]):
        if rows < 1 or cols < 1:
            raise ValueError("matrix shape must be at least 1x1")
        if len(data) != rows * cols:
            raise ValueError(f"expected {rows * cols} cells, got {len(data)}")
        self.data, self.engine, self.width = _check_items(data, "matrix")
        self.rows = rows
        self.cols = cols

    def cell(self, i: int, j: int) -> EncryptedInt:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"cell ({i}, {j}) outside {self.rows}x{self.cols}")
        return self.data[i * self.cols + j]

    def __repr__(self) -> str:
        return f"EncryptedMatrix({self.rows}x{self.cols}, width={self.width})"


# -- encrypt/decrypt conveniences --------------------------------------------


def encrypt_vector(engine: GateEngine, values: Sequence[int], n: int) -> EncryptedIntVector:
    return EncryptedIntVector([encrypt_int(engine, v, n) for v in values])


def decrypt_vector(engine: GateEngine, vec: EncryptedIntVector) -> list:
    return [decrypt_int(engine, v) for v in vec.items]


def encrypt_matrix(engine: GateEngine, rows: Sequence[Sequence[int]], n: int) -> EncryptedMatrix:
    r = len(rows)
    if r == 0:
        raise ValueError("matrix needs at least one row")
    c = len(rows[0])
    if any(len(row) != c for row in rows):
        raise ValueError("ragged rows")
    data = [encrypt_int(engine, v, n) for row in rows for v in row]
    return EncryptedMatrix(r, c, data)


def decrypt_matrix(engine: GateEngine, mat: EncryptedMatrix) -> list:
    return [
        [decrypt_int(engine, mat.cell(i, j)) for j in range(mat.cols)]
        for i in range(mat.rows)
    ]


# -- elementwise ops ----------------------------------------------------------


def _check_same_shape_vec(u: EncryptedIntVector, v: EncryptedIntVector) -> None:
    if len(u) != len(v):
        raise ValueError(f"vector lengths differ: {len(u)} != {len(v)}")


def vec_add(u: EncryptedIntVector, v: EncryptedIntVector) -> EncryptedIntVector:
    """Elementwise sum mod 2**n. Launch count equals that of one scalar
    addition (3 per bit) for any element count."""
    _check_same_shape_vec(u, v)
    return EncryptedIntVector(_add_lanes(list(u.items), list(v.items)))


def vec_mul(u: EncryptedIntVector, v: EncryptedIntVector) -> EncryptedIntVector:
    """Elementwise product at width 2n: the AND jobs of all elements form
    one coalesced batch and the partial-product trees share levels."""
    _check_same_shape_vec(u, v)
    return EncryptedIntVector(_mul_lanes(list(u.items), list(v.items)))


def mat_add(a: EncryptedMatrix, b: EncryptedMatrix) -> EncryptedMatrix:
    """Elementwise sum over the row-major data, one sliced addition."""
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise ValueError(f"shape mismatch: {a.rows}x{a.cols} vs {b.rows}x{b.cols}")
    return EncryptedMatrix(a.rows, a.cols, _add_lanes(list(a.data), list(b.data)))


# -- matrix products ----------------------------------------------------------


def _accumulate_cells(engine: GateEngine, prods: list, cells: int, terms: int) -> list:
    """Tree-sum `terms` consecutive products per cell, levels coalesced
    across all cells. prods is cell-major: prods[cell * terms + t]."""
    if terms == 1:
        return prods
    columns = [[prods[cell * terms + t] for cell in range(cells)] for t in range(terms)]
    return engine.pool.parallel_reduce(columns, level_combine=_level_add)


def mat_mul_flat(
    a: EncryptedMatrix,
    b: EncryptedMatrix,
    max_jobs: int = DEFAULT_FLAT_JOB_CEILING,
) -> EncryptedMatrix:
    """Product via one flat gather: every (i, j, t) operand pair of the
    r*c*k cell terms joins two flat vectors multiplied in a single
    vectorized pass, then each cell tree-sums its k products in 2n-bit
    lanes and truncates to n bits.

    The coalesced AND launch holds lanes * n^2 gate jobs; at or beyond
    max_jobs (default 2**20) the call refuses, naming mat_mul_cannon,
    since that launch is also a proxy for peak ciphertext memory.
    """
    if a.cols != b.rows:
        raise ValueError(f"inner dimensions differ: {a.cols} != {b.rows}")
    if a.engine is not b.engine or a.width != b.width:
        raise ValueError("operands must share an engine and width")
    engine = a.engine
    n = a.width
    r, k, c = a.rows, a.cols, b.cols
    jobs = r * c * k * n * n
    if jobs >= max_jobs:
        raise FlatLaunchTooLarge(
            f"flat gather would launch {jobs} gate jobs >= ceiling {max_jobs}; "
            f"use mat_mul_cannon for this size"
        )
    lefts = []
    rights = []
    for i in range(r):
        for j in range(c):
            for t in range(k):
                lefts.append(a.cell(i, t))
                rights.append(b.cell(t, j))
    prods = _mul_lanes(lefts, rights)
    totals = _accumulate_cells(engine, prods, r * c, k)
    return EncryptedMatrix(r, c, [truncate(v, n) for v in totals])


def mat_mul_cannon(a: EncryptedMatrix, b: EncryptedMatrix) -> EncryptedMatrix:
    """Square product on a virtual q x q grid: skew row i left by i and
    column j up by j, then exactly q cycles of one pointwise vector
    multiply of the aligned cells, one vector add into the 2n-bit
    accumulators, and gate-free rotations (q - 1 of them plus the initial
    skew). Output cells truncate to n bits.
    """
    if not (a.rows == a.cols == b.rows == b.cols):
        raise ValueError("cannon schedule needs square matrices of equal rank")
    if a.engine is not b.engine or a.width != b.width:
        raise ValueError("operands must share an engine and width")
    engine = a.engine
    n = a.width
    q = a.rows
    wide = 2 * n

    x = [[a.cell(i, (i + j) % q) for j in range(q)] for i in range(q)]
    y = [[b.cell((i + j) % q, j) for j in range(q)] for i in range(q)]
    acc = [trivial_int(engine, 0, wide) for _ in range(q * q)]

    for cycle in range(q):
        lefts = [x[i][j] for i in range(q) for j in range(q)]
        rights = [y[i][j] for i in range(q) for j in range(q)]
        prods = _mul_lanes(lefts, rights)
        acc = _add_lanes(acc, prods)
        if cycle < q - 1:
            x = [row[1:] + row[:1] for row in x]
            y = y[1:] + y[:1]

    return EncryptedMatrix(q, q, [truncate(v, n) for v in acc])
