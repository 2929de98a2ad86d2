"""Linear regression on encrypted data via normal equations.

The design matrix X and target y are encrypted bitwise; the Gram matrix
XtX and moment vector Xty are accumulated entirely under encryption
(products in parallel lanes, tree accumulation at double width, never
truncated); the two small aggregates are then decrypted and the d x d
system is solved exactly over rationals. Division never happens under
encryption.

Binary attributes take a cheaper route: a product of bits is a single
AND, and scaling the target by a bit is one AND per target bit, so the
Gram and moment products become flat AND batches instead of multiplier
circuits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

from .datasets import KIND_BINARY, Dataset
from .engine import GateEngine, GateKind
from .integers import EncryptedInt, decrypt_int, encrypt_int, _mul_lanes
from .linalg import _accumulate_cells

DEFAULT_BITS = 16


class SingularSystemError(ValueError):
    """Normal equations have no unique solution (rank-deficient data)."""


class VerificationError(RuntimeError):
    """Encrypted aggregate disagrees with the cleartext computation."""


@dataclass(frozen=True)
class RegressionReport:
    coefficients: tuple  # Fractions, one per attribute
    gram: tuple  # decrypted XtX, d x d
    moment: tuple  # decrypted Xty, length d
    bits: int
    kind: str
    rows: int
    attrs: int
    verified: bool


def solve_exact(gram: Sequence[Sequence[int]], moment: Sequence[int]) -> List[Fraction]:
    """Gaussian elimination over Fraction; first nonzero pivot per column
    keeps the run deterministic. Exact, so a solvable integer system
    yields integer coefficients as integral Fractions."""
    d = len(gram)
    if d == 0 or any(len(row) != d for row in gram) or len(moment) != d:
        raise ValueError("gram must be d x d and moment length d")
    m = [[Fraction(v) for v in row] + [Fraction(moment[i])] for i, row in enumerate(gram)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularSystemError(
                f"normal equations are singular at pivot column {col}; "
                "the dataset is rank-deficient (it needs at least as many "
                "independent rows as attributes)"
            )
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(d):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [m[r][d] for r in range(d)]


def _audit_widths(ds: Dataset, bits: int) -> None:
    maxx = max(max(row) for row in ds.rows)
    maxy = max(ds.target)
    if maxy >= 1 << bits:
        raise ValueError(f"target value {maxy} does not fit in {bits} bits")
    if maxx >= 1 << bits:
        raise ValueError(f"attribute value {maxx} does not fit in {bits} bits")
    # aggregates live in 2*bits-wide lanes and must not wrap
    worst = ds.r * maxx * max(maxx, maxy, 1)
    if worst >= 1 << (2 * bits):
        raise ValueError(
            f"inner products can reach {worst}, overflowing the "
            f"{2 * bits}-bit aggregate lanes; raise bits"
        )


def _gram_cells(d: int) -> list:
    return [(i, j) for i in range(d) for j in range(i, d)]


def _binary_aggregates(engine: GateEngine, cols, ency, ds: Dataset, bits: int):
    r, d = ds.r, ds.d
    zero = engine.trivial_bit(0)
    pairs = _gram_cells(d)

    # Gram: one flat AND batch, one 1-bit product per (cell, row)
    xs = [cols[i][t].bits[0] for (i, j) in pairs for t in range(r)]
    ys = [cols[j][t].bits[0] for (i, j) in pairs for t in range(r)]
    and_bits = engine.eval_gate_batch(GateKind.AND, xs, ys)
    width_g = max(r.bit_length(), 1)
    pad_g = [zero] * (width_g - 1)
    prods_g = [EncryptedInt(engine, [b, *pad_g]) for b in and_bits]
    gram_sums = _accumulate_cells(engine, prods_g, len(pairs), r)

    # moment: scale y_t by the attribute bit, one AND per target bit
    xs = [cols[i][t].bits[0] for i in range(d) for t in range(r) for _ in range(bits)]
    ys = [b for i in range(d) for t in range(r) for b in ency[t].bits]
    masked = engine.eval_gate_batch(GateKind.AND, xs, ys)
    width_m = bits + r.bit_length()
    pad_m = [zero] * (width_m - bits)
    prods_m = []
    for k in range(d * r):
        chunk = masked[k * bits : (k + 1) * bits]
        prods_m.append(EncryptedInt(engine, [*chunk, *pad_m]))
    moment_sums = _accumulate_cells(engine, prods_m, d, r)
    return pairs, gram_sums, moment_sums


def _numerical_aggregates(engine: GateEngine, cols, ency, ds: Dataset):
    r, d = ds.r, ds.d
    pairs = _gram_cells(d)
    # one lane per (cell, row): Gram cells first, then the moment cells
    xs = [cols[i][t] for (i, j) in pairs for t in range(r)]
    ys = [cols[j][t] for (i, j) in pairs for t in range(r)]
    xs += [cols[i][t] for i in range(d) for t in range(r)]
    ys += [ency[t] for i in range(d) for t in range(r)]
    prods = _mul_lanes(xs, ys)
    sums = _accumulate_cells(engine, prods, len(pairs) + d, r)
    return pairs, sums[: len(pairs)], sums[len(pairs) :]


def fit_encrypted(
    engine: GateEngine,
    ds: Dataset,
    *,
    bits: int = DEFAULT_BITS,
    verify: bool = True,
) -> RegressionReport:
    """Encrypt, aggregate under encryption, decrypt XtX and Xty, solve.

    verify=True recomputes both aggregates in cleartext and raises
    VerificationError on any disagreement before solving.
    """
    _audit_widths(ds, bits)
    r, d = ds.r, ds.d
    cols = [[encrypt_int(engine, v, bits) for v in ds.column(j)] for j in range(d)]
    ency = [encrypt_int(engine, v, bits) for v in ds.target]

    if ds.kind == KIND_BINARY:
        pairs, gram_sums, moment_sums = _binary_aggregates(engine, cols, ency, ds, bits)
    else:
        pairs, gram_sums, moment_sums = _numerical_aggregates(engine, cols, ency, ds)

    gram = [[0] * d for _ in range(d)]
    for (i, j), agg in zip(pairs, gram_sums):
        v = decrypt_int(engine, agg)
        gram[i][j] = v
        gram[j][i] = v
    moment = [decrypt_int(engine, agg) for agg in moment_sums]

    verified = False
    if verify:
        want_gram = [
            [sum(row[i] * row[j] for row in ds.rows) for j in range(d)] for i in range(d)
        ]
        want_moment = [
            sum(row[i] * y for row, y in zip(ds.rows, ds.target)) for i in range(d)
        ]
        for i in range(d):
            for j in range(d):
                if gram[i][j] != want_gram[i][j]:
                    raise VerificationError(
                        f"encrypted Gram cell ({i},{j}) = {gram[i][j]}, "
                        f"cleartext says {want_gram[i][j]}"
                    )
        for i in range(d):
            if moment[i] != want_moment[i]:
                raise VerificationError(
                    f"encrypted moment[{i}] = {moment[i]}, "
                    f"cleartext says {want_moment[i]}"
                )
        verified = True

    coeffs = solve_exact(gram, moment)
    return RegressionReport(
        coefficients=tuple(coeffs),
        gram=tuple(tuple(row) for row in gram),
        moment=tuple(moment),
        bits=bits,
        kind=ds.kind,
        rows=r,
        attrs=d,
        verified=verified,
    )
