"""Normal-equation regression under encryption: the exact solver, the
width audit, and end-to-end fits for both dataset kinds."""

from fractions import Fraction

import pytest

from encirc import (
    Dataset,
    KIND_BINARY,
    KIND_NUMERICAL,
    SingularSystemError,
    fit_encrypted,
    solve_exact,
    synthesize,
)
from encirc.regression import _audit_widths, _gram_cells


def test_solve_exact_identity():
    assert solve_exact([[1, 0], [0, 1]], [4, 9]) == [4, 9]


def test_solve_exact_fractional_answer():
    # 2a + b = 5, a + 3b = 10 -> a = 1, b = 3
    assert solve_exact([[2, 1], [1, 3]], [5, 10]) == [1, 3]
    # non-integral solution stays exact
    got = solve_exact([[3, 0], [0, 1]], [2, 1])
    assert got == [Fraction(2, 3), 1]


def test_solve_exact_needs_pivot_swap():
    # zero in the leading position exercises row exchange
    assert solve_exact([[0, 1], [1, 0]], [7, 5]) == [5, 7]


def test_solve_singular():
    with pytest.raises(SingularSystemError, match="rank-deficient"):
        solve_exact([[1, 1], [1, 1]], [2, 2])
    with pytest.raises(ValueError):
        solve_exact([[1, 2]], [1])  # not square


def test_gram_cells_upper_triangle():
    assert _gram_cells(2) == [(0, 0), (0, 1), (1, 1)]
    assert len(_gram_cells(4)) == 10


def test_audit_widths():
    ds = Dataset(("x1",), ((100,), (101,)), (120, 121), KIND_NUMERICAL)
    _audit_widths(ds, 16)  # 2 * 101 * 121 fits easily in 32 bits
    with pytest.raises(ValueError, match="does not fit"):
        _audit_widths(ds, 6)
    # r * maxx * maxx = 2 * 101 * 101 = 20402 >= 2^14: lanes would wrap
    with pytest.raises(ValueError, match="aggregate"):
        _audit_widths(ds, 7)


def test_fit_numerical_recovers_plane(ref):
    ds = synthesize(KIND_NUMERICAL, rows=12, attrs=2, seed=8, coefficients=(2, 3))
    report = fit_encrypted(ref, ds, bits=16)
    assert report.coefficients == (2, 3)
    assert report.verified
    assert (report.kind, report.rows, report.attrs, report.bits) == (
        KIND_NUMERICAL,
        12,
        2,
        16,
    )


def test_fit_numerical_oracle_small(orc):
    ds = Dataset(
        ("x1", "x2"),
        ((1, 0), (0, 1), (1, 1), (2, 1)),
        (2, 3, 5, 7),
        KIND_NUMERICAL,
    )
    report = fit_encrypted(orc, ds, bits=8)
    assert report.coefficients == (2, 3)
    assert report.gram == ((6, 3), (3, 3))
    assert report.moment == (21, 15)


def test_fit_binary(ref):
    ds = synthesize(KIND_BINARY, rows=24, attrs=3, seed=9, coefficients=(1, 5, 2))
    report = fit_encrypted(ref, ds, bits=16)
    assert report.coefficients == (1, 5, 2)
    assert report.verified


def test_fit_binary_oracle_small(orc):
    ds = Dataset(
        ("x1", "x2"),
        ((1, 0), (0, 1), (1, 1), (1, 0), (0, 0)),
        (4, 6, 10, 4, 0),
        KIND_BINARY,
    )
    report = fit_encrypted(orc, ds, bits=8)
    assert report.coefficients == (4, 6)


def test_fit_singular_dataset(ref):
    # duplicated column: XtX has rank 1
    ds = Dataset(("x1", "x2"), ((1, 1), (2, 2), (3, 3)), (2, 4, 6), KIND_NUMERICAL)
    with pytest.raises(SingularSystemError):
        fit_encrypted(ref, ds, bits=16)


def test_fit_fractional_least_squares(ref):
    # inconsistent rows: the normal equations still have one exact answer
    ds = Dataset(("x1",), ((1,), (2,)), (1, 1), KIND_NUMERICAL)
    report = fit_encrypted(ref, ds, bits=8)
    # XtX = 5, Xty = 3
    assert report.coefficients == (Fraction(3, 5),)


def test_fit_skips_verification_on_request(ref):
    ds = synthesize(KIND_NUMERICAL, rows=6, attrs=2, seed=2)
    report = fit_encrypted(ref, ds, bits=16, verify=False)
    assert not report.verified
    assert report.coefficients == ds.coefficients
