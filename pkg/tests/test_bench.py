"""Benchmark plumbing: row formatting, audits, and the experiment set."""

import io

import pytest

from encirc.bench import (
    ADD_WIDTHS,
    GATE_SIZES,
    MATMUL_RANKS,
    RESULT_COLUMNS,
    BenchResult,
    BenchVerificationError,
    UnsupportedWidthError,
    bench_add,
    bench_compound,
    bench_gate,
    bench_linreg,
    bench_matmul,
    bench_mul,
    karatsuba_supported,
    write_csv,
    write_jsonl,
)
from encirc import GateKind, synthesize


def _mk_result(**over):
    base = dict(
        experiment="gate-and",
        n=8,
        ell_or_rank=1,
        engine="reference",
        workers=2,
        seconds=1.25,
        single_gates=8,
        compound_gates=0,
        bootstraps=8,
        batch_launches=1,
        correct=True,
    )
    base.update(over)
    return BenchResult(**base)


def test_csv_row_formatting():
    row = _mk_result().csv_row()
    assert row[RESULT_COLUMNS.index("seconds")] == "1.250000"
    assert row[-1] == "true"
    assert _mk_result(correct=False).csv_row()[-1] == "false"
    assert _mk_result().csv_row(omit_timing=True)[5] == "0.000000"


def test_write_csv_and_jsonl():
    buf = io.StringIO()
    write_csv(buf, [_mk_result()])
    header, line = buf.getvalue().splitlines()
    assert header == ",".join(RESULT_COLUMNS)
    assert line.startswith("gate-and,8,1,reference,2,1.250000,")

    buf = io.StringIO()
    write_jsonl(buf, [_mk_result()], omit_timing=True)
    assert '"seconds": 0.0' in buf.getvalue()


def test_karatsuba_supported():
    assert karatsuba_supported(8)
    assert karatsuba_supported(16)
    assert karatsuba_supported(32)
    assert not karatsuba_supported(4)  # below min width
    assert not karatsuba_supported(24)  # not a power of two
    assert not karatsuba_supported(12)


def test_bench_gate_counts(ref):
    rows = bench_gate(ref, sizes=(4,), kinds=(GateKind.AND, GateKind.NOR))
    assert [r.experiment for r in rows] == ["gate-and", "gate-nor"]
    assert all(r.bootstraps == 4 and r.batch_launches == 1 for r in rows)
    assert all(r.correct for r in rows)


def test_bench_compound_pairs(ref):
    rows = bench_compound(ref, sizes=(3,))
    fused, split = rows
    assert (fused.experiment, split.experiment) == ("compound", "two-singles")
    assert (fused.batch_launches, split.batch_launches) == (1, 2)
    assert fused.bootstraps == split.bootstraps == 6


def test_bench_add_scalar_and_vector(ref):
    (scalar,) = bench_add(ref, widths=(8,), variant="bitwise", lengths=(1,))
    assert scalar.experiment == "add-bitwise" and scalar.batch_launches == 24
    (vec,) = bench_add(ref, widths=(8,), variant="bitwise", lengths=(4,))
    assert vec.experiment == "vec-add" and vec.batch_launches == 24
    (nw,) = bench_add(ref, widths=(8,), variant="numberwise", lengths=(1,))
    assert nw.experiment == "add-numberwise" and nw.batch_launches == 8


def test_bench_mul_refuses_karatsuba_24(ref):
    with pytest.raises(UnsupportedWidthError):
        bench_mul(ref, widths=(24,), algorithm="karatsuba", lengths=(1,))


def test_bench_matmul_validates_rank(ref):
    with pytest.raises(ValueError):
        bench_matmul(ref, ranks=(3,), algorithm="cannon")
    (row,) = bench_matmul(ref, ranks=(2,), algorithm="flat")
    assert row.experiment == "matmul-flat" and row.correct


def test_bench_linreg_report_and_row(ref):
    ds = synthesize("numerical", rows=8, attrs=2, seed=4, coefficients=(2, 3))
    rows, report = bench_linreg(ref, ds, bits=16)
    (row,) = rows
    assert row.experiment == "linreg-numerical"
    assert report.coefficients == (2, 3)
    assert row.n == 16 and row.ell_or_rank == 2  # width and attr count


def test_constants_cover_the_documented_grid():
    assert GATE_SIZES == (4, 8, 16, 32)
    assert ADD_WIDTHS == (16, 24, 32)
    assert MATMUL_RANKS == (2, 4, 8, 16)
