"""Benchmark experiments behind the command line.

Every experiment runs a circuit on the selected engine, decrypts the
outputs, and compares them against native integer arithmetic before its
row may be emitted; one mismatch raises and the whole run aborts. Rows
carry the engine's gate counters so runs on different machines stay
comparable even though wall time is machine-relative.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .engine import TWO_INPUT_KINDS, GateEngine, GateKind, truth_table
from .integers import (
    add_bitwise,
    add_numberwise,
    decrypt_int,
    encrypt_int,
    mul_karatsuba,
    mul_naive,
)
from .linalg import (
    decrypt_matrix,
    decrypt_vector,
    encrypt_matrix,
    encrypt_vector,
    mat_mul_cannon,
    mat_mul_flat,
    vec_add,
    vec_mul,
)
from .regression import fit_encrypted

RESULT_COLUMNS = (
    "experiment",
    "n",
    "ell_or_rank",
    "engine",
    "workers",
    "seconds",
    "single_gates",
    "compound_gates",
    "bootstraps",
    "batch_launches",
    "correct",
)

GATE_SIZES = (4, 8, 16, 32)
COMPOUND_SIZES = (1, 4, 8, 16, 24, 32)
ADD_WIDTHS = (16, 24, 32)
MUL_WIDTHS = (16, 24, 32)
MATMUL_RANKS = (2, 4, 8, 16)
VECTOR_LENGTHS = (1, 4, 8, 16, 32)

_INPUT_STREAM = 2  # engines use rng streams 0 and 1 of the same seed


class BenchVerificationError(RuntimeError):
    """A benchmark output disagreed with native arithmetic."""


class UnsupportedWidthError(ValueError):
    """The requested algorithm does not exist at this width."""


@dataclass
class BenchResult:
    experiment: str
    n: int
    ell_or_rank: int
    engine: str
    workers: int
    seconds: float
    single_gates: int
    compound_gates: int
    bootstraps: int
    batch_launches: int
    correct: bool = True

    def record(self, omit_timing: bool = False) -> dict:
        rec = {name: getattr(self, name) for name in RESULT_COLUMNS[:5]}
        rec["seconds"] = 0.0 if omit_timing else self.seconds
        for name in RESULT_COLUMNS[6:-1]:
            rec[name] = getattr(self, name)
        rec["correct"] = self.correct
        return rec

    def csv_row(self, omit_timing: bool = False) -> List[str]:
        rec = self.record(omit_timing)
        rec["seconds"] = f"{rec['seconds']:.6f}"
        rec["correct"] = "true" if rec["correct"] else "false"
        return [str(rec[name]) for name in RESULT_COLUMNS]


def write_csv(stream, rows: Sequence[BenchResult], omit_timing: bool = False) -> None:
    stream.write(",".join(RESULT_COLUMNS) + "\n")
    for row in rows:
        stream.write(",".join(row.csv_row(omit_timing)) + "\n")


def write_jsonl(stream, rows: Sequence[BenchResult], omit_timing: bool = False) -> None:
    for row in rows:
        stream.write(json.dumps(row.record(omit_timing)) + "\n")


def _input_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng((seed, _INPUT_STREAM))


def _mismatch(experiment: str, detail: str):
    raise BenchVerificationError(f"{experiment}: {detail}")


class _Run:
    """Times one measured region and captures the engine's stat delta."""

    def __init__(self, engine: GateEngine, experiment: str, n: int, ell: int):
        self.engine = engine
        self.experiment = experiment
        self.n = n
        self.ell = ell

    def __enter__(self):
        self.before = self.engine.snapshot_stats()
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.seconds = time.perf_counter() - self.t0
        self.stats = self.engine.snapshot_stats().delta(self.before)
        return False

    def result(self) -> BenchResult:
        return BenchResult(
            experiment=self.experiment,
            n=self.n,
            ell_or_rank=self.ell,
            engine=self.engine.name,
            workers=self.engine.pool.config.workers,
            seconds=self.seconds,
            single_gates=self.stats.single_gates,
            compound_gates=self.stats.compound_gates,
            bootstraps=self.stats.bootstraps,
            batch_launches=self.stats.batch_launches,
        )

    def expect_launches(self, want: int) -> None:
        if self.stats.batch_launches != want:
            _mismatch(
                self.experiment,
                f"expected {want} batch launches, engine counted "
                f"{self.stats.batch_launches}",
            )


def bench_gate(
    engine: GateEngine,
    sizes: Sequence[int] = GATE_SIZES,
    kinds: Sequence[GateKind] = (GateKind.AND,),
) -> List[BenchResult]:
    """One coalesced n-job batch per (kind, n); bootstraps must equal n."""
    rng = _input_rng(engine.seed)
    rows = []
    for kind in kinds:
        if kind not in TWO_INPUT_KINDS:
            raise UnsupportedWidthError(f"{kind.value} is not a two-input gate")
        table = truth_table(kind)
        for n in sizes:
            if not 2 <= n <= 64:
                raise UnsupportedWidthError(f"gate batch size {n} outside 2..64")
            xb = rng.integers(0, 2, size=n)
            yb = rng.integers(0, 2, size=n)
            xs = [engine.encrypt(int(v)) for v in xb]
            ys = [engine.encrypt(int(v)) for v in yb]
            with _Run(engine, f"gate-{kind.value.lower()}", n, n) as run:
                outs = engine.eval_gate_batch(kind, xs, ys)
            for x, y, out in zip(xb, yb, outs):
                want = table[(int(x) << 1) | int(y)]
                got = engine.decrypt(out)
                if got != want:
                    _mismatch(run.experiment, f"{kind.value}({x},{y}) = {got}, want {want}")
            if run.stats.bootstraps != n:
                _mismatch(run.experiment, f"bootstraps {run.stats.bootstraps} != n {n}")
            rows.append(run.result())
    return rows


def bench_compound(
    engine: GateEngine, sizes: Sequence[int] = COMPOUND_SIZES
) -> List[BenchResult]:
    """Paired rows per size: one fused two-kind launch against the same
    work as two sequential single-kind launches. Plaintexts must agree
    and the launch counts must be exactly 1 and 2."""
    rng = _input_rng(engine.seed)
    kind_a, kind_b = GateKind.XOR, GateKind.AND
    ta, tb = truth_table(kind_a), truth_table(kind_b)
    rows = []
    for n in sizes:
        xb = rng.integers(0, 2, size=n)
        yb = rng.integers(0, 2, size=n)
        xs = [engine.encrypt(int(v)) for v in xb]
        ys = [engine.encrypt(int(v)) for v in yb]

        with _Run(engine, "compound", n, n) as run:
            fused_a, fused_b = engine.eval_compound_batch(kind_a, kind_b, xs, ys)
        run.expect_launches(1)
        rows.append(run.result())

        with _Run(engine, "two-singles", n, n) as pair:
            solo_a = engine.eval_gate_batch(kind_a, xs, ys)
            solo_b = engine.eval_gate_batch(kind_b, xs, ys)
        pair.expect_launches(2)
        rows.append(pair.result())

        for i in range(n):
            key = (int(xb[i]) << 1) | int(yb[i])
            got = (
                engine.decrypt(fused_a[i]),
                engine.decrypt(fused_b[i]),
                engine.decrypt(solo_a[i]),
                engine.decrypt(solo_b[i]),
            )
            want = (ta[key], tb[key], ta[key], tb[key])
            if got != want:
                _mismatch("compound", f"pair {i}: {got} != {want}")
    return rows


def bench_add(
    engine: GateEngine,
    widths: Sequence[int] = ADD_WIDTHS,
    variant: str = "bitwise",
    lengths: Sequence[int] = (1,),
) -> List[BenchResult]:
    """Scalar adds at ell=1 (the chosen variant, with its launch-count
    audit: 3n bitwise, n number-wise); ell>1 rows always run the
    bit-sliced vector add, which must hold 3n launches for every ell."""
    if variant not in ("bitwise", "numberwise"):
        raise UnsupportedWidthError(f"unknown adder variant {variant!r}")
    rng = _input_rng(engine.seed)
    rows = []
    for n in widths:
        mask = (1 << n) - 1
        for ell in lengths:
            av = [int(v) for v in rng.integers(0, 1 << n, size=ell, dtype=np.uint64)]
            bv = [int(v) for v in rng.integers(0, 1 << n, size=ell, dtype=np.uint64)]
            if ell == 1:
                x = encrypt_int(engine, av[0], n)
                y = encrypt_int(engine, bv[0], n)
                fn = add_bitwise if variant == "bitwise" else add_numberwise
                with _Run(engine, f"add-{variant}", n, 1) as run:
                    out = fn(x, y)
                got = decrypt_int(engine, out)
                want = (av[0] + bv[0]) & mask
                if got != want:
                    _mismatch(run.experiment, f"{av[0]}+{bv[0]} = {got}, want {want}")
                run.expect_launches(3 * n if variant == "bitwise" else n)
            else:
                u = encrypt_vector(engine, av, n)
                v = encrypt_vector(engine, bv, n)
                with _Run(engine, "vec-add", n, ell) as run:
                    out = vec_add(u, v)
                got = decrypt_vector(engine, out)
                want = [(a + b) & mask for a, b in zip(av, bv)]
                if got != want:
                    _mismatch(run.experiment, f"ell={ell}: {got} != {want}")
                run.expect_launches(3 * n)
            rows.append(run.result())
    return rows


def karatsuba_supported(n: int) -> bool:
    return n >= 8 and (n & (n - 1)) == 0


def bench_mul(
    engine: GateEngine,
    widths: Sequence[int] = (16,),
    algorithm: str = "naive",
    lengths: Sequence[int] = (1,),
) -> List[BenchResult]:
    """Scalar products at ell=1 with the chosen algorithm, elementwise
    vector products otherwise. Outputs are exact 2n-bit products."""
    if algorithm not in ("naive", "karatsuba"):
        raise UnsupportedWidthError(f"unknown multiplication algorithm {algorithm!r}")
    rng = _input_rng(engine.seed)
    rows = []
    for n in widths:
        if algorithm == "karatsuba" and not karatsuba_supported(n):
            raise UnsupportedWidthError(
                f"karatsuba is unsupported at width {n}; "
                "supported widths are powers of two, at least 8"
            )
        for ell in lengths:
            av = [int(v) for v in rng.integers(0, 1 << n, size=ell, dtype=np.uint64)]
            bv = [int(v) for v in rng.integers(0, 1 << n, size=ell, dtype=np.uint64)]
            if ell == 1:
                x = encrypt_int(engine, av[0], n)
                y = encrypt_int(engine, bv[0], n)
                fn = mul_naive if algorithm == "naive" else mul_karatsuba
                with _Run(engine, f"mul-{algorithm}", n, 1) as run:
                    out = fn(x, y)
                got = decrypt_int(engine, out)
                if got != av[0] * bv[0]:
                    _mismatch(run.experiment, f"{av[0]}*{bv[0]} = {got}, want {av[0] * bv[0]}")
            else:
                u = encrypt_vector(engine, av, n)
                v = encrypt_vector(engine, bv, n)
                with _Run(engine, "vec-mul", n, ell) as run:
                    out = vec_mul(u, v)
                got = decrypt_vector(engine, out)
                want = [a * b for a, b in zip(av, bv)]
                if got != want:
                    _mismatch(run.experiment, f"ell={ell}: {got} != {want}")
            rows.append(run.result())
    return rows


def bench_matmul(
    engine: GateEngine,
    ranks: Sequence[int] = (2, 4, 8),
    algorithm: str = "cannon",
    n: int = 16,
) -> List[BenchResult]:
    """Square products at the given ranks; the flat gather's job guard is
    allowed to propagate (rank 16 at the default ceiling)."""
    if algorithm not in ("flat", "cannon"):
        raise UnsupportedWidthError(f"unknown matmul algorithm {algorithm!r}")
    rng = _input_rng(engine.seed)
    mask = (1 << n) - 1
    rows = []
    for q in ranks:
        if q not in MATMUL_RANKS:
            raise UnsupportedWidthError(f"rank {q} outside the supported set {MATMUL_RANKS}")
        a = rng.integers(0, 1 << n, size=(q, q), dtype=np.uint64)
        b = rng.integers(0, 1 << n, size=(q, q), dtype=np.uint64)
        ea = encrypt_matrix(engine, [[int(v) for v in row] for row in a], n)
        eb = encrypt_matrix(engine, [[int(v) for v in row] for row in b], n)
        fn = mat_mul_flat if algorithm == "flat" else mat_mul_cannon
        with _Run(engine, f"matmul-{algorithm}", n, q) as run:
            out = fn(ea, eb)
        got = decrypt_matrix(engine, out)
        want = [
            [int(sum(int(a[i, t]) * int(b[t, j]) for t in range(q))) & mask for j in range(q)]
            for i in range(q)
        ]
        if got != want:
            _mismatch(run.experiment, f"rank {q} product mismatch")
        rows.append(run.result())
    return rows


def bench_linreg(engine: GateEngine, dataset, bits: int = 16):
    """Returns (rows, report). fit_encrypted already oracle-verifies the
    encrypted aggregates cell by cell."""
    with _Run(engine, f"linreg-{dataset.kind}", bits, dataset.d) as run:
        report = fit_encrypted(engine, dataset, bits=bits, verify=True)
    return [run.result()], report
