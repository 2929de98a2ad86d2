"""Command line: key generation, synthetic datasets, and the benchmark
experiments, emitting CSV or JSON-lines result rows.

Exit codes: 0 on success, 1 when any output disagrees with native
arithmetic, 2 for usage problems (bad flags, malformed datasets,
unsupported widths, refused launches, rank-deficient regressions).

Result rows go to --out (default: stdout). The regression report goes to
stdout when rows went to a file, to stderr otherwise, so the row stream
stays machine-readable.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bench
from .bench import BenchVerificationError, UnsupportedWidthError
from .datasets import KINDS, DatasetFormatError, read_csv, synthesize, to_csv_text
from .datasets import write_csv as write_dataset_csv
from .engine import GateEngine, GateKind, OracleBootstrapEngine, ReferenceEngine
from .linalg import FlatLaunchTooLarge
from .regression import SingularSystemError, VerificationError
from .scheduler import PoolConfig, WorkerPool
from .serialize import FormatError, load_key_file, save_key
from .torus import DEFAULT_ALPHA, DEFAULT_M, LweParams, keygen


class UsageError(ValueError):
    pass


def _parse_int_list(text: str, what: str) -> list:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of integers, got {text!r}")
    if not values:
        raise UsageError(f"{what} is empty")
    return values


def _parse_kinds(text: str) -> list:
    kinds = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            kinds.append(GateKind(tok.upper()))
        except ValueError:
            names = ", ".join(k.value.lower() for k in GateKind)
            raise UsageError(f"unknown gate kind {tok!r}; known kinds: {names}") from None
    if not kinds:
        raise UsageError("no gate kinds given")
    return kinds


def _params_from_args(args) -> LweParams:
    return LweParams(
        m=args.m if args.m is not None else DEFAULT_M,
        alpha=args.alpha if args.alpha is not None else DEFAULT_ALPHA,
    )


def _make_engine(args) -> GateEngine:
    pool = WorkerPool(PoolConfig.from_env(workers=args.workers, max_batch=args.max_batch))
    if args.engine == "reference":
        return ReferenceEngine(_params_from_args(args), pool, seed=args.seed)
    if args.key is not None:
        if not os.path.exists(args.key):
            raise UsageError(
                f"key file not found: {args.key} "
                f"(create one with: encirc keygen --out {args.key})"
            )
        key = load_key_file(args.key)
        if args.m is not None and args.m != key.params.m:
            raise UsageError(f"--m {args.m} conflicts with the key file (m={key.params.m})")
        if args.alpha is not None and args.alpha != key.params.alpha:
            raise UsageError(
                f"--alpha {args.alpha} conflicts with the key file (alpha={key.params.alpha})"
            )
    else:
        # no key file: derive one deterministically from the run seed
        key = keygen(_params_from_args(args), seed=args.seed)
    return OracleBootstrapEngine(key, seed=args.seed, pool=pool)


def _emit(args, rows) -> None:
    writer = bench.write_csv if args.format == "csv" else bench.write_jsonl
    if args.out:
        with open(args.out, "w") as fh:
            writer(fh, rows, args.omit_timing)
    else:
        writer(sys.stdout, rows, args.omit_timing)


# -- subcommand handlers ------------------------------------------------------


def cmd_keygen(args) -> int:
    if not args.out:
        raise UsageError("keygen requires --out PATH for the key file")
    params = _params_from_args(args)
    key = keygen(params, seed=args.seed)
    save_key(args.out, key)
    print(
        f"wrote key {args.out} (m={params.m}, w={params.w}, "
        f"alpha={params.alpha:g}, seed={args.seed})"
    )
    return 0


def cmd_dataset(args) -> int:
    coeffs = _parse_int_list(args.coeffs, "--coeffs") if args.coeffs else None
    ds = synthesize(
        args.kind,
        args.rows,
        args.attrs,
        seed=args.seed,
        coefficients=coeffs,
        noise=args.noise,
    )
    if args.out:
        write_dataset_csv(args.out, ds)
        print(
            f"wrote {args.out}: r={ds.r}, d={ds.d}, kind={ds.kind}, "
            f"coefficients={list(ds.coefficients)}"
        )
    else:
        sys.stdout.write(to_csv_text(ds))
    return 0


def cmd_gate(args) -> int:
    rows = bench.bench_gate(
        _make_engine(args),
        sizes=_parse_int_list(args.sizes, "--sizes"),
        kinds=_parse_kinds(args.kinds),
    )
    _emit(args, rows)
    return 0


def cmd_compound(args) -> int:
    rows = bench.bench_compound(
        _make_engine(args), sizes=_parse_int_list(args.sizes, "--sizes")
    )
    _emit(args, rows)
    return 0


def cmd_add(args) -> int:
    lengths = _parse_int_list(args.ell, "--ell")
    if args.variant == "numberwise" and any(ell > 1 for ell in lengths):
        raise UsageError(
            "the number-wise adder benches scalar additions only; vector "
            "rows always run the bit-sliced adder (use --ell 1 or drop --variant)"
        )
    rows = bench.bench_add(
        _make_engine(args),
        widths=_parse_int_list(args.n, "--n"),
        variant=args.variant,
        lengths=lengths,
    )
    _emit(args, rows)
    return 0


def cmd_mul(args) -> int:
    if args.n is None:
        widths = [16, 32] if args.algorithm == "karatsuba" else [16, 24, 32]
    else:
        widths = _parse_int_list(args.n, "--n")
    rows = bench.bench_mul(
        _make_engine(args),
        widths=widths,
        algorithm=args.algorithm,
        lengths=_parse_int_list(args.ell, "--ell"),
    )
    _emit(args, rows)
    return 0


def cmd_matmul(args) -> int:
    rows = bench.bench_matmul(
        _make_engine(args),
        ranks=_parse_int_list(args.rank, "--rank"),
        algorithm=args.algorithm,
    )
    _emit(args, rows)
    return 0


def cmd_linreg(args) -> int:
    kind = None if args.kind == "auto" else args.kind
    ds = read_csv(args.dataset, kind=kind)
    engine = _make_engine(args)
    rows, report = bench.bench_linreg(engine, ds, bits=args.bits)
    _emit(args, rows)
    lines = [
        f"linear regression: {report.kind} dataset, r={report.rows}, "
        f"d={report.attrs}, width {report.bits}",
        "verified: encrypted XtX and Xty match the cleartext aggregates",
        "coefficients:",
    ]
    lines += [f"  {name} = {c}" for name, c in zip(ds.names, report.coefficients)]
    text = "\n".join(lines) + "\n"
    # keep stdout machine-readable when rows already went there
    (sys.stdout if args.out else sys.stderr).write(text)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="encirc",
        description="benchmarks for boolean circuits over encrypted bits",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--engine", choices=("reference", "oracle-lwe"), default="oracle-lwe"
    )
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--max-batch", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="result file (default: stdout)")
    common.add_argument("--key", default=None, help="key file from `encirc keygen`")
    common.add_argument(
        "--omit-timing",
        action="store_true",
        help="write 0.0 seconds so result files are byte-identical across runs",
    )
    common.add_argument("--m", type=int, default=None, help="LWE mask length")
    common.add_argument("--alpha", type=float, default=None, help="noise parameter")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", parents=[common], help="write a key file")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("dataset", parents=[common], help="write a synthetic CSV dataset")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--attrs", type=int, required=True)
    p.add_argument("--kind", choices=KINDS, default="numerical")
    p.add_argument("--noise", type=int, default=0)
    p.add_argument("--coeffs", default=None, help="comma-separated ground truth")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("gate", parents=[common], help="coalesced gate batches")
    p.add_argument("--sizes", default="4,8,16,32")
    p.add_argument("--kinds", default="and")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("compound", parents=[common], help="fused pair vs two launches")
    p.add_argument("--sizes", default="1,4,8,16,24,32")
    p.set_defaults(func=cmd_compound)

    p = sub.add_parser("add", parents=[common], help="adders and vector adds")
    p.add_argument("--n", default="16,24,32")
    p.add_argument("--variant", choices=("bitwise", "numberwise"), default="bitwise")
    p.add_argument("--ell", default="1")
    p.set_defaults(func=cmd_add)

    p = sub.add_parser("mul", parents=[common], help="multipliers and vector products")
    p.add_argument("--n", default=None, help="widths (default 16,24,32; karatsuba 16,32)")
    p.add_argument("--algorithm", choices=("naive", "karatsuba"), default="naive")
    p.add_argument("--ell", default="1")
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("matmul", parents=[common], help="square matrix products")
    p.add_argument("--rank", default="2,4,8")
    p.add_argument("--algorithm", choices=("flat", "cannon"), default="cannon")
    p.set_defaults(func=cmd_matmul)

    p = sub.add_parser("linreg", parents=[common], help="encrypted linear regression")
    p.add_argument("dataset", help="CSV: header, integer cells, last column = target")
    p.add_argument("--kind", choices=(*KINDS, "auto"), default="auto")
    p.add_argument("--bits", type=int, default=16)
    p.set_defaults(func=cmd_linreg)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BenchVerificationError, VerificationError) as e:
        print(f"correctness failure: {e}", file=sys.stderr)
        return 1
    except (
        UsageError,
        UnsupportedWidthError,
        FlatLaunchTooLarge,
        DatasetFormatError,
        SingularSystemError,
        FormatError,
        FileNotFoundError,
        OSError,
        ValueError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
