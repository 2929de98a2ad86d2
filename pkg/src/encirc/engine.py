"""Boolean gates over encrypted bits, with batched launches and accounting.

Two interchangeable engines share one contract:

* ReferenceEngine evaluates on cleartext bits while mirroring all noise
  and launch bookkeeping, so circuits can be audited quickly and
  engine-independently.
* OracleBootstrapEngine evaluates on real LWE samples. A two-input gate is
  an integer linear combination of the input samples followed by a
  bootstrap that reads the phase sign and re-encrypts it fresh. The
  bootstrap decrypts under the engine's own secret key: it is a functional
  stand-in for a homomorphic refresh and is NOT a secure construction.

Every gate evaluation, single or batched, flows through the worker pool as
whole launches. GateStats records gates, bootstraps and launches consumed,
which is exactly what the benchmark harness audits. NOT is gate-free (it
negates the sample) and is counted separately from bootstrapped gates.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, fields, replace

import numpy as np

from .scheduler import PARALLEL_BLOCK, JobBatch, WorkerPool
from .torus import (
    DecryptionUnreliableError,
    LweParams,
    LweSample,
    SecretKey,
    decrypt_bit,
    encrypt_bit,
    gaussian_noise_words,
    trivial_sample,
    uniform_words,
)


class BootstrapMarginError(Exception):
    """Combined input noise bound reaches the gate's decision margin."""


class GateKind(enum.Enum):
    """Supported gate kinds. ANDNY is (not x) and y; ORNY is (not x) or y.
    NOT takes a single input and costs no bootstrap."""

    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    NAND = "NAND"
    NOR = "NOR"
    XNOR = "XNOR"
    ANDNY = "ANDNY"
    ORNY = "ORNY"
    NOT = "NOT"


# Truth tables indexed by (x << 1) | y; NOT indexed by x.
_TRUTH = {
    GateKind.AND: (0, 0, 0, 1),
    GateKind.OR: (0, 1, 1, 1),
    GateKind.XOR: (0, 1, 1, 0),
    GateKind.NAND: (1, 1, 1, 0),
    GateKind.NOR: (1, 0, 0, 0),
    GateKind.XNOR: (1, 0, 0, 1),
    GateKind.ANDNY: (0, 1, 0, 0),
    GateKind.ORNY: (1, 1, 0, 1),
    GateKind.NOT: (1, 0),
}

# Linearization (cx, cy, offset), offset in units of mu: a gate evaluates
# cx*x + cy*y + offset*mu on the torus, then bootstraps the sign. The table
# is verified against the truth tables, exhaustively, at engine build time.
_LINEAR = {
    GateKind.AND: (1, 1, -1),
    GateKind.OR: (1, 1, 1),
    GateKind.NAND: (-1, -1, 1),
    GateKind.NOR: (-1, -1, -1),
    GateKind.XOR: (2, 2, 2),
    GateKind.XNOR: (-2, -2, -2),
    GateKind.ANDNY: (-1, 1, -1),
    GateKind.ORNY: (-1, 1, 1),
}

TWO_INPUT_KINDS = tuple(_LINEAR)


def truth_table(kind: GateKind) -> tuple:
    return _TRUTH[kind]


@dataclass
class GateStats:
    """Cumulative evaluation counters.

    bootstraps >= single_gates + 2 * compound_gates always holds: every
    counted gate output is bootstrapped (standalone bootstrap calls only
    add to the left side). largest_batch is a high-water mark.
    """

    single_gates: int = 0
    compound_gates: int = 0
    not_gates: int = 0
    bootstraps: int = 0
    batch_launches: int = 0
    largest_batch: int = 0

    def snapshot(self) -> "GateStats":
        return replace(self)

    def reset(self) -> None:
        for f in fields(self):
            setattr(self, f.name, 0)

    def delta(self, earlier: "GateStats") -> "GateStats":
        """Counter difference since an earlier snapshot. largest_batch is
        not differenced (it stays the current high-water mark)."""
        return GateStats(
            single_gates=self.single_gates - earlier.single_gates,
            compound_gates=self.compound_gates - earlier.compound_gates,
            not_gates=self.not_gates - earlier.not_gates,
            bootstraps=self.bootstraps - earlier.bootstraps,
            batch_launches=self.batch_launches - earlier.batch_launches,
            largest_batch=self.largest_batch,
        )

    def as_record(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class EncBit:
    """Handle to one encrypted bit, tagged by the engine that owns it.

    Oracle bits wrap an LweSample; reference bits carry a cleartext value
    plus a phantom noise bound maintained by identical bookkeeping.
    """

    __slots__ = ("engine", "sample", "clear", "_clear_bound")

    def __init__(self, engine, sample: LweSample | None = None, clear: int | None = None, bound: float | None = None):
        self.engine = engine
        self.sample = sample
        self.clear = clear
        self._clear_bound = bound

    @property
    def noise_bound(self) -> float:
        if self.sample is not None:
            return self.sample.noise_bound
        return self._clear_bound

    def __repr__(self) -> str:
        body = "lwe" if self.sample is not None else f"clear={self.clear}"
        return f"EncBit({body}, noise_bound={self.noise_bound:.3g})"


def _check_value(value) -> int:
    if value not in (0, 1):
        raise ValueError(f"bit value must be 0 or 1, got {value!r}")
    return int(value)


class GateEngine:
    """Shared gate semantics: kind tables, margins, stats, batch dispatch."""

    name = "abstract"

    def __init__(self, params: LweParams, pool: WorkerPool | None = None):
        self.params = params
        self.pool = pool if pool is not None else WorkerPool()
        self.stats = GateStats()
        self._build_tables()

    # -- table construction -------------------------------------------------

    def _build_tables(self) -> None:
        p = self.params
        mod = p.modulus
        half = p.half_word
        mu_w = p.mu.word
        dt = p.dtype
        self._kind_index = {kind: i for i, kind in enumerate(TWO_INPUT_KINDS)}
        cx_dt, cy_dt, cx64, cy64, off64 = [], [], [], [], []
        absx, absy, margins = [], [], []
        self._ref_table = {}
        for kind in TWO_INPUT_KINDS:
            cx, cy, off_mu = _LINEAR[kind]
            truth = _TRUTH[kind]
            margin_words = None
            for px in (0, 1):
                for py in (0, 1):
                    tx = mu_w if px else mod - mu_w
                    ty = mu_w if py else mod - mu_w
                    t = (cx * tx + cy * ty + off_mu * mu_w) % mod
                    decided = 1 if 0 < t < half else 0
                    if decided != truth[(px << 1) | py]:
                        raise ValueError(
                            f"mu={p.mu!r} breaks the {kind.value} linearization"
                        )
                    d = min(t, mod - t, abs(t - half))
                    margin_words = d if margin_words is None else min(margin_words, d)
            if margin_words <= 0:
                raise ValueError(f"mu={p.mu!r} leaves no decision margin for {kind.value}")
            cx_dt.append(cx % mod)
            cy_dt.append(cy % mod)
            cx64.append(cx % mod)
            cy64.append(cy % mod)
            off64.append((off_mu * mu_w) % mod)
            absx.append(float(abs(cx)))
            absy.append(float(abs(cy)))
            margin = margin_words / mod
            margins.append(margin)
            self._ref_table[kind] = (float(abs(cx)), float(abs(cy)), margin, truth)
        self._cx_dt = np.array(cx_dt, dtype=dt)
        self._cy_dt = np.array(cy_dt, dtype=dt)
        self._cx64 = np.array(cx64, dtype=np.uint64)
        self._cy64 = np.array(cy64, dtype=np.uint64)
        self._off64 = np.array(off64, dtype=np.uint64)
        self._absx = np.array(absx)
        self._absy = np.array(absy)
        self._margins = np.array(margins)

    def gate_margin(self, kind: GateKind) -> float:
        """Decision margin of a gate kind in torus units: the least distance
        of any target phase from the decode boundaries {0, 1/2}."""
        return float(self._margins[self._kind_index[kind]])

    # -- common bookkeeping -------------------------------------------------

    @property
    def fresh_bound(self) -> float:
        return self.params.fresh_noise_bound

    def reset_stats(self) -> None:
        self.stats.reset()

    def snapshot_stats(self) -> GateStats:
        return self.stats.snapshot()

    def _check_bit(self, b) -> None:
        if not isinstance(b, EncBit) or b.engine is not self:
            raise ValueError("input bit does not belong to this engine")

    def _check_two_input(self, kind: GateKind) -> None:
        if kind not in _LINEAR:
            raise ValueError(f"{kind!r} is not a two-input gate kind")

    def _count_launch(self, k: int) -> None:
        st = self.stats
        st.batch_launches += 1
        st.bootstraps += k
        if k > st.largest_batch:
            st.largest_batch = k

    # -- evaluation API -----------------------------------------------------

    def eval_not(self, x: EncBit) -> EncBit:
        """Gate-free negation: zero bootstraps, noise bound unchanged."""
        self._check_bit(x)
        self.stats.not_gates += 1
        return self._negate(x)

    def eval_gate(self, kind: GateKind, x: EncBit, y: EncBit | None = None) -> EncBit:
        if kind is GateKind.NOT:
            if y is not None:
                raise ValueError("NOT takes a single input")
            return self.eval_not(x)
        if y is None:
            raise ValueError(f"{kind.value} needs two inputs")
        self._check_two_input(kind)
        self._check_bit(x)
        self._check_bit(y)
        self.stats.single_gates += 1
        batch = JobBatch((kind,), (x,), (y,))
        return self.pool.execute_batch(batch, self)[0]

    def eval_gate_batch(self, kind: GateKind, xs, ys) -> list:
        """Elementwise gate over two equal-length sequences as one launch
        (split only if the pool's max_batch forces it)."""
        self._check_two_input(kind)
        xs = tuple(xs)
        ys = tuple(ys)
        if len(xs) == 0 or len(xs) != len(ys):
            raise ValueError("need equally many left and right inputs, at least one")
        for b in xs:
            self._check_bit(b)
        for b in ys:
            self._check_bit(b)
        self.stats.single_gates += len(xs)
        batch = JobBatch((kind,) * len(xs), xs, ys)
        return self.pool.execute_batch(batch, self)

    def eval_compound(self, kind_a: GateKind, kind_b: GateKind, x: EncBit, y: EncBit) -> tuple:
        """Two gate kinds on one shared input pair, as a single launch of
        two bootstrap jobs."""
        outs_a, outs_b = self.eval_compound_batch(kind_a, kind_b, (x,), (y,))
        return outs_a[0], outs_b[0]

    def eval_compound_batch(self, kind_a: GateKind, kind_b: GateKind, xs, ys) -> tuple:
        """Compound gate over equal-length input sequences: one launch of
        2 * len(xs) jobs. Returns (kind_a outputs, kind_b outputs)."""
        self._check_two_input(kind_a)
        self._check_two_input(kind_b)
        xs = tuple(xs)
        ys = tuple(ys)
        if len(xs) == 0 or len(xs) != len(ys):
            raise ValueError("need equally many left and right inputs, at least one")
        for b in xs:
            self._check_bit(b)
        for b in ys:
            self._check_bit(b)
        self.stats.compound_gates += len(xs)
        kinds = tuple(itertools.chain.from_iterable((kind_a, kind_b) for _ in xs))
        xs2 = tuple(itertools.chain.from_iterable((x, x) for x in xs))
        ys2 = tuple(itertools.chain.from_iterable((y, y) for y in ys))
        outs = self.pool.execute_batch(JobBatch(kinds, xs2, ys2), self)
        return outs[0::2], outs[1::2]

    # -- engine-specific hooks ----------------------------------------------

    def trivial_bit(self, value) -> EncBit:
        raise NotImplementedError

    def encrypt(self, value) -> EncBit:
        raise NotImplementedError

    def decrypt(self, bit: EncBit) -> int:
        raise NotImplementedError

    def bootstrap(self, bit: EncBit) -> EncBit:
        raise NotImplementedError

    def _negate(self, x: EncBit) -> EncBit:
        raise NotImplementedError

    def execute_launch(self, kinds, xs, ys, pool) -> list:
        raise NotImplementedError


class ReferenceEngine(GateEngine):
    """Cleartext engine with full phantom accounting.

    Produces bit-identical plaintext semantics to the oracle engine for
    every circuit, including noise-bound bookkeeping and margin errors, and
    counts the bootstraps the oracle engine would perform.
    """

    name = "reference"

    def __init__(
        self,
        params: LweParams | None = None,
        pool: WorkerPool | None = None,
        seed: int = 0,
    ):
        super().__init__(params if params is not None else LweParams(), pool)
        # consumed by nothing here (this engine draws no randomness); kept
        # so callers can derive input streams uniformly across engines
        self.seed = int(seed)

    def trivial_bit(self, value) -> EncBit:
        return EncBit(self, clear=_check_value(value), bound=0.0)

    def encrypt(self, value) -> EncBit:
        return EncBit(self, clear=_check_value(value), bound=self.fresh_bound)

    def decrypt(self, bit: EncBit) -> int:
        self._check_bit(bit)
        if bit.noise_bound >= self.params.mu_float / 2:
            raise DecryptionUnreliableError(
                f"noise_bound {bit.noise_bound:.3g} >= mu/2"
            )
        return bit.clear

    def bootstrap(self, bit: EncBit) -> EncBit:
        self._check_bit(bit)
        if bit.noise_bound >= self.params.mu_float:
            raise BootstrapMarginError(
                f"noise_bound {bit.noise_bound:.3g} >= margin {self.params.mu_float:.3g}"
            )
        self._count_launch(1)
        return EncBit(self, clear=bit.clear, bound=self.fresh_bound)

    def _negate(self, x: EncBit) -> EncBit:
        return EncBit(self, clear=1 - x.clear, bound=x.noise_bound)

    def execute_launch(self, kinds, xs, ys, pool) -> list:
        self._count_launch(len(kinds))
        fresh = self.fresh_bound
        table = self._ref_table
        outs = []
        for kind, x, y in zip(kinds, xs, ys):
            ax, ay, margin, truth = table[kind]
            if ax * x.noise_bound + ay * y.noise_bound >= margin:
                raise BootstrapMarginError(
                    f"{kind.value}: combined noise bound reaches margin {margin:.3g}"
                )
            outs.append(EncBit(self, clear=truth[(x.clear << 1) | y.clear], bound=fresh))
        return outs


class OracleBootstrapEngine(GateEngine):
    """LWE engine whose bootstrap decrypts and re-encrypts under its own
    key. Functional model only: holding the key makes it NOT secure.

    All fresh randomness is derived from (seed, stream, launch, block), so
    evaluation is a pure function of inputs and seed, independent of the
    worker count executing the blocks.
    """

    name = "oracle-lwe"

    _ENC_STREAM = 0
    _LAUNCH_STREAM = 1

    def __init__(self, key: SecretKey, seed: int = 0, pool: WorkerPool | None = None):
        super().__init__(key.params, pool)
        self.key = key
        self.seed = int(seed)
        self._launch_ids = itertools.count()
        self._enc_rng = np.random.default_rng((self.seed, self._ENC_STREAM))

    def trivial_bit(self, value) -> EncBit:
        return EncBit(self, sample=trivial_sample(self.params, _check_value(value)))

    def encrypt(self, value) -> EncBit:
        return EncBit(self, sample=encrypt_bit(self.key, _check_value(value), self._enc_rng))

    def decrypt(self, bit: EncBit) -> int:
        self._check_bit(bit)
        return decrypt_bit(self.key, bit.sample)

    def bootstrap(self, bit: EncBit) -> EncBit:
        """Refresh one sample: decide the phase sign, re-encrypt it fresh.
        Uses the most conservative gate margin (mu) as its precondition."""
        self._check_bit(bit)
        p = self.params
        if bit.sample.noise_bound >= p.mu_float:
            raise BootstrapMarginError(
                f"noise_bound {bit.sample.noise_bound:.3g} >= margin {p.mu_float:.3g}"
            )
        self._count_launch(1)
        launch_id = next(self._launch_ids)
        rng = np.random.default_rng((self.seed, self._LAUNCH_STREAM, launch_id, 0))
        ph = (bit.sample.b - int(bit.sample.a @ self.key.bits)) % p.modulus
        value = 1 if 0 < ph < p.half_word else 0
        return EncBit(self, sample=encrypt_bit(self.key, value, rng))

    def _negate(self, x: EncBit) -> EncBit:
        s = x.sample
        dt = self.params.dtype
        neg_a = (-s.a) & dt.type(self.params.mask)
        return EncBit(self, sample=LweSample(neg_a, -s.b, s.noise_bound, s.w))

    def execute_launch(self, kinds, xs, ys, pool) -> list:
        p = self.params
        k = len(kinds)
        self._count_launch(k)
        launch_id = next(self._launch_ids)
        idx = np.fromiter((self._kind_index[kd] for kd in kinds), dtype=np.intp, count=k)

        nbx = np.fromiter((b.sample.noise_bound for b in xs), dtype=np.float64, count=k)
        nby = np.fromiter((b.sample.noise_bound for b in ys), dtype=np.float64, count=k)
        bounds = self._absx[idx] * nbx + self._absy[idx] * nby
        margins = self._margins[idx]
        if np.any(bounds >= margins):
            j = int(np.argmax(bounds - margins))
            raise BootstrapMarginError(
                f"{kinds[j].value}: combined noise bound {bounds[j]:.3g} reaches "
                f"margin {margins[j]:.3g}"
            )

        dt = p.dtype
        mask = dt.type(p.mask)
        mask64 = np.uint64(p.mask)
        Ax = np.stack([b.sample.a for b in xs])
        Ay = np.stack([b.sample.a for b in ys])
        bx = np.fromiter((b.sample.b for b in xs), dtype=np.uint64, count=k)
        by = np.fromiter((b.sample.b for b in ys), dtype=np.uint64, count=k)
        A = (self._cx_dt[idx][:, None] * Ax + self._cy_dt[idx][:, None] * Ay) & mask
        bv = ((self._cx64[idx] * bx + self._cy64[idx] * by + self._off64[idx]) & mask64).astype(dt)

        sbits = self.key.bits
        half = dt.type(p.half_word)
        mu_dt = dt.type(p.mu.word)
        neg_mu_dt = dt.type(p.message_word(0))
        seed = self.seed
        stream = self._LAUNCH_STREAM

        def run_block(blk: int):
            lo = blk * PARALLEL_BLOCK
            hi = min(k, lo + PARALLEL_BLOCK)
            rng = np.random.default_rng((seed, stream, launch_id, blk))
            ph = (bv[lo:hi] - A[lo:hi] @ sbits) & mask
            decided = (ph > 0) & (ph < half)
            a_fresh = uniform_words(p, rng, (hi - lo, p.m))
            e_words = gaussian_noise_words(p, rng, hi - lo)
            msg = np.where(decided, mu_dt, neg_mu_dt)
            b_fresh = (a_fresh @ sbits + msg + e_words) & mask
            return a_fresh, b_fresh

        n_blocks = -(-k // PARALLEL_BLOCK)
        blocks = pool.run_blocks(run_block, n_blocks)

        fresh = p.fresh_noise_bound
        w = p.w
        outs = []
        for a_fresh, b_fresh in blocks:
            for i in range(a_fresh.shape[0]):
                outs.append(EncBit(self, sample=LweSample(a_fresh[i], int(b_fresh[i]), fresh, w)))
        return outs
