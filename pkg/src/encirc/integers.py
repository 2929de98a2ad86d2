"""Encrypted integers as little-endian bit vectors, and their circuits.

An EncryptedInt is an immutable tuple of encrypted bits, least significant
first, interpreted as two's complement at its width on decryption.
Arithmetic is exact mod 2**n.

Circuit shapes are data-independent: for a fixed width, an operation
consumes exactly the same gate, bootstrap and launch counts on every
input, which is what makes the stats audits meaningful.

The core adder and multiplier kernels are written over lanes (parallel
lists of integers) so that the vector layer can coalesce the jobs of many
elements into shared launches; the scalar ops are the one-lane case.
"""

from __future__ import annotations

from typing import Sequence

from .engine import EncBit, GateEngine, GateKind

KARATSUBA_MIN_WIDTH = 8


class EncryptedInt:
    """Bits are LSB-first EncBit handles from one engine; width = len(bits)."""

    __slots__ = ("engine", "bits")

    def __init__(self, engine: GateEngine, bits: Sequence[EncBit]):
        bits = tuple(bits)
        if not bits:
            raise ValueError("an encrypted integer needs at least one bit")
        for b in bits:
            if b.engine is not engine:
                raise ValueError("all bits must belong to the given engine")
        self.engine = engine
        self.bits = bits

    @property
    def width(self) -> int:
        return len(self.bits)

    def __repr__(self) -> str:
        return f"EncryptedInt(width={self.width})"


def as_signed(word: int, n: int) -> int:
    """Two's-complement reading of an n-bit pattern."""
    word &= (1 << n) - 1
    return word - (1 << n) if word >= 1 << (n - 1) else word


def _check_value_range(value: int, n: int) -> int:
    if not -(1 << (n - 1)) <= value < (1 << n):
        raise ValueError(f"{value} does not fit in {n} bits (two's complement)")
    return value & ((1 << n) - 1)


def encrypt_int(engine: GateEngine, value: int, n: int) -> EncryptedInt:
    """Encrypt value at width n. Accepts the signed range [-2^(n-1), 2^(n-1))
    and raw unsigned patterns up to 2^n - 1; both reduce mod 2^n."""
    word = _check_value_range(int(value), n)
    return EncryptedInt(engine, [engine.encrypt((word >> i) & 1) for i in range(n)])


def trivial_int(engine: GateEngine, value: int, n: int) -> EncryptedInt:
    """Noiseless constant at width n (used for carries, padding, shifts)."""
    word = _check_value_range(int(value), n)
    return EncryptedInt(engine, [engine.trivial_bit((word >> i) & 1) for i in range(n)])


def decrypt_int(engine: GateEngine, x: EncryptedInt) -> int:
    """Unsigned word in [0, 2^n); wrap as_signed() around it for the
    two's-complement view. Per-bit unreliability errors propagate."""
    word = 0
    for i, b in enumerate(x.bits):
        word |= engine.decrypt(b) << i
    return word


def _common_engine(xs: Sequence[EncryptedInt], ys: Sequence[EncryptedInt]) -> tuple:
    if len(xs) == 0 or len(xs) != len(ys):
        raise ValueError("need equally many left and right integers, at least one")
    engine = xs[0].engine
    n = xs[0].width
    for v in (*xs, *ys):
        if v.engine is not engine:
            raise ValueError("mixed engines in one operation")
        if v.width != n:
            raise ValueError(f"mixed widths {v.width} and {n} in one operation")
    return engine, n


def _add_lanes(xs: Sequence[EncryptedInt], ys: Sequence[EncryptedInt]) -> list:
    """Ripple-carry addition over parallel lanes, bit position by bit
    position, so the jobs of all lanes share each position's launches:
    3 launches per bit (two compound pairs plus one OR) whatever the lane
    count. Carry out of the top bit is dropped (mod 2**n)."""
    engine, n = _common_engine(xs, ys)
    ell = len(xs)
    zero = engine.trivial_bit(0)
    carries = [zero] * ell
    out_bits: list[list[EncBit]] = [[] for _ in range(ell)]
    for i in range(n):
        a_i = [x.bits[i] for x in xs]
        b_i = [y.bits[i] for y in ys]
        s_i, g_i = engine.eval_compound_batch(GateKind.XOR, GateKind.AND, a_i, b_i)
        r_i, t_i = engine.eval_compound_batch(GateKind.XOR, GateKind.AND, s_i, carries)
        carries = engine.eval_gate_batch(GateKind.OR, g_i, t_i)
        for lane in range(ell):
            out_bits[lane].append(r_i[lane])
    return [EncryptedInt(engine, bits) for bits in out_bits]


def add_bitwise(x: EncryptedInt, y: EncryptedInt) -> EncryptedInt:
    """Ripple-carry sum mod 2**n: per bit, one compound (XOR, AND) on the
    operands, one compound (XOR, AND) against the carry, one OR merging
    the carry candidates; 5 gate evaluations in 3 launches per bit."""
    return _add_lanes([x], [y])[0]


def add_numberwise(x: EncryptedInt, y: EncryptedInt) -> EncryptedInt:
    """Carry-iteration sum mod 2**n: n rounds of one whole-word compound
    launch (carry = r AND b, r = r XOR b) followed by a gate-free shift of
    the carries. Always runs exactly n rounds: one launch per bit."""
    engine, n = _common_engine([x], [y])
    zero = engine.trivial_bit(0)
    r = list(x.bits)
    b = list(y.bits)
    for _ in range(n):
        carry, r = engine.eval_compound_batch(GateKind.AND, GateKind.XOR, r, b)
        b = [zero] + carry[:-1]
    return EncryptedInt(engine, r)


def complement(x: EncryptedInt) -> EncryptedInt:
    """Bitwise NOT; gate-free."""
    return EncryptedInt(x.engine, [x.engine.eval_not(b) for b in x.bits])


def negate(x: EncryptedInt) -> EncryptedInt:
    """Two's-complement negation: complement, then add the constant 1."""
    return add_bitwise(complement(x), trivial_int(x.engine, 1, x.width))


def shift_left(x: EncryptedInt, k: int, width: int | None = None) -> EncryptedInt:
    """Multiply by 2**k, gate-free. Truncates mod 2**width; width defaults
    to x.width, and callers building product lanes pass a wider target."""
    if k < 0:
        raise ValueError("shift amount must be non-negative")
    width = x.width if width is None else width
    if width < 1:
        raise ValueError("width must be >= 1")
    zero = x.engine.trivial_bit(0)
    bits = [zero] * k + list(x.bits)
    bits = bits[:width]
    bits += [zero] * (width - len(bits))
    return EncryptedInt(x.engine, bits)


def zero_extend(x: EncryptedInt, width: int) -> EncryptedInt:
    """Widen with trivial zero bits (unsigned reading preserved); gate-free."""
    if width < x.width:
        raise ValueError("zero_extend cannot shrink; use truncate")
    zero = x.engine.trivial_bit(0)
    return EncryptedInt(x.engine, list(x.bits) + [zero] * (width - x.width))


def truncate(x: EncryptedInt, width: int) -> EncryptedInt:
    """Keep the low `width` bits; gate-free."""
    if not 1 <= width <= x.width:
        raise ValueError(f"cannot truncate width {x.width} to {width}")
    return EncryptedInt(x.engine, x.bits[:width])


def _level_add(lefts: Sequence[Sequence[EncryptedInt]], rights) -> list:
    """Combine one reduction level: flatten every pair's lanes into a
    single sliced addition, then regroup."""
    sizes = [len(item) for item in lefts]
    xs = [v for item in lefts for v in item]
    ys = [v for item in rights for v in item]
    outs = _add_lanes(xs, ys)
    merged = []
    pos = 0
    for size in sizes:
        merged.append(outs[pos : pos + size])
        pos += size
    return merged


def accumulate_tree(vs: Sequence[EncryptedInt]) -> EncryptedInt:
    """Pairwise tree sum mod 2**n in ceil(log2(k)) levels; an odd item
    passes through its level. Each level's additions are coalesced into
    shared launches. Equals the left fold (addition mod 2**n is
    associative and commutative). Level count is visible through the
    engine pool's level_counter()."""
    vs = list(vs)
    if not vs:
        raise ValueError("cannot accumulate an empty sequence")
    engine, _ = _common_engine(vs, vs)
    result = engine.pool.parallel_reduce([[v] for v in vs], level_combine=_level_add)
    return result[0]


def _mul_lanes(xs: Sequence[EncryptedInt], ys: Sequence[EncryptedInt]) -> list:
    """Shift-and-add products over parallel lanes at width 2n.

    All ell * n * n partial-product AND gates go out as one coalesced
    batch; the n partial products of every lane are then tree-summed with
    the levels of all lanes sharing launches."""
    engine, n = _common_engine(xs, ys)
    ell = len(xs)
    wide = 2 * n
    zero = engine.trivial_bit(0)

    lefts = []
    rights = []
    for x, y in zip(xs, ys):
        for j in range(n):
            y_j = y.bits[j]
            for i in range(n):
                lefts.append(x.bits[i])
                rights.append(y_j)
    ands = engine.eval_gate_batch(GateKind.AND, lefts, rights)

    # columns[j] = the j-th shifted partial product of every lane.
    columns = []
    for j in range(n):
        column = []
        for lane in range(ell):
            base = lane * n * n + j * n
            bits = [zero] * j + ands[base : base + n] + [zero] * (n - j)
            column.append(EncryptedInt(engine, bits[:wide]))
        columns.append(column)
    if n == 1:
        return columns[0]
    return engine.pool.parallel_reduce(columns, level_combine=_level_add)


def mul_naive(x: EncryptedInt, y: EncryptedInt) -> EncryptedInt:
    """Shift-and-add product of the operands' n-bit patterns, exact at
    width 2n. Decryption applies the signed reading at 2n."""
    return _mul_lanes([x], [y])[0]


def mul_karatsuba(x: EncryptedInt, y: EncryptedInt, min_width: int = KARATSUBA_MIN_WIDTH) -> EncryptedInt:
    """Single-level Karatsuba product at width 2n.

    Splits each operand into halves of h = n/2 bits, forms the half sums
    with one two-lane vector addition, computes the three sub-products
    (low, high, sum) with one three-lane vector multiplication, and
    recombines as z0 + (z2 - z1 - z0) * 2**h + z1 * 2**n, the subtractions
    done by two's-complement negation at uniform 2n-bit lanes. Widths that
    are not a power of two, or are below min_width, fall through to
    mul_naive. Bit-for-bit equal to mul_naive.
    """
    engine, n = _common_engine([x], [y])
    if n < min_width or n & (n - 1):
        return mul_naive(x, y)
    h = n // 2
    wide = 2 * n

    x0 = zero_extend(truncate(x, h), h + 1)
    x1 = zero_extend(EncryptedInt(engine, x.bits[h:]), h + 1)
    y0 = zero_extend(truncate(y, h), h + 1)
    y1 = zero_extend(EncryptedInt(engine, y.bits[h:]), h + 1)

    sum_x, sum_y = _add_lanes([x0, y0], [x1, y1])
    z0, z1, z2 = _mul_lanes([x0, x1, sum_x], [y0, y1, sum_y])

    z0w = zero_extend(z0, wide)
    z1w = zero_extend(z1, wide)
    z2w = zero_extend(z2, wide)
    cross = add_bitwise(add_bitwise(z2w, negate(z1w)), negate(z0w))
    out = add_bitwise(z0w, shift_left(cross, h, width=wide))
    return add_bitwise(out, shift_left(z1w, 2 * h, width=wide))
