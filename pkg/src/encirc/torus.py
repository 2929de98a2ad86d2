"""Fixed-point torus arithmetic and LWE encryption of single bits.

The real torus (reals mod 1) is represented in w-bit fixed point: the
element k / 2**w is stored as the integer word k in [0, 2**w). Addition,
negation and integer scaling are wraparound word arithmetic, so every
algebraic identity holds bit-exactly; there is no float drift anywhere in
the ciphertext path.

An LWE sample hides one bit as (a, b) with b = <a, s> + message + e over
the torus, where message is +mu for bit 1 and -mu for bit 0, s is a binary
secret of length m, and e is small Gaussian noise. The phase b - <a, s>
recovers message + e; the bit is read from which half of the torus the
phase lands in. Every sample carries noise_bound, an exclusive bound on
|e| in torus units, so an unreliable decryption is refused instead of
silently guessed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_M = 500
DEFAULT_ALPHA = 2.0**-15
DEFAULT_W = 32


class DecryptionUnreliableError(Exception):
    """The sample's noise bound no longer guarantees a correct read."""


def word_dtype(w: int) -> np.dtype:
    """Unsigned dtype whose natural wraparound is exact mod 2**w.

    2**w divides the dtype modulus for every w up to the word size, so
    overflow during adds, scalings and dot products never corrupts the
    value mod 2**w; a final mask recovers the canonical word.
    """
    return np.dtype(np.uint32) if w <= 32 else np.dtype(np.uint64)


@dataclass(frozen=True, slots=True)
class TorusElement:
    """One torus point k / 2**w stored as the word k in [0, 2**w).

    EXAMPLE::

        >>> x = TorusElement.from_fraction(1, 8)
        >>> (x + x + x).to_float()
        0.375
        >>> (-x).to_float()
        0.875
        >>> (5 * x).signed()
        -0.375
    """

    word: int
    w: int = DEFAULT_W

    def __post_init__(self) -> None:
        if not 1 <= self.w <= 64:
            raise ValueError(f"torus precision w={self.w} outside [1, 64]")
        object.__setattr__(self, "word", int(self.word) & ((1 << self.w) - 1))

    @classmethod
    def from_fraction(cls, num: int, den: int, w: int = DEFAULT_W) -> "TorusElement":
        if den <= 0:
            raise ValueError("denominator must be positive")
        # round half up; floor division keeps this exact for either sign
        scaled = (2 * num * (1 << w) + den) // (2 * den)
        return cls(scaled, w)

    @classmethod
    def from_float(cls, value: float, w: int = DEFAULT_W) -> "TorusElement":
        frac = value - np.floor(value)
        return cls(int(round(frac * (1 << w))), w)

    def to_float(self) -> float:
        """Representative in [0, 1)."""
        return self.word / (1 << self.w)

    def signed(self) -> float:
        """Representative in (-1/2, 1/2]."""
        half = 1 << (self.w - 1)
        if self.word <= half:
            return self.word / (1 << self.w)
        return (self.word - (1 << self.w)) / (1 << self.w)

    def _check(self, other: "TorusElement") -> None:
        if self.w != other.w:
            raise ValueError(f"mixed torus precisions {self.w} and {other.w}")

    def __add__(self, other: "TorusElement") -> "TorusElement":
        self._check(other)
        return TorusElement(self.word + other.word, self.w)

    def __sub__(self, other: "TorusElement") -> "TorusElement":
        self._check(other)
        return TorusElement(self.word - other.word, self.w)

    def __neg__(self) -> "TorusElement":
        return TorusElement(-self.word, self.w)

    def __mul__(self, k: int) -> "TorusElement":
        # The torus is a Z-module: only integer scaling is defined.
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return TorusElement(self.word * int(k), self.w)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"TorusElement({self.word}/2^{self.w})"


@dataclass(frozen=True)
class LweParams:
    """LWE dimension m, noise stddev alpha, torus precision w, encoding mu.

    mu defaults to 1/8: bit 1 encodes as +1/8, bit 0 as -1/8. Fresh noise
    is clamped strictly below mu/4, so a fresh sample always decrypts and
    two-input gate combinations keep a positive decision margin.
    """

    m: int = DEFAULT_M
    alpha: float = DEFAULT_ALPHA
    w: int = DEFAULT_W
    mu: TorusElement | None = None

    def __post_init__(self) -> None:
        if self.mu is None:
            object.__setattr__(self, "mu", TorusElement.from_fraction(1, 8, self.w))
        elif not isinstance(self.mu, TorusElement):
            # accept a Fraction (or anything with numerator/denominator)
            object.__setattr__(
                self,
                "mu",
                TorusElement.from_fraction(self.mu.numerator, self.mu.denominator, self.w),
            )
        if self.m < 1:
            raise ValueError(f"LWE dimension m={self.m} must be >= 1")
        if not 3 <= self.w <= 64:
            raise ValueError(f"torus precision w={self.w} outside [3, 64]")
        if self.mu.w != self.w:
            raise ValueError("mu precision does not match params.w")
        mu = self.mu.to_float()
        if not 0.0 < mu < 0.5:
            raise ValueError(f"mu={mu} must lie strictly inside (0, 1/2)")
        if not 0.0 <= self.alpha < mu / 4:
            raise ValueError(
                f"alpha={self.alpha} must satisfy 0 <= alpha < mu/4 = {mu / 4}"
            )

    @property
    def dtype(self) -> np.dtype:
        return word_dtype(self.w)

    @property
    def modulus(self) -> int:
        return 1 << self.w

    @property
    def mask(self) -> int:
        return (1 << self.w) - 1

    @property
    def half_word(self) -> int:
        return 1 << (self.w - 1)

    @property
    def mu_float(self) -> float:
        return self.mu.to_float()

    @property
    def fresh_clamp_word(self) -> int:
        """Fresh-noise clamp in words: mu/4 on the fixed-point grid."""
        return max(self.mu.word // 4, 1)

    @property
    def fresh_noise_bound(self) -> float:
        """Exclusive |e| bound carried by every fresh or bootstrapped sample."""
        return self.fresh_clamp_word / self.modulus

    def message_word(self, bit: int) -> int:
        return self.mu.word if bit else (self.modulus - self.mu.word) & self.mask


class LweSample:
    """One encrypted bit: mask vector a, body b, tracked noise bound.

    a is a length-m array of torus words (dtype per word_dtype), b a single
    torus word, noise_bound an exclusive float bound on |e| in torus units.
    """

    __slots__ = ("a", "b", "noise_bound", "w")

    def __init__(self, a: np.ndarray, b: int, noise_bound: float, w: int):
        self.a = a
        self.b = int(b) & ((1 << w) - 1)
        self.noise_bound = float(noise_bound)
        self.w = int(w)

    def __repr__(self) -> str:
        return (
            f"LweSample(m={len(self.a)}, b={self.b}/2^{self.w}, "
            f"noise_bound={self.noise_bound:.3g})"
        )


@dataclass(frozen=True, eq=False)
class SecretKey:
    """Binary LWE secret of length params.m, stored in the torus word dtype."""

    params: LweParams
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.shape != (self.params.m,):
            raise ValueError(
                f"key length {self.bits.shape} does not match m={self.params.m}"
            )


def keygen(params: LweParams, seed) -> SecretKey:
    """Sample a uniform binary secret. Same (params, seed) -> same key."""
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=params.m).astype(params.dtype)
    return SecretKey(params, bits)


def uniform_words(params: LweParams, rng: np.random.Generator, size) -> np.ndarray:
    """Uniform torus words in [0, 2**w) in the params word dtype."""
    if params.w <= 32:
        return rng.integers(0, params.modulus, size=size, dtype=np.uint32)
    return rng.integers(0, params.modulus, size=size, dtype=np.uint64)


def gaussian_noise_words(params: LweParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Fresh-noise words: Gaussian(alpha) on the grid, clipped strictly
    inside the fresh clamp so |e| < fresh_noise_bound always holds."""
    dt = params.dtype
    limit = params.fresh_clamp_word - 1
    if params.alpha == 0.0 or limit <= 0:
        return np.zeros(size, dtype=dt)
    e = rng.normal(0.0, params.alpha, size=size)
    scaled = np.clip(np.rint(e * float(params.modulus)), -limit, limit).astype(np.int64)
    mag = np.abs(scaled).astype(dt)
    words = np.where(scaled < 0, -mag, mag)
    return words & dt.type(params.mask)


def encrypt_bit(key: SecretKey, bit: int, rng: np.random.Generator) -> LweSample:
    """Encrypt one bit under an explicit generator.

    EXAMPLE::

        >>> params = LweParams(m=8, alpha=0.0)
        >>> key = keygen(params, seed=42)
        >>> c = encrypt_bit(key, 0, np.random.default_rng(42))
        >>> phase(key, c) == -params.mu  # zero noise: phase is exact
        True
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    p = key.params
    a = uniform_words(p, rng, p.m)
    e_word = int(gaussian_noise_words(p, rng, 1)[0])
    body = (int(a @ key.bits) + p.message_word(bit) + e_word) & p.mask
    return LweSample(a, body, p.fresh_noise_bound, p.w)


def trivial_sample(params: LweParams, bit: int) -> LweSample:
    """Noiseless constant: zero mask, body = message. Decrypts to `bit`
    under any key of matching dimension; noise_bound is exactly 0."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    a = np.zeros(params.m, dtype=params.dtype)
    return LweSample(a, params.message_word(bit), 0.0, params.w)


def phase(key: SecretKey, c: LweSample) -> TorusElement:
    """b - <a, s>: the encoded message plus noise."""
    p = key.params
    if c.w != p.w or c.a.shape != (p.m,):
        raise ValueError("sample dimensions do not match key parameters")
    return TorusElement(int(c.b) - int(c.a @ key.bits), p.w)


def decrypt_bit(key: SecretKey, c: LweSample) -> int:
    """Read the bit from the phase sign: 1 on (0, 1/2), else 0.

    Ties at exactly 0 or 1/2 decode to 0. Refuses (raises
    DecryptionUnreliableError) when noise_bound >= mu/2 rather than
    returning a guess.
    """
    p = key.params
    if c.noise_bound >= p.mu_float / 2:
        raise DecryptionUnreliableError(
            f"noise_bound {c.noise_bound:.3g} >= mu/2 = {p.mu_float / 2:.3g}"
        )
    ph = phase(key, c).word
    return 1 if 0 < ph < p.half_word else 0


def lwe_linear(
    samples: Sequence[LweSample],
    coeffs: Sequence[int],
    offset: TorusElement | None = None,
) -> LweSample:
    """Integer linear combination sum(k_i * c_i) + offset.

    Exact on the torus grid; noise_bound becomes sum(|k_i| * bound_i), the
    offset being noiseless. The combination is not re-randomized: callers
    bootstrap the result before further use.

    EXAMPLE::

        >>> params = LweParams(m=8)
        >>> key = keygen(params, seed=1)
        >>> c = encrypt_bit(key, 1, np.random.default_rng(7))
        >>> z = lwe_linear([c, c], [1, -1])
        >>> phase(key, z).word, z.noise_bound == 2 * c.noise_bound
        (0, True)
    """
    if len(samples) == 0 or len(samples) != len(coeffs):
        raise ValueError("need equally many samples and coefficients, at least one")
    w = samples[0].w
    m = len(samples[0].a)
    dt = word_dtype(w)
    mask = (1 << w) - 1
    acc_a = np.zeros(m, dtype=dt)
    acc_b = 0
    bound = 0.0
    for c, k in zip(samples, coeffs):
        if c.w != w or len(c.a) != m:
            raise ValueError("mixed sample dimensions in linear combination")
        k = int(k)
        k_word = dt.type(k & mask)
        acc_a += k_word * c.a
        acc_b += k * c.b
        bound += abs(k) * c.noise_bound
    if offset is not None:
        if offset.w != w:
            raise ValueError("offset precision does not match samples")
        acc_b += offset.word
    return LweSample(acc_a & dt.type(mask), acc_b & mask, bound, w)
