"""Canonical byte formats for keys, parameters and ciphertexts.

Every stream starts with the 4-byte magic header b"ENC" + version byte
(currently 1), followed by a kind byte naming the payload. All integers
are little-endian; torus words are always serialized as 8-byte words
regardless of the in-memory dtype; sequences are length-prefixed.

    params  'P'  u32 m | u8 w | f64 alpha | u64 mu_word
    key     'K'  params body | u32 count | count key bits, one byte each
    sample  'S'  u8 w | u32 m | m x u64 mask words | u64 body | f64 bound
    int     'I'  u32 width | width samples (bodies only, no inner header)
    vector  'V'  u32 length | length int bodies
    matrix  'M'  u32 rows | u32 cols | rows*cols int bodies, row-major
"""

from __future__ import annotations

import struct

import numpy as np

from .engine import EncBit, OracleBootstrapEngine
from .integers import EncryptedInt
from .linalg import EncryptedIntVector, EncryptedMatrix
from .torus import LweParams, LweSample, SecretKey, TorusElement, word_dtype

MAGIC = b"ENC\x01"

_KIND_PARAMS = b"P"
_KIND_KEY = b"K"
_KIND_SAMPLE = b"S"
_KIND_INT = b"I"
_KIND_VECTOR = b"V"
_KIND_MATRIX = b"M"


class FormatError(ValueError):
    """Malformed or wrong-kind serialized payload."""


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise FormatError("truncated payload")
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack("<" + fmt, self.take(struct.calcsize("<" + fmt)))

    def done(self) -> None:
        if self.pos != len(self.data):
            raise FormatError(f"{len(self.data) - self.pos} trailing bytes")


def _header(kind: bytes) -> bytes:
    return MAGIC + kind


def _read_header(r: _Reader, kind: bytes) -> None:
    magic = r.take(4)
    if magic != MAGIC:
        raise FormatError(f"bad magic/version {magic!r}, expected {MAGIC!r}")
    got = r.take(1)
    if got != kind:
        raise FormatError(f"payload kind {got!r}, expected {kind!r}")


# -- params -------------------------------------------------------------------


def _params_body(params: LweParams) -> bytes:
    return struct.pack("<IBdQ", params.m, params.w, params.alpha, params.mu.word)


def _read_params_body(r: _Reader) -> LweParams:
    m, w, alpha, mu_word = r.unpack("IBdQ")
    return LweParams(m=m, alpha=alpha, w=w, mu=TorusElement(mu_word, w))


def dump_params(params: LweParams) -> bytes:
    return _header(_KIND_PARAMS) + _params_body(params)


def load_params(data: bytes) -> LweParams:
    r = _Reader(data)
    _read_header(r, _KIND_PARAMS)
    params = _read_params_body(r)
    r.done()
    return params


# -- secret key ---------------------------------------------------------------


def dump_key(key: SecretKey) -> bytes:
    bits = np.asarray(key.bits, dtype=np.uint8).tobytes()
    return _header(_KIND_KEY) + _params_body(key.params) + struct.pack("<I", len(bits)) + bits


def load_key(data: bytes) -> SecretKey:
    r = _Reader(data)
    _read_header(r, _KIND_KEY)
    params = _read_params_body(r)
    (count,) = r.unpack("I")
    if count != params.m:
        raise FormatError(f"key length {count} does not match m={params.m}")
    raw = np.frombuffer(r.take(count), dtype=np.uint8)
    if raw.max(initial=0) > 1:
        raise FormatError("key bits must be 0 or 1")
    r.done()
    return SecretKey(params, raw.astype(params.dtype))


def save_key(path: str, key: SecretKey) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_key(key))


def load_key_file(path: str) -> SecretKey:
    with open(path, "rb") as fh:
        return load_key(fh.read())


# -- samples ------------------------------------------------------------------


def _sample_body(c: LweSample) -> bytes:
    words = np.asarray(c.a, dtype=np.uint64).astype("<u8").tobytes()
    return (
        struct.pack("<BI", c.w, len(c.a))
        + words
        + struct.pack("<Qd", c.b, c.noise_bound)
    )


def _read_sample_body(r: _Reader) -> LweSample:
    w, m = r.unpack("BI")
    if not 1 <= w <= 64:
        raise FormatError(f"bad torus precision {w}")
    words = np.frombuffer(r.take(8 * m), dtype="<u8")
    mask = (1 << w) - 1
    if m and int(words.max()) > mask:
        raise FormatError("mask word exceeds torus modulus")
    b, bound = r.unpack("Qd")
    return LweSample(words.astype(word_dtype(w)), b, bound, w)


def dump_sample(c: LweSample) -> bytes:
    return _header(_KIND_SAMPLE) + _sample_body(c)


def load_sample(data: bytes) -> LweSample:
    r = _Reader(data)
    _read_header(r, _KIND_SAMPLE)
    c = _read_sample_body(r)
    r.done()
    return c


# -- encrypted integers / vectors / matrices ----------------------------------


def _int_body(x: EncryptedInt) -> bytes:
    chunks = [struct.pack("<I", x.width)]
    for bit in x.bits:
        if bit.sample is None:
            raise ValueError("only LWE-backed integers can be serialized")
        chunks.append(_sample_body(bit.sample))
    return b"".join(chunks)


def _read_int_body(r: _Reader, engine: OracleBootstrapEngine) -> EncryptedInt:
    (width,) = r.unpack("I")
    if width < 1:
        raise FormatError("integer width must be >= 1")
    bits = []
    p = engine.params
    for _ in range(width):
        c = _read_sample_body(r)
        if c.w != p.w or len(c.a) != p.m:
            raise FormatError("sample dimensions do not match the engine parameters")
        bits.append(EncBit(engine, sample=c))
    return EncryptedInt(engine, bits)


def dump_int(x: EncryptedInt) -> bytes:
    return _header(_KIND_INT) + _int_body(x)


def load_int(data: bytes, engine: OracleBootstrapEngine) -> EncryptedInt:
    r = _Reader(data)
    _read_header(r, _KIND_INT)
    x = _read_int_body(r, engine)
    r.done()
    return x


def dump_vector(vec: EncryptedIntVector) -> bytes:
    chunks = [_header(_KIND_VECTOR), struct.pack("<I", len(vec))]
    chunks.extend(_int_body(v) for v in vec.items)
    return b"".join(chunks)


def load_vector(data: bytes, engine: OracleBootstrapEngine) -> EncryptedIntVector:
    r = _Reader(data)
    _read_header(r, _KIND_VECTOR)
    (length,) = r.unpack("I")
    items = [_read_int_body(r, engine) for _ in range(length)]
    r.done()
    return EncryptedIntVector(items)


def dump_matrix(mat: EncryptedMatrix) -> bytes:
    chunks = [_header(_KIND_MATRIX), struct.pack("<II", mat.rows, mat.cols)]
    chunks.extend(_int_body(v) for v in mat.data)
    return b"".join(chunks)


def load_matrix(data: bytes, engine: OracleBootstrapEngine) -> EncryptedMatrix:
    r = _Reader(data)
    _read_header(r, _KIND_MATRIX)
    rows, cols = r.unpack("II")
    data_items = [_read_int_body(r, engine) for _ in range(rows * cols)]
    r.done()
    return EncryptedMatrix(rows, cols, data_items)
