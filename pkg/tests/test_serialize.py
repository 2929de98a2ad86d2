"""Wire format roundtrips and the strictness of the loader."""

import numpy as np
import pytest

from encirc import (
    FormatError,
    LweParams,
    OracleBootstrapEngine,
    decrypt_int,
    decrypt_matrix,
    decrypt_vector,
    dump_int,
    dump_key,
    dump_matrix,
    dump_params,
    dump_sample,
    dump_vector,
    encrypt_int,
    encrypt_matrix,
    encrypt_vector,
    keygen,
    load_int,
    load_key,
    load_key_file,
    load_matrix,
    load_params,
    load_sample,
    load_vector,
    save_key,
    trivial_int,
)
from encirc.serialize import MAGIC


def test_params_roundtrip():
    p = LweParams(m=128, w=32, alpha=0.001)
    q = load_params(dump_params(p))
    assert (q.m, q.w, q.alpha, q.mu.word) == (p.m, p.w, p.alpha, p.mu.word)


def test_key_roundtrip(key):
    k2 = load_key(dump_key(key))
    assert np.array_equal(k2.bits, key.bits)
    assert k2.params.m == key.params.m
    assert k2.params.mu.word == key.params.mu.word


def test_key_file_roundtrip(key, tmp_path):
    path = str(tmp_path / "k.enc")
    save_key(path, key)
    k2 = load_key_file(path)
    assert np.array_equal(k2.bits, key.bits)


def test_key_works_after_roundtrip(key):
    eng = OracleBootstrapEngine(load_key(dump_key(key)), seed=3)
    assert eng.decrypt(eng.encrypt(1)) == 1


def test_sample_roundtrip(orc):
    c = orc.encrypt(1).sample
    d = load_sample(dump_sample(c))
    assert np.array_equal(d.a, c.a)
    assert (d.b, d.noise_bound, d.w) == (c.b, c.noise_bound, c.w)


def test_int_roundtrip(orc):
    x = encrypt_int(orc, 48813, 16)
    y = load_int(dump_int(x), orc)
    assert decrypt_int(orc, y) == 48813


def test_vector_matrix_roundtrip(orc):
    vec = encrypt_vector(orc, [5, 250, 0], 8)
    assert decrypt_vector(orc, load_vector(dump_vector(vec), orc)) == [5, 250, 0]
    mat = encrypt_matrix(orc, [[1, 2], [3, 4]], 8)
    got = load_matrix(dump_matrix(mat), orc)
    assert (got.rows, got.cols) == (2, 2)
    assert decrypt_matrix(orc, got) == [[1, 2], [3, 4]]


def test_reference_bits_refuse_to_serialize(ref):
    with pytest.raises(ValueError, match="LWE-backed"):
        dump_int(encrypt_int(ref, 7, 4))


def test_oracle_trivial_ints_serialize_fine(orc):
    # trivial samples are degenerate but real: zero mask, noiseless body
    y = load_int(dump_int(trivial_int(orc, 7, 4)), orc)
    assert decrypt_int(orc, y) == 7
    assert all(b.noise_bound == 0.0 for b in y.bits)


def test_bad_magic_rejected(orc):
    blob = bytearray(dump_int(encrypt_int(orc, 1, 4)))
    blob[0] ^= 0xFF
    with pytest.raises(FormatError):
        load_int(bytes(blob), orc)


def test_wrong_kind_rejected(orc, key):
    with pytest.raises(FormatError):
        load_int(dump_key(key), orc)
    with pytest.raises(FormatError):
        load_key(dump_params(key.params))


def test_truncated_and_trailing_rejected(orc):
    blob = dump_int(encrypt_int(orc, 1, 4))
    with pytest.raises(FormatError):
        load_int(blob[:-3], orc)
    with pytest.raises(FormatError):
        load_int(blob + b"\x00", orc)
    with pytest.raises(FormatError):
        load_int(b"", orc)
    with pytest.raises(FormatError):
        load_int(MAGIC, orc)


def test_key_bit_validation(key):
    blob = bytearray(dump_key(key))
    blob[-1] = 7  # key bits must be 0 or 1
    with pytest.raises(FormatError):
        load_key(bytes(blob))


def test_load_int_checks_engine_params(orc):
    blob = dump_int(encrypt_int(orc, 9, 4))
    other = OracleBootstrapEngine(keygen(LweParams(m=50), seed=1), seed=1)
    with pytest.raises(FormatError):
        load_int(blob, other)


def test_loaded_bits_decrypt_with_right_key_only(orc, key):
    # same params, different key: loads fine, decrypts to noise
    blob = dump_int(encrypt_int(orc, 9, 4))
    other = OracleBootstrapEngine(keygen(key.params, seed=999), seed=1)
    y = load_int(blob, other)
    assert decrypt_int(orc, load_int(blob, orc)) == 9
    # not asserting the wrong-key value: it is whatever the phases give
    decrypted_somehow = decrypt_int(other, y)
    assert 0 <= decrypted_somehow < 16
