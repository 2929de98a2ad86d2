"""Encrypted boolean circuits over torus LWE bits.

The package models gate bootstrapping: every two-input gate is one linear
combination of ciphertexts followed by a bootstrap that refreshes noise.
Two interchangeable engines run the circuits; the reference engine works
on cleartext bits while mirroring all costs, and the oracle engine keeps
real LWE samples, standing in for a production bootstrapping key with a
decrypt-re-encrypt oracle. Neither engine is a secure implementation.
"""

from .datasets import (
    KIND_BINARY,
    KIND_NUMERICAL,
    KINDS,
    Dataset,
    DatasetFormatError,
    read_csv,
    synthesize,
    to_csv_text,
    write_csv,
)
from .engine import (
    BootstrapMarginError,
    EncBit,
    GateEngine,
    GateKind,
    GateStats,
    OracleBootstrapEngine,
    ReferenceEngine,
    truth_table,
)
from .integers import (
    KARATSUBA_MIN_WIDTH,
    EncryptedInt,
    accumulate_tree,
    add_bitwise,
    add_numberwise,
    as_signed,
    complement,
    decrypt_int,
    encrypt_int,
    mul_karatsuba,
    mul_naive,
    negate,
    shift_left,
    trivial_int,
    truncate,
    zero_extend,
)
from .linalg import (
    DEFAULT_FLAT_JOB_CEILING,
    EncryptedIntVector,
    EncryptedMatrix,
    FlatLaunchTooLarge,
    decrypt_matrix,
    decrypt_vector,
    encrypt_matrix,
    encrypt_vector,
    mat_add,
    mat_mul_cannon,
    mat_mul_flat,
    vec_add,
    vec_mul,
)
from .regression import (
    DEFAULT_BITS,
    RegressionReport,
    SingularSystemError,
    VerificationError,
    fit_encrypted,
    solve_exact,
)
from .scheduler import DEFAULT_MAX_BATCH, PARALLEL_BLOCK, JobBatch, PoolConfig, WorkerPool
from .serialize import (
    FormatError,
    dump_int,
    dump_key,
    dump_matrix,
    dump_params,
    dump_sample,
    dump_vector,
    load_int,
    load_key,
    load_key_file,
    load_matrix,
    load_params,
    load_sample,
    load_vector,
    save_key,
)
from .torus import (
    DEFAULT_ALPHA,
    DEFAULT_M,
    DEFAULT_W,
    DecryptionUnreliableError,
    LweParams,
    LweSample,
    SecretKey,
    TorusElement,
    decrypt_bit,
    encrypt_bit,
    keygen,
    phase,
    trivial_sample,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapMarginError",
    "DEFAULT_ALPHA",
    "DEFAULT_BITS",
    "DEFAULT_FLAT_JOB_CEILING",
    "DEFAULT_M",
    "DEFAULT_MAX_BATCH",
    "DEFAULT_W",
    "Dataset",
    "DatasetFormatError",
    "DecryptionUnreliableError",
    "EncBit",
    "EncryptedInt",
    "EncryptedIntVector",
    "EncryptedMatrix",
    "FlatLaunchTooLarge",
    "FormatError",
    "GateEngine",
    "GateKind",
    "GateStats",
    "JobBatch",
    "KARATSUBA_MIN_WIDTH",
    "KINDS",
    "KIND_BINARY",
    "KIND_NUMERICAL",
    "LweParams",
    "LweSample",
    "OracleBootstrapEngine",
    "PARALLEL_BLOCK",
    "PoolConfig",
    "ReferenceEngine",
    "RegressionReport",
    "SecretKey",
    "SingularSystemError",
    "TorusElement",
    "VerificationError",
    "WorkerPool",
    "accumulate_tree",
    "add_bitwise",
    "add_numberwise",
    "as_signed",
    "complement",
    "decrypt_bit",
    "decrypt_int",
    "decrypt_matrix",
    "decrypt_vector",
    "dump_int",
    "dump_key",
    "dump_matrix",
    "dump_params",
    "dump_sample",
    "dump_vector",
    "encrypt_bit",
    "encrypt_int",
    "encrypt_matrix",
    "encrypt_vector",
    "fit_encrypted",
    "keygen",
    "load_int",
    "load_key",
    "load_key_file",
    "load_matrix",
    "load_params",
    "load_sample",
    "load_vector",
    "mat_add",
    "mat_mul_cannon",
    "mat_mul_flat",
    "mul_karatsuba",
    "mul_naive",
    "negate",
    "phase",
    "read_csv",
    "save_key",
    "shift_left",
    "solve_exact",
    "synthesize",
    "to_csv_text",
    "trivial_int",
    "trivial_sample",
    "truncate",
    "truth_table",
    "vec_add",
    "vec_mul",
    "write_csv",
    "zero_extend",
]
