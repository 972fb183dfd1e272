"""Bloom tree: a Bloom filter chunked and committed under a Merkle root.

Instead of shipping the whole filter to answer one membership query, a
prover sends a compact presence proof (the touched chunks plus one Merkle
multiproof, verdict "might be in the set") or an absence proof (one chunk
with a zero at a required bit plus a single Merkle path, verdict
"definitely not in the set").
"""

from .bloom import BloomFilter, BloomParams, derive_params, fpr, indices
from .codec import (
    BadMagic,
    CodecError,
    InvalidField,
    RootMismatch,
    TrailingBytes,
    TruncatedPayload,
    UnsupportedVersion,
    decode_filter,
    decode_proof,
    encode_filter,
    encode_proof,
)
from .experiment import ExperimentConfig, ExperimentRow, run_cell, run_grid
from .merkle import (
    DIGEST_SIZE,
    MerkleTree,
    build_tree,
    node_hash,
    prove_multi,
    prove_single,
    verify_multi,
    verify_single,
)
from .tree import (
    AbsenceProof,
    BloomTree,
    PresenceProof,
    Verdict,
    VerdictKind,
    build,
    leaf_hash,
    locate,
    prove,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "AbsenceProof",
    "BadMagic",
    "BloomFilter",
    "BloomParams",
    "BloomTree",
    "CodecError",
    "DIGEST_SIZE",
    "ExperimentConfig",
    "ExperimentRow",
    "InvalidField",
    "MerkleTree",
    "PresenceProof",
    "RootMismatch",
    "TrailingBytes",
    "TruncatedPayload",
    "UnsupportedVersion",
    "Verdict",
    "VerdictKind",
    "build",
    "build_tree",
    "decode_filter",
    "decode_proof",
    "derive_params",
    "encode_filter",
    "encode_proof",
    "fpr",
    "indices",
    "leaf_hash",
    "locate",
    "node_hash",
    "prove",
    "prove_multi",
    "prove_single",
    "run_cell",
    "run_grid",
    "verify",
    "verify_multi",
    "verify_single",
]
