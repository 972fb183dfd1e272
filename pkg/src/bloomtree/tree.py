"""Bloom tree: the filter chunked, index-salted, and committed under a
Merkle root.

A presence proof ships the chunks an element's bits land in plus one
multiproof; it can only ever show that the element *might* have been
inserted. An absence proof ships a single chunk in which a required bit is
zero plus an ordinary sibling path; it shows the element definitely was
never inserted. Each chunk is hashed together with its index, so a valid
proof for one chunk can never be passed off as a proof for another.
"""

import enum
import hashlib
from dataclasses import dataclass

from .bloom import BloomFilter, BloomParams, indices
from .merkle import (
    DIGEST_SIZE,
    Digest,
    MerkleTree,
    build_tree,
    prove_multi,
    prove_single,
    verify_multi,
    verify_single,
)

_LEAF_PREFIX = b"\x00"


def leaf_hash(chunk_index: int, chunk: bytes) -> Digest:
    """Digest of a chunk salted with its index.

    SHA-256(0x00 || chunk_index as 8-byte little-endian || chunk). The index
    salt is what makes chunk substitution detectable; the 0x00 prefix keeps
    leaf preimages disjoint from internal-node preimages.
    """
    return hashlib.sha256(_LEAF_PREFIX + chunk_index.to_bytes(8, "little") + bytes(chunk)).digest()


def locate(bit_index: int, params: BloomParams) -> tuple[int, int]:
    """Map a global bit index to (chunk_index, bit index within the chunk).

    All indexing is 0-based, globally and locally.
    """
    return divmod(bit_index, params.chunk_bits)


class VerdictKind(enum.Enum):
    MAYBE_PRESENT = "MaybePresent"
    DEFINITELY_ABSENT = "DefinitelyAbsent"
    INVALID = "Invalid"


@dataclass(frozen=True)
class Verdict:
    """Three-valued verification outcome.

    MAYBE_PRESENT only ever comes from a valid presence proof,
    DEFINITELY_ABSENT only from a valid absence proof; everything else is
    INVALID with a reason.
    """

    kind: VerdictKind
    reason: str | None = None

    @classmethod
    def maybe_present(cls) -> "Verdict":
        return cls(VerdictKind.MAYBE_PRESENT)

    @classmethod
    def definitely_absent(cls) -> "Verdict":
        return cls(VerdictKind.DEFINITELY_ABSENT)

    @classmethod
    def invalid(cls, reason: str) -> "Verdict":
        return cls(VerdictKind.INVALID, reason)

    @property
    def is_valid(self) -> bool:
        return self.kind is not VerdictKind.INVALID

    def __str__(self) -> str:
        if self.kind is VerdictKind.INVALID and self.reason:
            return f"{self.kind.value}: {self.reason}"
        return self.kind.value


@dataclass(frozen=True)
class PresenceProof:
    """Chunks covering all k bits of an element, plus one multiproof.

    chunk_indices is strictly increasing with at most k entries; chunks are
    the corresponding raw chunk bytes.
    """

    chunk_indices: tuple[int, ...]
    chunks: tuple[bytes, ...]
    multiproof: tuple[Digest, ...]


@dataclass(frozen=True)
class AbsenceProof:
    """One chunk holding a zero at a required bit, plus its sibling path."""

    chunk_index: int
    chunk: bytes
    path: tuple[Digest, ...]


@dataclass(frozen=True)
class BloomTree:
    """A Bloom filter plus the Merkle tree over its index-salted chunks.

    Immutable once built; prove() is pure with respect to it. Rebuild after
    any further inserts into the filter.
    """

    filter: BloomFilter
    tree: MerkleTree
    root: Digest


def build(filt: BloomFilter) -> BloomTree:
    """Chunk the filter, hash each chunk with its index, and build the tree.

    The root is a pure function of (params, filter bytes).
    """
    leaves = [leaf_hash(i, filt.chunk(i)) for i in range(filt.params.chunk_count)]
    tree = build_tree(leaves)
    return BloomTree(filter=filt, tree=tree, root=tree.root)


def prove(bloom_tree: BloomTree, element: bytes) -> PresenceProof | AbsenceProof:
    """Produce the one proof the element admits.

    If every bit the element maps to is set, a presence proof over the
    deduplicated, sorted chunk set; otherwise an absence proof for the
    lowest-indexed chunk holding a zero at a required bit (a canonical
    tie-break, so proofs are deterministic).
    """
    filt = bloom_tree.filter
    required = _required_bits(element, filt.params)
    for chunk_index in sorted(required):
        chunk = filt.chunk(chunk_index)
        if any(not _chunk_bit(chunk, local) for local in required[chunk_index]):
            return AbsenceProof(
                chunk_index=chunk_index,
                chunk=chunk,
                path=tuple(prove_single(bloom_tree.tree, chunk_index)),
            )
    chunk_indices = sorted(required)
    chunks = tuple(filt.chunk(i) for i in chunk_indices)
    multiproof = tuple(prove_multi(bloom_tree.tree, chunk_indices))
    return PresenceProof(chunk_indices=tuple(chunk_indices), chunks=chunks, multiproof=multiproof)


def verify(
    root: Digest,
    params: BloomParams,
    element: bytes,
    proof: PresenceProof | AbsenceProof,
) -> Verdict:
    """Check a proof against a trusted root, holding nothing but (root, params).

    The verifier recomputes the element's bit positions itself; proofs carry
    no index claims about the element. Every failure returns an INVALID
    verdict with a reason, never an exception.
    """
    if not isinstance(root, (bytes, bytearray)) or len(root) != DIGEST_SIZE:
        return Verdict.invalid("root must be a 32-byte digest")
    root = bytes(root)
    required = _required_bits(element, params)
    if isinstance(proof, PresenceProof):
        return _verify_presence(root, params, required, proof)
    if isinstance(proof, AbsenceProof):
        return _verify_absence(root, params, required, proof)
    return Verdict.invalid(f"unknown proof type {type(proof).__name__}")


def _verify_presence(
    root: bytes,
    params: BloomParams,
    required: dict[int, set[int]],
    proof: PresenceProof,
) -> Verdict:
    expected = tuple(sorted(required))
    try:
        supplied = tuple(proof.chunk_indices)
        chunks = tuple(proof.chunks)
        multiproof = list(proof.multiproof)
    except TypeError:
        return Verdict.invalid("malformed presence proof fields")
    if supplied != expected:
        # Exact equality: extraneous chunks are rejected, not just missing ones.
        return Verdict.invalid("chunk indices do not match the element's chunk set")
    if len(chunks) != len(expected):
        return Verdict.invalid("chunk count does not match chunk index count")
    for chunk_index, chunk in zip(expected, chunks):
        if not isinstance(chunk, (bytes, bytearray)) or len(chunk) != params.chunk_size:
            return Verdict.invalid(f"chunk {chunk_index} is not exactly {params.chunk_size} bytes")
        for local in required[chunk_index]:
            if not _chunk_bit(chunk, local):
                return Verdict.invalid(f"required bit {local} of chunk {chunk_index} is zero")
    entries = [(chunk_index, leaf_hash(chunk_index, chunk)) for chunk_index, chunk in zip(expected, chunks)]
    if not verify_multi(root, entries, params.chunk_count, multiproof):
        return Verdict.invalid("multiproof does not reconstruct the root")
    return Verdict.maybe_present()


def _verify_absence(
    root: bytes,
    params: BloomParams,
    required: dict[int, set[int]],
    proof: AbsenceProof,
) -> Verdict:
    chunk_index = proof.chunk_index
    if isinstance(chunk_index, bool) or not isinstance(chunk_index, int):
        return Verdict.invalid("chunk index must be an integer")
    if chunk_index not in required:
        return Verdict.invalid("chunk is not one the element maps into")
    chunk = proof.chunk
    if not isinstance(chunk, (bytes, bytearray)) or len(chunk) != params.chunk_size:
        return Verdict.invalid(f"chunk is not exactly {params.chunk_size} bytes")
    if all(_chunk_bit(chunk, local) for local in required[chunk_index]):
        return Verdict.invalid("every required bit in the supplied chunk is set")
    try:
        path = list(proof.path)
    except TypeError:
        return Verdict.invalid("malformed absence proof path")
    if not verify_single(root, leaf_hash(chunk_index, chunk), chunk_index, params.chunk_count, path):
        return Verdict.invalid("path does not reconstruct the root")
    return Verdict.definitely_absent()


def _required_bits(element: bytes, params: BloomParams) -> dict[int, set[int]]:
    """chunk_index -> set of local bit indices the element needs set."""
    required: dict[int, set[int]] = {}
    for bit_index in indices(element, params):
        chunk_index, local = locate(bit_index, params)
        required.setdefault(chunk_index, set()).add(local)
    return required


def _chunk_bit(chunk: bytes, local: int) -> int:
    return (chunk[local >> 3] >> (local & 7)) & 1
