import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bloomtree.bloom import BloomFilter, BloomParams, indices
from bloomtree.merkle import build_tree
from bloomtree.tree import (
    AbsenceProof,
    PresenceProof,
    Verdict,
    VerdictKind,
    build,
    leaf_hash,
    locate,
    prove,
    verify,
)

# Matching 32-byte-chunk geometry used throughout: 256 bits per chunk.
PARAMS_32 = BloomParams(m=131072, k=9, chunk_size=32)
SMALL = BloomParams(m=512, k=5, chunk_size=8)  # 8 chunks of 64 bits

# Computed once with a standalone SHA-256 tool over 0x00 || LE64(index) || chunk.
LEAF_GOLDEN_3 = "55582a711412846389df2d591343bc3955ed64ca33c2f7a0d3b47204586e2299"
LEAF_GOLDEN_5 = "80f119a4e48dcd18c2cb130805df124c8bf2aba16e466985ca82a71ca0081fb9"


def populated_tree(params=SMALL, count=None, seed=1):
    rng = random.Random(seed)
    count = count if count is not None else max(4, params.m // 64)
    inserted = []
    seen = set()
    filt = BloomFilter(params)
    while len(inserted) < count:
        element = rng.randbytes(12)
        if element in seen:
            continue
        seen.add(element)
        inserted.append(element)
        filt.insert(element)
    return build(filt), inserted, rng


class TestLeafHash:
    def test_golden_vectors(self):
        chunk = bytes.fromhex("deadbeef00112233")
        assert leaf_hash(3, chunk).hex() == LEAF_GOLDEN_3
        assert leaf_hash(5, chunk).hex() == LEAF_GOLDEN_5

    def test_index_salting_separates_equal_chunks(self):
        chunk = b"\xaa" * 8
        assert leaf_hash(0, chunk) != leaf_hash(1, chunk)

    def test_output_length(self):
        assert len(leaf_hash(0, b"")) == 32


class TestLocate:
    @pytest.mark.parametrize(
        "bit_index,expected",
        [(800, (3, 32)), (1602, (6, 66)), (3650, (14, 66)), (0, (0, 0)), (255, (0, 255)), (256, (1, 0))],
    )
    def test_32_byte_chunks(self, bit_index, expected):
        assert locate(bit_index, PARAMS_32) == expected

    def test_roundtrip(self):
        chunk_index, local = locate(5000, SMALL)
        assert chunk_index * SMALL.chunk_bits + local == 5000


class TestBuild:
    def test_identical_filters_share_a_root(self):
        one, _, _ = populated_tree(seed=5)
        two, _, _ = populated_tree(seed=5)
        assert one.root == two.root

    def test_any_bit_flip_changes_the_root(self):
        bloom_tree, _, rng = populated_tree(seed=6)
        baseline = bloom_tree.root
        for _ in range(50):
            mutated = bytearray(bloom_tree.filter.bits)
            bit = rng.randrange(SMALL.m)
            mutated[bit >> 3] ^= 1 << (bit & 7)
            assert build(BloomFilter(SMALL, mutated)).root != baseline

    def test_single_chunk_root_is_the_salted_chunk_hash(self):
        params = BloomParams(m=64, k=2, chunk_size=8)
        filt = BloomFilter(params)
        filt.insert(b"lonely")
        assert build(filt).root == leaf_hash(0, bytes(filt.bits))

    def test_root_matches_hand_built_tree(self):
        bloom_tree, _, _ = populated_tree(seed=7)
        leaves = [leaf_hash(i, bloom_tree.filter.chunk(i)) for i in range(SMALL.chunk_count)]
        assert bloom_tree.root == build_tree(leaves).root


class TestProve:
    def test_inserted_element_gets_presence(self):
        bloom_tree, inserted, _ = populated_tree(seed=8)
        proof = prove(bloom_tree, inserted[0])
        assert isinstance(proof, PresenceProof)
        assert list(proof.chunk_indices) == sorted(set(proof.chunk_indices))
        assert len(proof.chunk_indices) <= SMALL.k

    def test_empty_filter_gives_lowest_chunk_absence(self):
        filt = BloomFilter(SMALL)
        bloom_tree = build(filt)
        element = b"never inserted"
        proof = prove(bloom_tree, element)
        assert isinstance(proof, AbsenceProof)
        lowest = min(locate(i, SMALL)[0] for i in indices(element, SMALL))
        assert proof.chunk_index == lowest
        assert proof.chunk == bytes(SMALL.chunk_size)
        assert len(proof.path) == SMALL.depth

    def test_absence_picks_lowest_zero_bearing_chunk(self):
        # Saturate the filter, then clear one required bit in each of the two
        # lowest chunks the element touches; the proof must name the lower.
        element = b"tie-break probe 4"
        by_chunk = {}
        for bit in indices(element, SMALL):
            chunk_index, local = locate(bit, SMALL)
            by_chunk.setdefault(chunk_index, []).append(bit)
        assert len(by_chunk) >= 2, "probe element must span two chunks"
        low, second = sorted(by_chunk)[:2]
        bits = bytearray(b"\xff" * SMALL.byte_length)
        for chunk_index in (low, second):
            bit = by_chunk[chunk_index][0]
            bits[bit >> 3] ^= 1 << (bit & 7)
        bloom_tree = build(BloomFilter(SMALL, bits))
        proof = prove(bloom_tree, element)
        assert isinstance(proof, AbsenceProof)
        assert proof.chunk_index == low

    def test_single_chunk_presence_matches_single_proof_size(self):
        # Find an element whose k indices all fall into one chunk.
        params = BloomParams(m=512, k=2, chunk_size=8)
        found = None
        for attempt in range(10_000):
            element = b"single-chunk-%d" % attempt
            chunk_set = {locate(i, params)[0] for i in indices(element, params)}
            if len(chunk_set) == 1:
                found = element
                break
        assert found is not None
        filt = BloomFilter(params)
        filt.insert(found)
        bloom_tree = build(filt)
        proof = prove(bloom_tree, found)
        assert isinstance(proof, PresenceProof)
        assert len(proof.chunk_indices) == 1
        assert len(proof.multiproof) == params.depth

    def test_proof_is_deterministic(self):
        bloom_tree, inserted, _ = populated_tree(seed=9)
        assert prove(bloom_tree, inserted[3]) == prove(bloom_tree, inserted[3])


class TestVerify:
    def test_round_trip_matches_contains(self):
        bloom_tree, inserted, rng = populated_tree(seed=10)
        params = bloom_tree.filter.params
        for element in inserted[:20] + [rng.randbytes(13) for _ in range(200)]:
            verdict = verify(bloom_tree.root, params, element, prove(bloom_tree, element))
            expected = (
                VerdictKind.MAYBE_PRESENT
                if bloom_tree.filter.contains(element)
                else VerdictKind.DEFINITELY_ABSENT
            )
            assert verdict.kind is expected, verdict

    def test_absence_soundness(self):
        # DefinitelyAbsent always names an element outside the inserted set
        bloom_tree, inserted, rng = populated_tree(seed=11)
        params = bloom_tree.filter.params
        inserted_set = set(inserted)
        for _ in range(300):
            element = rng.randbytes(13)
            verdict = verify(bloom_tree.root, params, element, prove(bloom_tree, element))
            if verdict.kind is VerdictKind.DEFINITELY_ABSENT:
                assert not bloom_tree.filter.contains(element)
                assert element not in inserted_set

    def test_absence_for_irrelevant_chunk_is_invalid(self):
        bloom_tree, _, rng = populated_tree(seed=12)
        params = bloom_tree.filter.params
        element = next(e for e in iter(lambda: rng.randbytes(13), None) if not bloom_tree.filter.contains(e))
        proof = prove(bloom_tree, element)
        assert isinstance(proof, AbsenceProof)
        touched = {locate(i, params)[0] for i in indices(element, params)}
        outside = next(c for c in range(params.chunk_count) if c not in touched)
        relabeled = AbsenceProof(chunk_index=outside, chunk=proof.chunk, path=proof.path)
        assert verify(bloom_tree.root, params, element, relabeled).kind is VerdictKind.INVALID

    def test_relabeled_absence_chunk_is_invalid(self):
        # Index salting: a valid proof for chunk c never verifies as chunk c'.
        bloom_tree, _, rng = populated_tree(seed=13)
        params = bloom_tree.filter.params
        forgeries = 0
        trials = 0
        while trials < 200:
            element = rng.randbytes(13)
            proof = prove(bloom_tree, element)
            if not isinstance(proof, AbsenceProof):
                continue
            trials += 1
            touched = sorted({locate(i, params)[0] for i in indices(element, params)})
            for other in touched:
                if other == proof.chunk_index:
                    continue
                relabeled = AbsenceProof(chunk_index=other, chunk=proof.chunk, path=proof.path)
                if verify(bloom_tree.root, params, element, relabeled).kind is not VerdictKind.INVALID:
                    forgeries += 1
        assert forgeries == 0

    def test_presence_with_cleared_bit_is_invalid(self):
        bloom_tree, inserted, _ = populated_tree(seed=14)
        params = bloom_tree.filter.params
        element = inserted[0]
        proof = prove(bloom_tree, element)
        assert isinstance(proof, PresenceProof)
        required_bit = indices(element, params)[0]
        chunk_index, local = locate(required_bit, params)
        position = proof.chunk_indices.index(chunk_index)
        tampered_chunk = bytearray(proof.chunks[position])
        tampered_chunk[local >> 3] ^= 1 << (local & 7)
        chunks = list(proof.chunks)
        chunks[position] = bytes(tampered_chunk)
        tampered = PresenceProof(proof.chunk_indices, tuple(chunks), proof.multiproof)
        assert verify(bloom_tree.root, params, element, tampered).kind is VerdictKind.INVALID

    def test_presence_chunk_set_must_match_exactly(self):
        bloom_tree, inserted, _ = populated_tree(seed=15)
        params = bloom_tree.filter.params
        element = inserted[1]
        proof = prove(bloom_tree, element)
        assert isinstance(proof, PresenceProof)
        # dropped chunk
        short = PresenceProof(proof.chunk_indices[1:], proof.chunks[1:], proof.multiproof)
        assert verify(bloom_tree.root, params, element, short).kind is VerdictKind.INVALID
        # extraneous chunk appended (superset is rejected, not just subset)
        extra_index = next(c for c in range(params.chunk_count) if c not in proof.chunk_indices)
        padded = PresenceProof(
            tuple(sorted(proof.chunk_indices + (extra_index,))),
            proof.chunks + (bloom_tree.filter.chunk(extra_index),),
            proof.multiproof,
        )
        assert verify(bloom_tree.root, params, element, padded).kind is VerdictKind.INVALID

    def test_presence_multiproof_mutation_is_invalid(self):
        bloom_tree, inserted, _ = populated_tree(seed=16)
        params = bloom_tree.filter.params
        element = inserted[2]
        proof = prove(bloom_tree, element)
        assert isinstance(proof, PresenceProof)
        for position in range(len(proof.multiproof)):
            mutated = list(proof.multiproof)
            corrupted = bytearray(mutated[position])
            corrupted[0] ^= 0x80
            mutated[position] = bytes(corrupted)
            tampered = PresenceProof(proof.chunk_indices, proof.chunks, tuple(mutated))
            assert verify(bloom_tree.root, params, element, tampered).kind is VerdictKind.INVALID

    def test_wrong_root_is_invalid(self):
        bloom_tree, inserted, _ = populated_tree(seed=17)
        params = bloom_tree.filter.params
        proof = prove(bloom_tree, inserted[0])
        wrong = bytearray(bloom_tree.root)
        wrong[5] ^= 1
        assert verify(bytes(wrong), params, inserted[0], proof).kind is VerdictKind.INVALID
        assert verify(b"short", params, inserted[0], proof).kind is VerdictKind.INVALID

    @pytest.mark.parametrize(
        "junk",
        [
            None,
            42,
            b"not a proof",
            PresenceProof(chunk_indices=7, chunks=(), multiproof=()),
            PresenceProof(chunk_indices=("a",), chunks=(b"x",), multiproof=()),
            PresenceProof(chunk_indices=(0,), chunks=(None,), multiproof=()),
            PresenceProof(chunk_indices=(0,), chunks=(b"x" * 8,), multiproof=(b"bad",)),
            AbsenceProof(chunk_index="zero", chunk=b"x" * 8, path=()),
            AbsenceProof(chunk_index=0, chunk=None, path=()),
            AbsenceProof(chunk_index=0, chunk=b"x" * 8, path=3),
            AbsenceProof(chunk_index=0, chunk=b"x" * 8, path=(b"bad",)),
        ],
    )
    def test_malformed_proofs_never_crash(self, junk):
        bloom_tree, _, _ = populated_tree(seed=18)
        verdict = verify(bloom_tree.root, SMALL, b"anything", junk)
        assert verdict.kind is VerdictKind.INVALID
        assert verdict.reason

    def test_proof_size_formulas(self):
        bloom_tree, inserted, rng = populated_tree(seed=19)
        params = bloom_tree.filter.params
        for element in inserted[:30]:
            proof = prove(bloom_tree, element)
            assert isinstance(proof, PresenceProof)
            assert len(proof.chunk_indices) <= params.k
            assert len(proof.multiproof) <= len(proof.chunk_indices) * params.depth
            assert all(len(chunk) == params.chunk_size for chunk in proof.chunks)
        absences = 0
        while absences < 30:
            element = rng.randbytes(14)
            proof = prove(bloom_tree, element)
            if isinstance(proof, AbsenceProof):
                absences += 1
                assert len(proof.path) == params.depth
                assert len(proof.chunk) == params.chunk_size


class TestVerdict:
    def test_labels(self):
        assert str(Verdict.maybe_present()) == "MaybePresent"
        assert str(Verdict.definitely_absent()) == "DefinitelyAbsent"
        assert str(Verdict.invalid("bad")) == "Invalid: bad"

    def test_validity_flag(self):
        assert Verdict.maybe_present().is_valid
        assert Verdict.definitely_absent().is_valid
        assert not Verdict.invalid("no").is_valid


def brute_force_verdict(filter_bytes: bytes, params: BloomParams, element: bytes) -> VerdictKind:
    """Oracle that holds the entire filter: no proofs, just the bits."""
    filt = BloomFilter(params, bytearray(filter_bytes))
    if filt.contains(element):
        return VerdictKind.MAYBE_PRESENT
    return VerdictKind.DEFINITELY_ABSENT


def test_verify_matches_whole_filter_oracle():
    # Small filter (8 chunks): proof-based verdicts agree with an oracle that
    # rebuilds the tree from the full filter and checks bits directly.
    bloom_tree, inserted, rng = populated_tree(seed=20)
    params = bloom_tree.filter.params
    filter_bytes = bytes(bloom_tree.filter.bits)
    rebuilt = build(BloomFilter(params, bytearray(filter_bytes)))
    assert rebuilt.root == bloom_tree.root
    probes = inserted + [rng.randbytes(15) for _ in range(500)]
    for element in probes:
        verdict = verify(bloom_tree.root, params, element, prove(bloom_tree, element))
        assert verdict.kind is brute_force_verdict(filter_bytes, params, element)


@settings(deadline=None, max_examples=40)
@given(
    inserted=st.lists(st.binary(min_size=1, max_size=16), max_size=30),
    probes=st.lists(st.binary(max_size=16), min_size=1, max_size=10),
)
def test_honest_proofs_are_never_invalid(inserted, probes):
    filt = BloomFilter(SMALL)
    for element in inserted:
        filt.insert(element)
    bloom_tree = build(filt)
    for element in probes + inserted:
        verdict = verify(bloom_tree.root, SMALL, element, prove(bloom_tree, element))
        assert verdict.kind is not VerdictKind.INVALID
