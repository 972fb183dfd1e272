"""Core Bloom filter: sizing, double-hashed indexing, insert and membership.

The bit array is always padded up to a power-of-two number of fixed-size
chunks so that a Merkle tree can commit to it without any special padding
leaves (see :mod:`bloomtree.tree`). Padding only ever lowers the realized
false-positive rate below the requested target.
"""

import hashlib
import math
from dataclasses import dataclass

MIN_CHUNK_SIZE = 1
MAX_CHUNK_SIZE = 65536

_LN2 = math.log(2)
_U64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class BloomParams:
    """Filter geometry shared by prover and verifier.

    m is the bit count, k the number of hash indices per element, and
    chunk_size the number of bytes per committed chunk. The chunk count
    m / (chunk_size * 8) is always a power of two.
    """

    m: int
    k: int
    chunk_size: int

    def __post_init__(self):
        if not MIN_CHUNK_SIZE <= self.chunk_size <= MAX_CHUNK_SIZE:
            raise ValueError(
                f"chunk_size must be in [{MIN_CHUNK_SIZE}, {MAX_CHUNK_SIZE}], got {self.chunk_size}"
            )
        if not 1 <= self.k < (1 << 32):
            raise ValueError(f"k must be in [1, 2^32), got {self.k}")
        if not 1 <= self.m < (1 << 64):
            raise ValueError(f"m must be in [1, 2^64), got {self.m}")
        bits = self.chunk_size * 8
        if self.m < bits or self.m % bits != 0:
            raise ValueError(f"m={self.m} is not a multiple of the chunk bit width {bits}")
        count = self.m // bits
        if count & (count - 1):
            raise ValueError(f"chunk count {count} is not a power of two")

    @property
    def chunk_bits(self) -> int:
        return self.chunk_size * 8

    @property
    def chunk_count(self) -> int:
        return self.m // self.chunk_bits

    @property
    def depth(self) -> int:
        """Height of the Merkle tree over the chunks, log2(chunk_count)."""
        return self.chunk_count.bit_length() - 1

    @property
    def byte_length(self) -> int:
        return self.m // 8


def derive_params(n: int, p: float, chunk_size: int) -> BloomParams:
    """Size a filter for ``n`` expected elements at target false-positive rate ``p``.

    The raw optimal bit count ceil(n * -ln(p) / ln(2)^2) is padded up to the
    next power-of-two multiple of the chunk bit width, and k is chosen
    near-optimal for the padded size: max(1, round(m/n * ln 2)).
    """
    if n < 1:
        raise ValueError(f"expected element count must be >= 1, got {n}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"target false-positive rate must be in (0, 1), got {p}")
    if not MIN_CHUNK_SIZE <= chunk_size <= MAX_CHUNK_SIZE:
        raise ValueError(f"chunk_size must be in [{MIN_CHUNK_SIZE}, {MAX_CHUNK_SIZE}], got {chunk_size}")

    m_raw = math.ceil(n * -math.log(p) / _LN2**2)
    chunk_bits = chunk_size * 8
    count = 1
    while count * chunk_bits < m_raw:
        count *= 2
    m = count * chunk_bits
    k = max(1, round(m / n * _LN2))
    return BloomParams(m=m, k=k, chunk_size=chunk_size)


def fpr(m: int, k: int, n: int) -> float:
    """Analytic false-positive rate (1 - (1 - 1/m)^(k*n))^k.

    The inner power is evaluated as exp(k*n*ln(1 - 1/m)) to stay accurate
    for large m.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 0.0
    if m == 1:
        return 1.0  # the single bit is set by any insert
    inner = math.exp(k * n * math.log1p(-1.0 / m))
    return (1.0 - inner) ** k


def indices(element: bytes, params: BloomParams) -> list[int]:
    """The k bit positions an element maps to, in derivation order.

    One SHA-256 digest of the element seeds a double-hashing scheme:
    idx_i = (h1 + i*h2) mod 2^64 mod m, with h1 the little-endian u64 from
    digest bytes 0..8 and h2 the one from bytes 8..16 forced odd. Forcing h2
    odd avoids the degenerate case where all k indices coincide. Duplicates
    are possible and preserved.
    """
    digest = hashlib.sha256(element).digest()
    h1 = int.from_bytes(digest[0:8], "little")
    h2 = int.from_bytes(digest[8:16], "little") | 1
    m = params.m
    return [((h1 + i * h2) & _U64_MASK) % m for i in range(params.k)]


@dataclass
class BloomFilter:
    """A bit array of exactly ``params.m`` bits plus its geometry.

    Bit i lives in byte i // 8 at position i % 8, least significant bit
    first. Build is single-writer; once the owner stops inserting, the
    filter is safe for unlimited concurrent readers.
    """

    params: BloomParams
    bits: bytearray | None = None

    def __post_init__(self):
        if self.bits is None:
            self.bits = bytearray(self.params.byte_length)
        else:
            self.bits = bytearray(self.bits)
            if len(self.bits) != self.params.byte_length:
                raise ValueError(
                    f"backing array must be exactly {self.params.byte_length} bytes, got {len(self.bits)}"
                )

    def insert(self, element: bytes) -> None:
        """Set all k bits the element maps to."""
        bits = self.bits
        for i in indices(element, self.params):
            bits[i >> 3] |= 1 << (i & 7)

    def contains(self, element: bytes) -> bool:
        """True iff every bit the element maps to is set.

        Never false for an inserted element; may be true for one that was
        never inserted (a false positive).
        """
        bits = self.bits
        return all((bits[i >> 3] >> (i & 7)) & 1 for i in indices(element, self.params))

    def bit(self, index: int) -> int:
        """Value (0 or 1) of the bit at a global bit index."""
        return (self.bits[index >> 3] >> (index & 7)) & 1

    def chunk(self, chunk_index: int) -> bytes:
        """Raw bytes of one chunk of the bit array."""
        size = self.params.chunk_size
        start = chunk_index * size
        return bytes(self.bits[start : start + size])
