"""Proof-size measurement grid: chunk size x false-positive rate x element count.

Each cell builds one filter from seeded random elements, measures the
encoded size of presence proofs for a sample of inserted elements (median,
lower middle on even counts) and of one absence proof for a fresh element,
and compares both against the filter's own size. Sizes are the encoded byte
lengths from :mod:`bloomtree.codec`. Everything is deterministic under a
fixed seed, down to the emitted CSV bytes.
"""

import random
from dataclasses import dataclass

from .bloom import BloomFilter, derive_params
from .codec import encode_proof
from .tree import AbsenceProof, BloomTree, PresenceProof, VerdictKind, build, prove, verify

DEFAULT_CHUNK_SIZES = (8, 32, 64)
DEFAULT_FPRS = (0.1, 0.01, 0.001)
DEFAULT_NS = (500, 1000, 5000, 10000)
DEFAULT_SAMPLE_SIZE = 100
DEFAULT_SEED = 7

CSV_COLUMNS = ("chunk_size", "fpr", "n", "m_bits", "k", "filter_bytes", "absence_bytes", "median_presence_bytes")

_ELEMENT_LENGTH = 16


@dataclass(frozen=True)
class ExperimentConfig:
    chunk_sizes: tuple[int, ...] = DEFAULT_CHUNK_SIZES
    fprs: tuple[float, ...] = DEFAULT_FPRS
    ns: tuple[int, ...] = DEFAULT_NS
    sample_size: int = DEFAULT_SAMPLE_SIZE
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not self.chunk_sizes or not self.fprs or not self.ns:
            raise ValueError("chunk_sizes, fprs and ns must all be non-empty")
        if self.sample_size < 1:
            raise ValueError(f"sample_size must be >= 1, got {self.sample_size}")


@dataclass(frozen=True)
class ExperimentRow:
    """One grid cell's measurements, all sizes in encoded bytes."""

    chunk_size: int
    fpr_target: float
    n: int
    m_bits: int
    k: int
    filter_bytes: int
    absence_proof_bytes: int
    median_presence_proof_bytes: int


def run_cell(
    chunk_size: int,
    fpr_target: float,
    n: int,
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    seed: int = DEFAULT_SEED,
) -> ExperimentRow:
    """Build one cell's filter and measure its proof sizes.

    Presence sizes come from the first min(sample_size, n) inserted
    elements; the absence size from the first fresh element whose proof
    comes out as an absence proof. Every measured proof is verified against
    the root before its size is recorded.
    """
    params = derive_params(n, fpr_target, chunk_size)
    stream = _element_stream(f"bloomtree-experiment|{seed}|{chunk_size}|{fpr_target!r}|{n}")
    inserted = [next(stream) for _ in range(n)]

    filt = BloomFilter(params)
    for element in inserted:
        filt.insert(element)
    bloom_tree = build(filt)

    median_presence = lower_median(
        _measured_size(bloom_tree, element, PresenceProof, VerdictKind.MAYBE_PRESENT)
        for element in inserted[:sample_size]
    )
    absence_size = _absence_specimen_size(bloom_tree, stream, max_draws=10 * sample_size)

    return ExperimentRow(
        chunk_size=chunk_size,
        fpr_target=fpr_target,
        n=n,
        m_bits=params.m,
        k=params.k,
        filter_bytes=params.byte_length,
        absence_proof_bytes=absence_size,
        median_presence_proof_bytes=median_presence,
    )


def run_grid(config: ExperimentConfig = ExperimentConfig(), csv_path=None) -> list[ExperimentRow]:
    """Run the full cross product in deterministic order.

    Row order is chunk_sizes x fprs x ns regardless of how cells might be
    scheduled. When csv_path is given the CSV is written there as well.
    """
    rows = [
        run_cell(chunk_size, fpr_target, n, config.sample_size, config.seed)
        for chunk_size in config.chunk_sizes
        for fpr_target in config.fprs
        for n in config.ns
    ]
    if csv_path is not None:
        write_csv(rows, csv_path)
    return rows


def rows_to_csv(rows: list[ExperimentRow]) -> str:
    """CSV text with a mandatory header; newline-terminated, LF line ends."""
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                str(value)
                for value in (
                    row.chunk_size,
                    row.fpr_target,
                    row.n,
                    row.m_bits,
                    row.k,
                    row.filter_bytes,
                    row.absence_proof_bytes,
                    row.median_presence_proof_bytes,
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(rows: list[ExperimentRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(rows_to_csv(rows))


def format_summary(rows: list[ExperimentRow]) -> str:
    """Fixed-width table of the grid for terminal output."""
    header = f"{'chunk':>5} {'fpr':>7} {'n':>6} {'m_bits':>8} {'k':>3} {'filter_B':>9} {'absence_B':>10} {'presence_B':>11}"
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row.chunk_size:>5} {row.fpr_target:>7} {row.n:>6} {row.m_bits:>8} {row.k:>3}"
            f" {row.filter_bytes:>9} {row.absence_proof_bytes:>10} {row.median_presence_proof_bytes:>11}"
        )
    return "\n".join(lines)


def lower_median(values) -> int:
    """Median taking the lower middle on even counts."""
    ordered = sorted(values)
    if not ordered:
        raise ValueError("median of an empty sample")
    return ordered[(len(ordered) - 1) // 2]


def _element_stream(seed_key: str):
    """Endless stream of distinct pseudo-random elements for one cell."""
    rng = random.Random(seed_key)
    seen = set()
    while True:
        element = rng.randbytes(_ELEMENT_LENGTH)
        if element in seen:
            continue
        seen.add(element)
        yield element


def _measured_size(bloom_tree: BloomTree, element: bytes, expected_type, expected_kind) -> int:
    params = bloom_tree.filter.params
    proof = prove(bloom_tree, element)
    if not isinstance(proof, expected_type):
        raise RuntimeError(f"expected a {expected_type.__name__} for measured element")
    verdict = verify(bloom_tree.root, params, element, proof)
    if verdict.kind is not expected_kind:
        raise RuntimeError(f"measured proof failed verification: {verdict}")
    return len(encode_proof(params, proof))


def _absence_specimen_size(bloom_tree: BloomTree, stream, max_draws: int) -> int:
    """Encoded size of an absence proof for the first absent fresh element.

    Fresh draws that happen to be false positives are skipped; with
    realistic false-positive targets the first draw almost always works.
    """
    for _ in range(max_draws):
        element = next(stream)
        if bloom_tree.filter.contains(element):
            continue
        return _measured_size(bloom_tree, element, AbsenceProof, VerdictKind.DEFINITELY_ABSENT)
    raise RuntimeError(f"no absence-yielding element found in {max_draws} draws; filter is saturated")
