"""Command-line front end over the filter/proof file formats.

Exit codes: 0 success or valid proof, 1 invalid proof, 2 usage error,
3 I/O or file-format error.

Elements are passed as UTF-8 text on the command line (or as raw file
contents with --element-file); the library itself accepts arbitrary bytes.
"""

import argparse
import math
import sys

from . import codec
from .bloom import BloomFilter, derive_params, fpr
from .experiment import (
    DEFAULT_CHUNK_SIZES,
    DEFAULT_FPRS,
    DEFAULT_NS,
    DEFAULT_SAMPLE_SIZE,
    DEFAULT_SEED,
    ExperimentConfig,
    format_summary,
    run_grid,
)
from .tree import AbsenceProof, Verdict, build, prove, verify

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except codec.CodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # bad flag values (fpr out of range, zero n, ...)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bloomtree",
        description="Bloom filter committed under a Merkle root, with presence and absence proofs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="derive filter geometry for n elements at a target false-positive rate")
    p.add_argument("--n", type=int, required=True, help="expected element count")
    p.add_argument("--fpr", type=float, required=True, help="target false-positive rate in (0,1)")
    p.add_argument("--chunk-size", type=int, required=True, help="bytes per committed chunk")
    p.set_defaults(handler=_cmd_params)

    p = sub.add_parser("build", help="build a filter from newline-delimited elements and write a filter file")
    p.add_argument("--elements", required=True, help="UTF-8 file, one element per line")
    p.add_argument("--n", type=int, default=None, help="capacity to size for (default: number of lines, min 1)")
    p.add_argument("--fpr", type=float, required=True)
    p.add_argument("--chunk-size", type=int, required=True)
    p.add_argument("--out", required=True, help="output filter file")
    p.set_defaults(handler=_cmd_build)

    p = sub.add_parser("prove", help="write a presence or absence proof for one element")
    p.add_argument("--filter", required=True, help="filter file")
    _add_element_flags(p)
    p.add_argument("--out", required=True, help="output proof file")
    p.set_defaults(handler=_cmd_prove)

    p = sub.add_parser("verify", help="verify a proof against a root (or a filter file's root)")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--root", help="64-char lowercase hex root")
    source.add_argument("--filter", help="filter file to take root and params from")
    _add_element_flags(p)
    p.add_argument("--proof", required=True, help="proof file")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("root", help="print a filter file's root as lowercase hex")
    p.add_argument("--filter", required=True)
    p.set_defaults(handler=_cmd_root)

    p = sub.add_parser("experiment", help="run the proof-size grid and write a CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--chunk-sizes", default=None, help="comma-separated chunk sizes in bytes")
    p.add_argument("--fprs", default=None, help="comma-separated false-positive rates")
    p.add_argument("--ns", default=None, help="comma-separated element counts")
    p.add_argument("--sample-size", type=int, default=DEFAULT_SAMPLE_SIZE)
    p.set_defaults(handler=_cmd_experiment)

    return parser


def _add_element_flags(parser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--element", help="element as a UTF-8 string")
    group.add_argument("--element-file", help="file whose exact bytes are the element")


def _element_bytes(args) -> bytes:
    if args.element is not None:
        return args.element.encode("utf-8")
    with open(args.element_file, "rb") as handle:
        return handle.read()


def _cmd_params(args) -> int:
    params = derive_params(args.n, args.fpr, args.chunk_size)
    m_raw = math.ceil(args.n * -math.log(args.fpr) / math.log(2) ** 2)
    print(f"m_raw: {m_raw}")
    print(f"m: {params.m}")
    print(f"k: {params.k}")
    print(f"chunks: {params.chunk_count}")
    print(f"predicted_fpr: {fpr(params.m, params.k, args.n)}")
    return EXIT_OK


def _cmd_build(args) -> int:
    with open(args.elements, "rb") as handle:
        content = handle.read()
    lines = content.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()  # file ended with a newline, not an extra empty element
    n = args.n if args.n is not None else max(1, len(lines))
    params = derive_params(n, args.fpr, args.chunk_size)
    filt = BloomFilter(params)
    for line in lines:
        filt.insert(line)
    bloom_tree = build(filt)
    with open(args.out, "wb") as handle:
        handle.write(codec.encode_filter(bloom_tree))
    print(f"root: {bloom_tree.root.hex()}")
    return EXIT_OK


def _cmd_prove(args) -> int:
    with open(args.filter, "rb") as handle:
        bloom_tree = codec.decode_filter(handle.read())
    proof = prove(bloom_tree, _element_bytes(args))
    with open(args.out, "wb") as handle:
        handle.write(codec.encode_proof(bloom_tree.filter.params, proof))
    print("absence" if isinstance(proof, AbsenceProof) else "presence")
    return EXIT_OK


def _cmd_verify(args) -> int:
    with open(args.proof, "rb") as handle:
        echoed_params, proof = codec.decode_proof(handle.read())
    if args.filter is not None:
        with open(args.filter, "rb") as handle:
            bloom_tree = codec.decode_filter(handle.read())
        root = bloom_tree.root
        params = bloom_tree.filter.params
        if echoed_params != params:
            return _report(Verdict.invalid("proof params do not match the filter's params"))
    else:
        root = _parse_root(args.root)
        params = echoed_params
    return _report(verify(root, params, _element_bytes(args), proof))


def _report(verdict: Verdict) -> int:
    print(str(verdict))
    return EXIT_OK if verdict.is_valid else EXIT_INVALID


def _parse_root(text: str) -> bytes:
    try:
        root = bytes.fromhex(text)
    except ValueError:
        raise codec.InvalidField(f"root is not valid hex: {text!r}") from None
    if len(root) != 32:
        raise codec.InvalidField("root must be 32 bytes (64 hex chars)")
    return root


def _cmd_root(args) -> int:
    with open(args.filter, "rb") as handle:
        bloom_tree = codec.decode_filter(handle.read())
    print(bloom_tree.root.hex())
    return EXIT_OK


def _cmd_experiment(args) -> int:
    config = ExperimentConfig(
        chunk_sizes=_parse_list(args.chunk_sizes, int) or DEFAULT_CHUNK_SIZES,
        fprs=_parse_list(args.fprs, float) or DEFAULT_FPRS,
        ns=_parse_list(args.ns, int) or DEFAULT_NS,
        sample_size=args.sample_size,
        seed=args.seed,
    )
    rows = run_grid(config, csv_path=args.out)
    print(format_summary(rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _parse_list(text, conv):
    if text is None:
        return None
    return tuple(conv(part) for part in text.split(",") if part)


if __name__ == "__main__":
    sys.exit(main())
