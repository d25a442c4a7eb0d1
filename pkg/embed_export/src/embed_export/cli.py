"""embed-export command line interface.

Exit codes: 0 success, 2 bad input, 3 encoder load failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .encode import DEFAULT_MODEL, EncoderLoadError, ExportError, ExportJob, encode_posts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Encode posts into an EMB1 embedding file pair.",
    )
    parser.add_argument("--in", dest="infile", required=True, help="posts JSONL")
    parser.add_argument("--model", default=DEFAULT_MODEL)
    parser.add_argument("--out", dest="prefix", required=True, help="output prefix")
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--max-len", type=int, default=128)
    parser.add_argument("--pooling", choices=["mean", "first_token"], default="mean")
    parser.add_argument(
        "--raw-text", action="store_true",
        help="encode raw text instead of the normalized form",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        input_path=args.infile,
        output_prefix=args.prefix,
        model=args.model,
        batch_size=args.batch,
        max_length=args.max_len,
        pooling=args.pooling,
        normalize_input=not args.raw_text,
    )
    try:
        result = encode_posts(job)
    except ExportError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except EncoderLoadError as exc:
        print(f"encoder error: {exc}", file=sys.stderr)
        return 3
    print(
        f"wrote {args.prefix}.mat and {args.prefix}.idx.jsonl "
        f"({result.rows} rows, dim {result.dim}, "
        f"{len(result.truncated)} truncated)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
