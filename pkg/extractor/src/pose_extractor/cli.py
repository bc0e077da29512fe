"""CLI: extract <frame_dir> -o doc.json --backend {openpose,stub} [--face {hog,cnn,off}]

Exit codes follow the primary toolkit: 0 success, 1 usage error, 2 on
backend/data errors or when the emitted document fails validation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .backends import BACKENDS, BackendUnavailable, FrameReadError
from .extract import build_document, validate_with_primary, write_document_atomic


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="extract", description="Emit a posekit annotation document for a frame directory")
    parser.add_argument("frame_dir", type=Path, help="directory of frame_%%06d.png images")
    parser.add_argument("-o", "--output", type=Path, required=True, help="annotation JSON to write")
    parser.add_argument("--backend", choices=sorted(BACKENDS), required=True)
    parser.add_argument("--face", choices=["hog", "cnn", "off"], default="hog",
                        help="face detector: HoG, HoG with CNN escalation, or none")
    parser.add_argument("--no-validate", action="store_true",
                        help="skip the posekit validate pass on the emitted document")
    return parser


def cli_run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"ERROR:usage: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if not args.frame_dir.is_dir():
            print(f"ERROR:io: {args.frame_dir} is not a directory", file=sys.stderr)
            return 2
        doc = build_document(args.frame_dir, args.backend, args.face)
        write_document_atomic(doc, args.output)
    except BackendUnavailable as exc:
        print(f"ERROR:backend: {exc}", file=sys.stderr)
        return 2
    except FrameReadError as exc:
        print(f"ERROR:data: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR:io: {exc}", file=sys.stderr)
        return 2
    print(f"extracted {len(doc['frames'])} frames -> {args.output}")
    if not args.no_validate and validate_with_primary(args.output) != 0:
        return 2
    return 0


def main() -> None:
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
