"""``vcx`` command line: analyze, siti and bench subcommands.

Exit status is 0 on success, 1 for usage errors and 2 for input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .features import GeometryMismatch
from .ingest import Chroma, FrameSource, IngestError, open_raw_yuv, open_y4m, y4m_stream
from .pipeline import AnalyzerConfig, ConfigError, analyze_stream, default_thread_count
from .siti import EmptyStream
from .stats import write_csv, write_siti_csv
from .transform import KernelPath, VectorPathUnavailable

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2

RAW_SUFFIXES = {".yuv", ".raw"}

log = logging.getLogger("vcx")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _block_size(text: str):
    return text if text == "auto" else int(text)


def _threads(text: str):
    return text if text == "auto" else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vcx", description="DCT-energy video complexity analysis")
    parser.add_argument("--version", action="version", version=f"vcx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("input", help="Y4M or raw YUV file, or '-' for Y4M on stdin")
    common.add_argument("--format", choices=("y4m", "raw"),
                        help="input format (default: from the file extension)")
    geo = common.add_argument_group("raw input geometry")
    geo.add_argument("--width", type=int)
    geo.add_argument("--height", type=int)
    geo.add_argument("--bit-depth", type=int, choices=(8, 10), default=8)
    geo.add_argument("--chroma", choices=("420", "422", "444"), default="420")
    geo.add_argument("--fps", default="25", help="frame rate for raw input, e.g. 30000/1001")
    cfg = common.add_argument_group("analyzer")
    cfg.add_argument("--block-size", type=_block_size, default="auto",
                     help="auto, 8, 16 or 32")
    cfg.add_argument("--threads", type=_threads, default=None,
                     help="auto or 1..64 (default: $VCX_THREADS, else auto)")
    cfg.add_argument("--kernel", choices=[k.value for k in KernelPath], default="auto")
    cfg.add_argument("--low-pass", action="store_true",
                     help="analyze 2x-downsampled blocks")
    cfg.add_argument("--no-chroma", action="store_true", help="skip the U and V planes")
    common.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("analyze", parents=[common], help="write per-frame DCT-energy features")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p = sub.add_parser("siti", parents=[common], help="write per-frame SI/TI")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p = sub.add_parser("bench", parents=[common], help="time an analysis without writing CSV")
    p.add_argument("--mode", choices=("features", "siti", "both"), default="features")
    return parser


def _open_source(args) -> FrameSource:
    fmt = args.format
    if args.input == "-":
        if fmt == "raw":
            raise UsageError("raw YUV cannot be read from stdin; use Y4M")
        return y4m_stream(sys.stdin.buffer)
    if fmt is None:
        fmt = "raw" if Path(args.input).suffix.lower() in RAW_SUFFIXES else "y4m"
    if fmt == "y4m":
        return open_y4m(args.input)
    if args.width is None or args.height is None:
        raise UsageError("raw input needs --width and --height")
    try:
        rate = Fraction(args.fps.replace(":", "/"))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad --fps {args.fps!r}") from None
    return open_raw_yuv(args.input, args.width, args.height, args.bit_depth,
                        Chroma.parse(args.chroma), rate)


def _config(args, mode: str) -> AnalyzerConfig:
    threads = args.threads if args.threads is not None else default_thread_count()
    return AnalyzerConfig(
        block_size=args.block_size,
        thread_count=threads,
        kernel=KernelPath(args.kernel),
        low_pass=args.low_pass,
        chroma_enabled=not args.no_chroma,
        mode=mode,
    )


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"vcx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    mode = {"analyze": "features", "siti": "siti"}.get(args.command, getattr(args, "mode", None))
    try:
        config = _config(args, mode)
        with _open_source(args) as source:
            report = analyze_stream(source, config)
    except (UsageError, ConfigError, VectorPathUnavailable) as exc:
        print(f"vcx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, EmptyStream, GeometryMismatch, OSError) as exc:
        print(f"vcx: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "bench":
        print(f"frames={report.frames} seconds={report.seconds:.3f} fps={report.fps:.2f}")
        return EXIT_OK

    destination = args.output or sys.stdout
    try:
        if args.command == "analyze":
            write_csv(report.features, destination)
            for line in report.summary.lines():
                print(line, file=sys.stderr)
        else:
            write_siti_csv(report.siti, report.siti_summary, destination)
            s = report.siti_summary
            print(f"frames={report.frames} SI={s.SI:.6f} TI={s.TI:.6f}", file=sys.stderr)
    except OSError as exc:
        print(f"vcx: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
