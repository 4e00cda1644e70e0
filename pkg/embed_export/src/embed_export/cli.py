import argparse
import sys

from .exporter import DEFAULT_MODEL, ModelUnavailableError, export


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep usage errors at 1
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="embed-export",
        description="Encode a qid<TAB>text query file with a sentence encoder "
        "and write a TRETR-EMB 1 binary matrix, one raw row per query in "
        "file order.",
    )
    parser.add_argument("--queries", required=True, help="query TSV to encode")
    parser.add_argument("--model", default=DEFAULT_MODEL, help=f"encoder name or path (default {DEFAULT_MODEL})")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--out", required=True, help="output path for the binary matrix")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        matrix = export(args.queries, args.model, args.batch_size, args.out)
    except (ValueError, OSError, ModelUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(matrix.ids)} x {matrix.data.shape[1]} to {args.out}")
    return 0


def main() -> None:
    sys.exit(run_cli())
