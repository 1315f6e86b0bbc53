"""``grsym run <script> [--format text|json-lines] [--trace]``."""

from __future__ import annotations

import argparse
import sys

from .session import EXIT_PARSE, emit, run_script


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grsym", description="Exact differential geometry scripts")
    sub = p.add_subparsers(dest="action", required=True)
    run = sub.add_parser("run", help="execute a script file ('-' reads standard input)")
    run.add_argument("script")
    run.add_argument("--format", choices=["text", "json-lines"], default="text")
    run.add_argument("--trace", action="store_true", help="include step traces in the report")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.script == "-":
            source = sys.stdin.read()
        else:
            with open(args.script, encoding="utf-8") as fh:
                source = fh.read()
    except OSError as e:
        print(f"grsym: cannot read {args.script}: {e.strerror}", file=sys.stderr)
        return EXIT_PARSE
    report = run_script(source, trace=args.trace)
    sys.stdout.write(emit(report, args.format))
    if report.error:
        print(f"grsym: {report.error}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
