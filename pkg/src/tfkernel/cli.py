"""Command line: ``tfkernel <command> [flags] FILE...``."""

from __future__ import annotations

import argparse
import sys

from tfkernel import cli_io
from tfkernel.syntax import DIALECTS
from tfkernel.tf_check import DEFAULT_FUEL, SPAR_TWO


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tfkernel", description="Check, translate and probe TF, TF_k and LF files.")
    p.add_argument("command", choices=cli_io.COMMANDS)
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="rewriting and reduction budget (default %(default)s)")
    p.add_argument("--strict-unknown", action="store_true", help="exit 1 when any item is unknown")
    p.add_argument("--include", action="append", default=[], metavar="FILE",
                   help="parse FILE first and use its declarations (repeatable)")
    p.add_argument("--dialect", choices=DIALECTS, help="override the dialect pragma")
    prof = p.add_mutually_exclusive_group()
    prof.add_argument("--spar2", dest="profile", action="store_const", const="spar2")
    prof.add_argument("--sparw", dest="profile", action="store_const", const="sparw")
    p.add_argument("--to", dest="target", choices=DIALECTS, help="target dialect for translate")
    p.add_argument("-o", "--output", metavar="FILE", help="write translated source here instead of stdout")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.fuel < 0:
        print("tfkernel: --fuel must be non-negative", file=sys.stderr)
        return 2
    flags = cli_io.Flags(
        fuel=args.fuel,
        strict_unknown=args.strict_unknown,
        includes=tuple(args.include),
        dialect=args.dialect,
        profile=cli_io.PROFILES[args.profile] if args.profile else SPAR_TWO,
        target=args.target,
    )
    report = cli_io.run_command(args.command, args.files, flags)
    if args.command in cli_io.TRANSLATIONS:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as f:
                f.write(report.output)
        else:
            sys.stdout.write(report.output)
        sys.stderr.write(report.text())
    else:
        sys.stdout.write(report.text())
    n_unknown = report.count(cli_io.UNK)
    if n_unknown and not args.strict_unknown:
        print(f"tfkernel: warning: {n_unknown} item(s) unknown", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
