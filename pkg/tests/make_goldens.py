"""Regenerate tests/golden from the current build:  python3 tests/make_goldens.py
Review the diff before committing; the acceptance suite compares against
these files byte for byte."""

import contextlib
import io
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from cli_cases import CASES, GOLDEN, fixture_argv  # noqa: E402

from tfkernel.cli import main  # noqa: E402


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(fixture_argv(argv))
    return code, out.getvalue()


if __name__ == "__main__":
    os.makedirs(GOLDEN, exist_ok=True)
    for name, (argv, want) in CASES.items():
        code, text = run(argv)
        if code != want:
            print(f"{name}: exit {code}, expected {want}", file=sys.stderr)
        with open(os.path.join(GOLDEN, name + ".txt"), "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        print(f"wrote {name}")
