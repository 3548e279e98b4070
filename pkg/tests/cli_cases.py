"""The CLI invocations whose reports are frozen under tests/golden.  Paths
are relative to the shipped fixtures directory."""

import os

import tfkernel

FIXTURES = os.path.join(os.path.dirname(tfkernel.__file__), "fixtures")
GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

# name -> (argv, expected exit code)
CASES = {
    "check_sigma_pi": (["check", "sigma_pi.tft"], 0),
    "check_sigma_pi_order3": (["check", "sigma_pi_order3.tft"], 0),
    "check_combinators": (["check", "combinators.tft"], 0),
    "check_sigma_pi_checks": (["check", "--include", "sigma_pi.tft", "sigma_pi_checks.tft"], 0),
    "check_sigma_pi_errors": (["check", "--include", "sigma_pi.tft", "sigma_pi_errors.tft"], 1),
    "check_sigma_pi_lf": (["check", "sigma_pi_lf.tft"], 0),
    "check_two_files": (["check", "sigma_pi.tft", "combinators.tft"], 0),
    "classify_sigma_pi": (["classify", "sigma_pi.tft"], 0),
    "classify_sigma_pi_noeq": (["classify", "sigma_pi_noeq.tft"], 0),
    "classify_sigma_pi_order3": (["classify", "sigma_pi_order3.tft"], 0),
    "classify_sigma_pi_order3_strict": (["classify", "--strict-unknown", "sigma_pi_order3.tft"], 1),
    "classify_combinators": (["classify", "combinators.tft"], 0),
    "classify_sigma_pi_lf": (["classify", "sigma_pi_lf.tft"], 0),
    "profile_spar2_sigma_pi": (["profile", "--spar2", "sigma_pi.tft"], 1),
    "profile_spar2_combinators": (["profile", "--spar2", "combinators.tft"], 0),
    "profile_sparw_combinators": (["profile", "--sparw", "combinators.tft"], 1),
    "profile_sparw_combinators_noeq": (["profile", "--sparw", "combinators_noeq.tft"], 0),
    "roundtrip_sigma_pi": (["roundtrip", "sigma_pi.tft"], 0),
    "roundtrip_sigma_pi_checks": (["roundtrip", "--include", "sigma_pi.tft", "sigma_pi_checks.tft"], 0),
    "roundtrip_sigma_pi_lf": (["roundtrip", "sigma_pi_lf.tft"], 0),
    "roundtrip_combinators": (["roundtrip", "combinators.tft"], 0),
}


def fixture_argv(argv: list[str]) -> list[str]:
    out = []
    for a in argv:
        out.append(os.path.join(FIXTURES, a) if a.endswith(".tft") else a)
    return out
