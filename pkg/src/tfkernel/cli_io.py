"""File loading, report assembly and the per-subcommand drivers behind the
command line.  Every driver takes parsed flags and source paths and returns a
Report; nothing here prints.

Report lines are ``STATUS<TAB>item<TAB>detail`` with STATUS one of ok, error,
unknown.  Exit codes: 0 ok, 1 check failure, 2 parse or arity error,
3 internal invariant violation.
"""

from __future__ import annotations

import dataclasses
import os
import re

from tfkernel import lf, lf_syntax, syntax, tfk
from tfkernel.tf_check import (
    DEFAULT_FUEL,
    SPAR_OMEGA_MINUS,
    SPAR_TWO,
    UNKNOWN,
    CheckFailure,
    ConstDecl,
    DefinedJudgement,
    EqDecl,
    Equality,
    Judgement,
    Kernel,
    KindWf,
    Specification,
    Typing,
    check_derivation,
    classify_goodness,
    check_profile,
    same_judgement,
)
from tfkernel.tf_core import EMPTY, ArityError, alpha_eq, canon_under, kind
from tfkernel.syntax import LF, TF, TFK, CheckItem, DerivationItem, ParseError, SourceFile

OK, ERROR, UNK = "ok", "error", "unknown"

COMMANDS = ("check", "synth", "equal", "translate", "nf", "lift", "label", "erase",
            "roundtrip", "classify", "profile", "sn-probe")
TRANSLATIONS = ("translate", "nf", "lift", "label", "erase")

_PRAGMA = re.compile(r"^\s*--\s*dialect\s*:\s*(\w+)", re.MULTILINE)

# errors a kernel operation may legitimately raise on bad input
_EXPECTED = (CheckFailure, ArityError, lf.LFError, tfk.LabelError, ValueError)


@dataclasses.dataclass(frozen=True)
class Flags:
    fuel: int = DEFAULT_FUEL
    strict_unknown: bool = False
    includes: tuple[str, ...] = ()
    dialect: str | None = None
    profile: str = SPAR_TWO
    target: str | None = None  # translate --to


@dataclasses.dataclass(frozen=True)
class Line:
    status: str
    item: str
    detail: str

    def __str__(self) -> str:
        detail = " ".join(self.detail.split())
        return f"{self.status}\t{self.item}\t{detail}"


@dataclasses.dataclass
class Report:
    lines: list[Line] = dataclasses.field(default_factory=list)
    output: str = ""  # translated source, for the translation commands
    parse_failed: bool = False
    internal: bool = False
    strict_unknown: bool = False

    def add(self, status: str, item: str, detail: str) -> None:
        self.lines.append(Line(status, item, detail))

    def count(self, status: str) -> int:
        return sum(1 for ln in self.lines if ln.status == status)

    @property
    def exit_code(self) -> int:
        if self.internal:
            return 3
        if self.parse_failed:
            return 2
        if self.count(ERROR) or (self.strict_unknown and self.count(UNK)):
            return 1
        return 0

    def text(self) -> str:
        return "".join(f"{ln}\n" for ln in self.lines)

    def extend(self, other: Report, prefix: str = "") -> None:
        for ln in other.lines:
            self.lines.append(Line(ln.status, prefix + ln.item, ln.detail))
        self.output += other.output
        self.parse_failed |= other.parse_failed
        self.internal |= other.internal


# ---------------------------------------------------------------------------
# loading


def detect_dialect(text: str, default: str | None = None) -> str:
    m = _PRAGMA.search(text)
    if m:
        d = m.group(1).lower()
        if d not in syntax.DIALECTS:
            raise ParseError(f"unknown dialect {d!r} in pragma")
        return d
    return default or TF


def load(path: str, flags: Flags, read=None) -> SourceFile:
    """Parse path; included files are parsed first, in order, and their
    declarations become a prefix of the specification.  `read` maps a path to
    its text (the file system by default)."""
    read = read or _read
    base = None
    dialect = None
    for inc in flags.includes:
        text = read(inc)
        d = flags.dialect or detect_dialect(text)
        if dialect and d != dialect:
            raise ParseError(f"{inc}: included files must share one dialect")
        dialect = d
        base = syntax.parse_file(text, d, inc, base).spec
    text = read(path)
    d = flags.dialect or detect_dialect(text, dialect)
    if dialect and d != dialect:
        raise ParseError(f"{path} is {d} but the included files are {dialect}")
    return syntax.parse_file(text, d, path, base)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


# ---------------------------------------------------------------------------
# shared views of a file


def tf_spec_of(sf: SourceFile) -> Specification:
    match sf.dialect:
        case "tf":
            return sf.spec
        case "tfk":
            return tfk.erase_labels(sf.spec)
        case _:
            return lf.nf_entity(lf.LEMPTY, sf.spec, sf.spec)


def checks(sf: SourceFile) -> list[tuple[str, object]]:
    return [(i, it.judgement) for i, it in sf.items if isinstance(it, CheckItem)]


def same_declaration(a, b) -> bool:
    match a, b:
        case ConstDecl(s1, k1), ConstDecl(s2, k2):
            return s1 == s2 and alpha_eq(k1, k2)
        case EqDecl(i1, c1, m1, n1, t1), EqDecl(i2, c2, m2, n2, t2):
            return i1 == i2 and canon_under(c1, m1, n1, t1) == canon_under(c2, m2, n2, t2)
    return False


def same_spec(a: Specification, b: Specification) -> bool:
    return len(a.declarations) == len(b.declarations) and all(
        same_declaration(x, y) for x, y in zip(a.declarations, b.declarations))


# ---------------------------------------------------------------------------
# check, synth, equal


def _decl_obligations(kern: Kernel, d) -> None:
    match d:
        case ConstDecl(_, k):
            kern.defined(DefinedJudgement(EMPTY, KindWf(k)))
        case EqDecl(_, ctx, m, n, t):
            kern.check(ctx, m, t)
            kern.check(ctx, n, t)
            kern.defined(DefinedJudgement(ctx, KindWf(kind(t))))


def _judgement_status(kern: Kernel, j: Judgement) -> tuple[str, str]:
    try:
        d = kern.derive(j)
    except CheckFailure as e:
        if isinstance(j.body, Equality) and kern.exhausted:
            return UNK, f"fuel exhausted: {e}"
        return ERROR, str(e)
    rep = check_derivation(kern.spec, d)
    if not rep.ok:
        return ERROR, f"kernel derivation rejected: {rep.errors[0]}"
    return OK, f"derived ({_nodes(d)} nodes)"


def _nodes(d) -> int:
    return sum(1 for _ in d.nodes())


def cmd_check(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    if sf.dialect == LF:
        return _check_lf(sf, flags)
    decls: list = []
    labelled = sf.dialect == TFK
    for ident, it in sf.items:
        match it:
            case ConstDecl() | EqDecl():
                kern = Kernel(Specification(tuple(decls), labelled), flags.fuel)
                try:
                    _decl_obligations(kern, it)
                    r.add(OK, ident, "declaration well formed")
                except (CheckFailure, ArityError) as e:
                    r.add(ERROR, ident, str(e))
                decls.append(it)
            case CheckItem(j):
                status, detail = _judgement_status(Kernel(sf.spec, flags.fuel), j)
                r.add(status, ident, detail)
            case DerivationItem(d):
                rep = tfk.check_k_derivation(sf.spec, d) if labelled else check_derivation(sf.spec, d)
                if rep.ok:
                    r.add(OK, ident, f"derivation accepted ({_nodes(d)} nodes)")
                else:
                    r.add(ERROR, ident, f"derivation rejected: {rep.errors[0]}")
    return r


def _check_lf(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    decls: list = []
    for ident, it in sf.items:
        if isinstance(it, CheckItem):
            res = lf.check_LF(sf.spec, it.judgement, flags.fuel)
            if res.ok:
                r.add(OK, ident, "derivable")
            else:
                r.add(UNK if res.unknown else ERROR, ident, res.reason)
            continue
        checker = lf.LFChecker(lf.LFSpecification(tuple(decls)), flags.fuel)
        try:
            match it:
                case lf.LFConstDecl(_, k):
                    checker.kind_wf(lf.LEMPTY, k)
                case lf.LFEqDecl(_, ctx, a, b, t):
                    checker.valid(ctx)
                    checker.kind_wf(ctx, t)
                    checker.check(ctx, a, t)
                    checker.check(ctx, b, t)
            r.add(OK, ident, "declaration well formed")
        except lf.FuelExhausted as e:
            r.add(UNK, ident, str(e))
        except lf.LFError as e:
            r.add(ERROR, ident, str(e))
        decls.append(it)
    return r


def cmd_synth(sf: SourceFile, flags: Flags) -> Report:
    """The synthesised kind of the subject of every typing request; the
    stated kind is ignored."""
    r = Report()
    for ident, j in checks(sf):
        if sf.dialect == LF:
            if not isinstance(j.body, lf.LFTyping):
                continue
            try:
                k = lf.infer_LF(sf.spec, j.context, j.body.term, flags.fuel)
                r.add(OK, ident, lf_syntax.print_kind(k))
            except lf.LFError as e:
                r.add(ERROR, ident, str(e))
            continue
        if not isinstance(j.body, Typing):
            continue
        kern = Kernel(sf.spec, flags.fuel)
        try:
            kern.valid(j.context)
            t, _ = kern.synth(j.context, j.body.term)
            r.add(OK, ident, syntax.print_basekind(t))
        except (CheckFailure, ArityError) as e:
            r.add(ERROR, ident, str(e))
    return r


def cmd_equal(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    for ident, j in checks(sf):
        if sf.dialect == LF:
            if isinstance(j.body, (lf.LFObjEq, lf.LFKindEq)):
                res = lf.check_LF(sf.spec, j, flags.fuel)
                r.add(OK if res.ok else UNK if res.unknown else ERROR, ident, "equal" if res.ok else res.reason)
        elif isinstance(j.body, Equality):
            status, detail = _judgement_status(Kernel(sf.spec, flags.fuel), j)
            r.add(status, ident, "equal, " + detail if status == OK else detail)
    return r


# ---------------------------------------------------------------------------
# translations


def _tr_label(sf: SourceFile, r: Report) -> SourceFile:
    spec = sf.spec
    out = tfk.label_spec(spec)
    items = _decl_items(out)
    for ident, it in sf.items:
        if isinstance(it, CheckItem):
            try:
                items.append((ident, CheckItem(tfk.label_judgement(spec, it.judgement))))
            except (tfk.LabelError, ArityError) as e:
                r.add(ERROR, ident, f"labeling undefined: {e}")
        elif isinstance(it, DerivationItem):
            r.add(ERROR, ident, "derivations are not translated")
    return SourceFile(sf.path, TFK, items, out)


def _tr_erase(sf: SourceFile, r: Report) -> SourceFile:
    out = tfk.erase_labels(sf.spec)
    items = _decl_items(out)
    for ident, it in sf.items:
        match it:
            case CheckItem(j):
                items.append((ident, CheckItem(tfk.erase_labels(j))))
            case DerivationItem(d):
                items.append((ident, DerivationItem(tfk.erase_derivation(sf.spec, d))))
    return SourceFile(sf.path, TF, items, out)


def _tr_lift(sf: SourceFile, r: Report) -> SourceFile:
    out = lf.lift(sf.spec)
    items = _decl_items(out)
    for ident, it in sf.items:
        if isinstance(it, CheckItem):
            items.append((ident, CheckItem(lf.lift(it.judgement))))
        elif isinstance(it, DerivationItem):
            r.add(ERROR, ident, "derivations are not translated")
    return SourceFile(sf.path, LF, items, out)


def _tr_nf(sf: SourceFile, r: Report) -> SourceFile:
    out = lf.nf_entity(lf.LEMPTY, sf.spec, sf.spec)
    items = _decl_items(out)
    for ident, it in sf.items:
        if isinstance(it, CheckItem):
            try:
                j = lf.nf_entity(lf.LEMPTY, sf.spec, it.judgement)
            except lf.LFError as e:
                r.add(ERROR, ident, f"NF undefined: {e}")
                continue
            if isinstance(j, Judgement):
                items.append((ident, CheckItem(j)))
            else:
                r.add(ERROR, ident, "NF image is a defined judgement, which has no surface form")
    return SourceFile(sf.path, TF, items, out)


def _decl_items(spec) -> list:
    return [(d.ident, d) for d in spec.declarations]


# the route taken by each translation from a given dialect
_ROUTES = {
    ("label", TF): ("label",),
    ("erase", TFK): ("erase",),
    ("lift", TFK): ("lift",),
    ("lift", TF): ("label", "lift"),
    ("nf", LF): ("nf",),
    (TFK, TF): ("label",),
    (LF, TF): ("label", "lift"),
    (TF, TFK): ("erase",),
    (LF, TFK): ("lift",),
    (TF, LF): ("nf",),
    (TFK, LF): ("nf", "label"),
}
_STEPS = {"label": _tr_label, "erase": _tr_erase, "lift": _tr_lift, "nf": _tr_nf}


def print_source(sf: SourceFile) -> str:
    body = lf_syntax.print_lf(sf) if sf.dialect == LF else syntax.print_file(sf)
    return f"-- dialect: {sf.dialect}\n{body}"


def cmd_translate(sf: SourceFile, flags: Flags, command: str) -> Report:
    r = Report()
    if command == "translate":
        if flags.target is None:
            raise ValueError("translate needs --to")
        key = (flags.target, sf.dialect)
        if flags.target == sf.dialect:
            r.output = print_source(sf)
            return r
    else:
        key = (command, sf.dialect)
    route = _ROUTES.get(key)
    if route is None:
        raise ValueError(f"{command} does not apply to a {sf.dialect} file")
    cur = sf
    for step in route:
        cur = _STEPS[step](cur, r)
    r.output = print_source(cur)
    return r


# ---------------------------------------------------------------------------
# roundtrip: the three triangles


@dataclasses.dataclass
class Corners:
    """One typing request seen from the three frameworks."""

    tf: Judgement | None
    tfk: Judgement | None
    lf: lf.LFJudgement | None


class Triangles:
    def __init__(self, spec: Specification, lf_spec: lf.LFSpecification | None, fuel: int):
        self.spec = spec
        self.fuel = fuel
        self.labelled = tfk.label_spec(spec)
        self.lifted = lf.lift(self.labelled)
        self.lf_spec = lf_spec if lf_spec is not None else self.lifted
        self.back = lf.nf_entity(lf.LEMPTY, self.lf_spec, self.lf_spec)

    def spec_lines(self, r: Report) -> None:
        if same_spec(tfk.erase_labels(self.labelled), self.spec):
            r.add(OK, "spec", "erasure of labeling is the identity")
        else:
            r.add(ERROR, "spec", "erasure of labeling differs from the specification")
        nf = lf.nf_entity(lf.LEMPTY, self.lifted, self.lifted)
        if same_spec(nf, self.spec):
            r.add(OK, "spec", "triangle a: NF of the lifted labeling is the specification")
        else:
            r.add(ERROR, "spec", "triangle a: NF of the lifted labeling differs from the specification")

    def a(self, j: Judgement) -> tuple[str, str]:
        lj = lf.lift(tfk.label_judgement(self.spec, j))
        back = lf.nf_entity(lf.LEMPTY, self.lifted, lj)
        if isinstance(back, Judgement) and same_judgement(back, j):
            return OK, "triangle a: M is NF(lift(L(M)))"
        return ERROR, f"triangle a: came back as {back}"

    def b(self, j: Judgement) -> tuple[str, str]:
        ctx, m, t = j.context, j.body.term, j.body.kind
        lj = lf.lift(j)
        nf = lf.nf_object(lj.context, self.lifted, lj.body.term)
        back = tfk.label_entity(self.spec, tfk.erase_labels(ctx), None, nf)
        kern = Kernel(self.labelled, self.fuel)
        d = kern.equal(ctx, m, back, t)
        if d is None:
            return (UNK if kern.exhausted else ERROR), f"triangle b: {kern.last_reason}"
        if not check_derivation(self.labelled, d).ok:
            return ERROR, "triangle b: equality derivation rejected"
        return OK, "triangle b: M = L(NF(lift(M))) in TF_k"

    def c(self, j: lf.LFJudgement) -> tuple[str, str]:
        ctx, k, t = j.context, j.body.term, j.body.kind
        tctx = lf.nf_entity(lf.LEMPTY, self.lf_spec, ctx)
        nf = lf.nf_entity(ctx, self.lf_spec, k)
        if nf.binders:
            lab = tfk.label_entity(self.back, tctx, lf.nf_entity(ctx, self.lf_spec, t), nf)
        else:
            lab = tfk.label_entity(self.back, tctx, None, nf.body)
        res = lf.check_LF(self.lf_spec, lf.LFJudgement(ctx, lf.LFObjEq(k, lf.lift(lab), t)), self.fuel)
        if res.ok:
            return OK, "triangle c: k = lift(L(NF(k))) in LF"
        return (UNK if res.unknown else ERROR), f"triangle c: {res.reason}"


def _corners(sf: SourceFile, j, spec: Specification) -> Corners | None:
    match sf.dialect:
        case "tf":
            if not isinstance(j.body, Typing):
                return None
            kj = tfk.label_judgement(spec, j)
            return Corners(j, kj, lf.lift(kj))
        case "tfk":
            if not isinstance(j.body, Typing):
                return None
            return Corners(tfk.erase_labels(j), j, lf.lift(j))
        case _:
            if not isinstance(j.body, lf.LFTyping):
                return None
            tj = lf.nf_entity(lf.LEMPTY, sf.spec, j)
            if not isinstance(tj, Judgement):
                return Corners(None, None, j)
            return Corners(tj, tfk.label_judgement(spec, tj), j)


def _untypable(sf: SourceFile, j, flags: Flags) -> str | None:
    if sf.dialect == LF:
        res = lf.check_LF(sf.spec, j, flags.fuel)
        return None if res.ok else res.reason
    try:
        Kernel(sf.spec, flags.fuel).derive(j)
    except (CheckFailure, ArityError) as e:
        return str(e)
    return None


def cmd_roundtrip(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    spec = tf_spec_of(sf)
    tri = Triangles(spec, sf.spec if sf.dialect == LF else None, flags.fuel)
    tri.spec_lines(r)
    for ident, j in checks(sf):
        try:
            cs = _corners(sf, j, spec)
        except _EXPECTED as e:
            r.add(ERROR, ident, f"translation undefined: {e}")
            continue
        if cs is None:
            continue
        why = _untypable(sf, j, flags)
        if why:
            r.add(ERROR, ident, f"not typable, triangles skipped: {why}")
            continue
        for name, run, arg in (("a", tri.a, cs.tf), ("b", tri.b, cs.tfk), ("c", tri.c, cs.lf)):
            if arg is None:
                continue
            try:
                status, detail = run(arg)
            except _EXPECTED as e:
                status, detail = ERROR, f"triangle {name}: {e}"
            r.add(status, ident, detail)
    return r


# ---------------------------------------------------------------------------
# classify, profile


def cmd_classify(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    g = classify_goodness(tf_spec_of(sf), flags.fuel)
    r.add(UNK if g.tag == UNKNOWN else OK, "spec", g.display())
    return r


def cmd_profile(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    spec = tf_spec_of(sf)
    found = check_profile(spec, flags.profile)
    for ident, j in checks(sf):
        if sf.dialect == LF:
            j = lf.nf_entity(lf.LEMPTY, sf.spec, j)
            if not isinstance(j, Judgement):
                continue
        elif sf.dialect == TFK:
            j = tfk.erase_labels(j)
        for v in check_profile(j, flags.profile):
            found.append(dataclasses.replace(v, where=ident))
    for v in found:
        r.add(ERROR, v.where, f"{flags.profile} violated by {v.variable} : {v.kind} ({v.reason})")
    if not found:
        r.add(OK, "spec", f"{flags.profile} holds")
    return r


# ---------------------------------------------------------------------------
# sn-probe


def _steps(n: int) -> str:
    return f"{n} step" if n == 1 else f"{n} steps"


def cmd_sn_probe(sf: SourceFile, flags: Flags) -> Report:
    r = Report()
    if sf.dialect == LF:
        spec, items = sf.spec, checks(sf)
    else:
        labelled = sf.spec if sf.dialect == TFK else tfk.label_spec(sf.spec)
        spec = lf.lift(labelled)
        items = []
        for ident, j in checks(sf):
            if isinstance(j.body, Typing):
                kj = j if sf.dialect == TFK else tfk.label_judgement(sf.spec, j)
                items.append((ident, lf.lift(kj)))
    for ident, j in items:
        if not isinstance(j.body, lf.LFTyping):
            continue
        try:
            tr = lf.sn_probe(spec, j.context, j.body.term, flags.fuel)
        except lf.LFError as e:
            r.add(ERROR, ident, f"not typable: {e}")
            continue
        counts = {"R": 0, lf.BETA: 0, lf.ETA: 0}
        for s in tr.steps:
            counts["R" if s.rule.startswith("R:") else s.rule] += 1
        tally = f"R {counts['R']}, beta {counts[lf.BETA]}, eta {counts[lf.ETA]}"
        shown = tr.problems[:3] + (("...",) if len(tr.problems) > 3 else ())
        problems = f"; {len(tr.problems)} NF invariance problems: " + "; ".join(shown) if tr.problems else ""
        if tr.terminal == "normal":
            final = lf_syntax.print_obj(tr.final)
            r.add(ERROR if tr.problems else OK, ident,
                  f"normal after {_steps(len(tr.steps))} ({tally}): {final}{problems}")
        else:
            small = lf.minimize_nonterminating(spec, j.context, j.body.term, flags.fuel)
            r.add(ERROR if tr.problems else UNK, ident,
                  f"fuel exhausted after {_steps(len(tr.steps))} ({tally});"
                  f" minimal looping subterm: {lf_syntax.print_obj(small)}{problems}")
    return r


# ---------------------------------------------------------------------------
# driver


_DRIVERS = {
    "check": cmd_check,
    "synth": cmd_synth,
    "equal": cmd_equal,
    "roundtrip": cmd_roundtrip,
    "classify": cmd_classify,
    "profile": cmd_profile,
    "sn-probe": cmd_sn_probe,
}


def run_file(command: str, path: str, flags: Flags, read=None) -> Report:
    try:
        sf = load(path, flags, read)
    except (ParseError, ArityError) as e:
        r = Report(parse_failed=True)
        r.add(ERROR, os.path.basename(path), f"parse error: {e}")
        return r
    except (OSError, KeyError) as e:
        r = Report(parse_failed=True)
        r.add(ERROR, os.path.basename(path), f"cannot read: {getattr(e, 'strerror', None) or e}")
        return r
    try:
        if command in TRANSLATIONS:
            return cmd_translate(sf, flags, command)
        return _DRIVERS[command](sf, flags)
    except _EXPECTED as e:
        r = Report()
        r.add(ERROR, os.path.basename(path), str(e))
        return r
    except (lf.FuelExhausted, RecursionError) as e:
        r = Report()
        r.add(UNK, os.path.basename(path), str(e) or type(e).__name__)
        return r
    except Exception as e:  # an invariant of the kernel itself broke
        r = Report(internal=True)
        r.add(ERROR, os.path.basename(path), f"internal error: {type(e).__name__}: {e}")
        return r


def run_command(command: str, paths: list[str], flags: Flags = Flags(), read=None) -> Report:
    """Run one subcommand over the files in order.  With several files each
    item is prefixed by its file's base name."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    out = Report(strict_unknown=flags.strict_unknown)
    for p in paths:
        rep = run_file(command, p, flags, read)
        out.extend(rep, f"{os.path.basename(p)}:" if len(paths) > 1 else "")
    return out


PROFILES = {"spar2": SPAR_TWO, "sparw": SPAR_OMEGA_MINUS}
