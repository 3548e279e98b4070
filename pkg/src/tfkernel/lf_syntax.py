"""The lf dialect of the surface syntax.

    item     ::= "const" NAME ":" kind "."
               | "eq" [NAME] "(" telescope ")" "(" obj "=" obj ":" kind ")" "."
               | "check" judgement "."
    kind     ::= "Type" | "El" atom | "(" telescope ")" kind
    obj      ::= "\\" NAME ":" kind "." obj | atom atom*
    atom     ::= NAME | "(" obj ")"
    judgement::= "(" telescope ")" "valid"
               | "(" telescope ")" "|-" ( kind "kind" | kind "=" kind
                                        | obj ":" kind | obj "=" obj ":" kind )
"""

from __future__ import annotations

from tfkernel.lf import (
    LTYPE,
    LFApp,
    LFConst,
    LFConstDecl,
    LFContext,
    LFEl,
    LFEqDecl,
    LFJudgement,
    LFKindEq,
    LFKindWf,
    LFLam,
    LFObjEq,
    LFPi,
    LFSpecification,
    LFType,
    LFTyping,
    LFValid,
    LFVar,
    _lf_constants,
    lf_names,
    lf_substitute,
)
from tfkernel.syntax import LF, KEYWORDS, CheckItem, Cursor, ParseError, SourceFile, tokenize
from tfkernel.tf_core import fresh

LF_KEYWORDS = KEYWORDS | {"kind"}


class LFParser:
    def __init__(self, cur: Cursor, constants: set[str]):
        self.cur = cur
        self.constants = constants

    def name(self):
        t = self.cur.name()
        if t.text in LF_KEYWORDS:
            raise ParseError(f"expected a name, found {t.text!r}", t.line, t.col)
        return t

    def resolve(self, tok, scope: set[str]):
        if tok.text in scope:
            return LFVar(tok.text)
        if tok.text in self.constants:
            return LFConst(tok.text)
        raise ParseError(f"unknown name {tok.text}", tok.line, tok.col)

    # kinds

    def kind(self, scope: set[str]):
        c = self.cur
        if c.at("Type"):
            c.next()
            return LTYPE
        if c.at("El"):
            c.next()
            return LFEl(self.atom(scope))
        if c.at("("):
            c.next()
            entries, inner = self.telescope(scope)
            c.expect(")")
            out = self.kind(inner)
            for x, k in reversed(entries):
                out = LFPi(x, k, out)
            return out
        raise c.error("expected a kind")

    def telescope(self, scope: set[str]):
        entries = []
        inner = set(scope)
        if self.cur.at(")"):
            return entries, inner
        while True:
            tok = self.name()
            self.cur.expect(":")
            k = self.kind(inner)
            if any(n == tok.text for n, _ in entries):
                raise ParseError(f"{tok.text} is bound twice in one telescope", tok.line, tok.col)
            entries.append((tok.text, k))
            inner = inner | {tok.text}
            if not self.cur.at(","):
                return entries, inner
            self.cur.next()

    # objects

    def atom_start(self) -> bool:
        t = self.cur.peek
        return (t.kind == "NAME" and t.text not in LF_KEYWORDS) or (t.kind == "SYM" and t.text == "(")

    def atom(self, scope: set[str]):
        c = self.cur
        if c.at("("):
            c.next()
            k = self.obj(scope)
            c.expect(")")
            return k
        return self.resolve(self.name(), scope)

    def obj(self, scope: set[str]):
        c = self.cur
        if c.at("\\"):
            c.next()
            tok = self.name()
            c.expect(":")
            k = self.kind(scope)
            c.expect(".")
            return LFLam(tok.text, k, self.obj(scope | {tok.text}))
        if not self.atom_start():
            raise c.error("expected an object")
        out = self.atom(scope)
        while self.atom_start() or c.at("\\"):
            if c.at("\\"):
                out = LFApp(out, self.obj(scope))
                break
            out = LFApp(out, self.atom(scope))
        return out

    # judgements

    def kind_start(self) -> bool:
        c = self.cur
        if c.at("Type") or c.at("El"):
            return True
        return c.at("(") and c.ahead().kind == "NAME" and c.ahead(2).text == ":"

    def judgement(self) -> LFJudgement:
        c = self.cur
        c.expect("(")
        entries, inner = self.telescope(set())
        c.expect(")")
        ctx = LFContext(tuple(entries))
        names = [n for n, _ in entries]
        if len(set(names)) != len(names):
            raise c.error("context repeats a variable")
        if c.at("valid"):
            c.next()
            return LFJudgement(ctx, LFValid())
        c.expect("|-")
        if self.kind_start():
            k = self.kind(inner)
            if c.at("kind"):
                c.next()
                return LFJudgement(ctx, LFKindWf(k))
            c.expect("=")
            return LFJudgement(ctx, LFKindEq(k, self.kind(inner)))
        a = self.obj(inner)
        if c.at("="):
            c.next()
            b = self.obj(inner)
            c.expect(":")
            return LFJudgement(ctx, LFObjEq(a, b, self.kind(inner)))
        c.expect(":")
        return LFJudgement(ctx, LFTyping(a, self.kind(inner)))


def _prescan(tokens) -> list[str]:
    out = []
    for i, t in enumerate(tokens):
        if t.kind == "NAME" and t.text == "const" and (i == 0 or tokens[i - 1].text == "."):
            nxt = tokens[i + 1]
            if nxt.kind == "NAME":
                if nxt.text in out:
                    raise ParseError(f"constant {nxt.text} declared twice", nxt.line, nxt.col)
                out.append(nxt.text)
    return out


def parse_lf_file(text: str, path: str = "<input>", base: LFSpecification | None = None) -> SourceFile:
    tokens = tokenize(text)
    decls = list(base.declarations) if base else []
    constants = {d.name for d in decls if isinstance(d, LFConstDecl)}
    for n in _prescan(tokens):
        if n in constants:
            raise ParseError(f"constant {n} declared twice")
        constants.add(n)
    cur = Cursor(tokens)
    p = LFParser(cur, constants)
    items = []
    n_eq = sum(1 for d in decls if isinstance(d, LFEqDecl))
    seen = {d.ident if isinstance(d, LFEqDecl) else d.name for d in decls}
    index = 0
    while cur.peek.kind != "EOF":
        index += 1
        t = cur.next()
        match t.text if t.kind == "NAME" else None:
            case "const":
                name = p.name()
                cur.expect(":")
                d = LFConstDecl(name.text, p.kind(set()))
                cur.expect(".")
                ident = name.text
            case "eq":
                n_eq += 1
                ident = f"eq{n_eq}"
                if cur.peek.kind == "NAME":
                    ident = p.name().text
                cur.expect("(")
                entries, inner = p.telescope(set())
                cur.expect(")")
                cur.expect("(")
                a = p.obj(inner)
                cur.expect("=")
                b = p.obj(inner)
                cur.expect(":")
                k = p.kind(inner)
                cur.expect(")")
                cur.expect(".")
                d = LFEqDecl(ident, LFContext(tuple(entries)), a, b, k)
            case "check":
                j = p.judgement()
                cur.expect(".")
                items.append((f"check{index}", CheckItem(j)))
                continue
            case _:
                raise ParseError(f"expected an item, found {t.text or 'end of input'!r}", t.line, t.col)
        if ident in seen:
            raise ParseError(f"{ident} declared twice", t.line, t.col)
        seen.add(ident)
        items.append((ident, d))
        decls.append(d)
    return SourceFile(path, LF, items, LFSpecification(tuple(decls)))


def parse_lf_object(text: str, spec: LFSpecification, ctx: LFContext = LFContext()):
    cur = Cursor(tokenize(text))
    k = LFParser(cur, {d.name for d in spec.constants}).obj(ctx.names)
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r}")
    return k


def parse_lf_kind(text: str, spec: LFSpecification, ctx: LFContext = LFContext()):
    cur = Cursor(tokenize(text))
    k = LFParser(cur, {d.name for d in spec.constants}).kind(ctx.names)
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r}")
    return k


def parse_lf_judgement(text: str, spec: LFSpecification) -> LFJudgement:
    cur = Cursor(tokenize(text))
    j = LFParser(cur, {d.name for d in spec.constants}).judgement()
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r}")
    return j


def parse_lf_spec(text: str) -> LFSpecification:
    return parse_lf_file(text).spec


# ---------------------------------------------------------------------------
# printer


def _safe_binder(x: str, body):
    """A binder name that the parser will not read as a constant of body."""
    consts = _lf_constants(body)
    if x not in consts and x not in LF_KEYWORDS:
        return x, body
    x2 = fresh(x, consts | lf_names(body) | LF_KEYWORDS)
    return x2, lf_substitute(body, x, LFVar(x2))


def print_obj(k) -> str:
    match k:
        case LFVar(n) | LFConst(n):
            return n
        case LFLam(x, a, body):
            x, body = _safe_binder(x, body)
            return f"\\{x} : {print_kind(a)}. {print_obj(body)}"
        case LFApp(f, a):
            fs = print_obj(f) if not isinstance(f, LFLam) else f"({print_obj(f)})"
            return f"{fs} {_atom(a)}"
    raise TypeError(type(k).__name__)


def _atom(k) -> str:
    return print_obj(k) if isinstance(k, (LFVar, LFConst)) else f"({print_obj(k)})"


def print_kind(k) -> str:
    match k:
        case LFType():
            return "Type"
        case LFEl(c):
            return f"El {_atom(c)}"
        case LFPi():
            entries = []
            while isinstance(k, LFPi):
                x, cod = _safe_binder(k.binder, k.codomain)
                if any(x == n for n, _ in entries):
                    # a repeated name would be rejected inside one telescope
                    break
                entries.append((x, print_kind(k.domain)))
                k = cod
            return f"({', '.join(f'{n} : {s}' for n, s in entries)}) {print_kind(k)}"
    raise TypeError(type(k).__name__)


def print_context(ctx: LFContext) -> str:
    return ", ".join(f"{n} : {print_kind(k)}" for n, k in ctx.entries)


def print_judgement(j: LFJudgement) -> str:
    ctx = f"({print_context(j.context)})"
    match j.body:
        case LFValid():
            return f"{ctx} valid"
        case LFKindWf(k):
            return f"{ctx} |- {print_kind(k)} kind"
        case LFKindEq(a, b):
            return f"{ctx} |- {print_kind(a)} = {print_kind(b)}"
        case LFTyping(k, t):
            return f"{ctx} |- {print_obj(k)} : {print_kind(t)}"
        case LFObjEq(a, b, t):
            return f"{ctx} |- {print_obj(a)} = {print_obj(b)} : {print_kind(t)}"
    raise TypeError(type(j.body).__name__)


def print_decl(d) -> str:
    match d:
        case LFConstDecl(n, k):
            return f"const {n} : {print_kind(k)}."
        case LFEqDecl(ident, ctx, a, b, t):
            return f"eq {ident} ({print_context(ctx)})\n   ({print_obj(a)} = {print_obj(b)} : {print_kind(t)})."
    raise TypeError(type(d).__name__)


def print_lf(x) -> str:
    match x:
        case LFVar() | LFConst() | LFLam() | LFApp():
            return print_obj(x)
        case LFType() | LFEl() | LFPi():
            return print_kind(x)
        case LFContext():
            return print_context(x)
        case LFJudgement():
            return print_judgement(x)
        case LFConstDecl() | LFEqDecl():
            return print_decl(x)
        case LFSpecification(decls):
            return "".join(print_decl(d) + "\n" for d in decls)
        case SourceFile():
            out = []
            for _, it in x.items:
                out.append(f"check {print_judgement(it.judgement)}." if isinstance(it, CheckItem) else print_decl(it))
            return "\n".join(out) + ("\n" if out else "")
    raise TypeError(f"cannot print {type(x).__name__}")
