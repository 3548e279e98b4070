"""Surface syntax for TF and TF_k: lexer, parser with arity elaboration, and
printer.  The LF dialect builds on the same lexer (see ``lf_syntax``).

    item     ::= "const" NAME ":" kind "."
               | "eq" [NAME] "(" telescope ")" "(" obj "=" obj ":" basekind ")" "."
               | "check" judgement "."
               | "derivation" sexpr "."
    kind     ::= basekind | "(" telescope ")" basekind
    basekind ::= "Type" | "El" obj
    obj      ::= NAME arg*            -- exactly as many args as the head's arity
    arg      ::= NAME | "(" obj ")" | "(" "[" binders "]" obj ")" | "[" binders "]" obj

Binders are bare names in the tf dialect and ``x : K`` in tfk.  A bare name of
higher arity in argument position stands for its eta-long form.
"""

from __future__ import annotations

import dataclasses
import re
import typing

from tfkernel.arity import BASE, Arity
from tfkernel.tf_core import (
    EMPTY,
    TYPE,
    Abstraction,
    ArityError,
    BaseKind,
    Context,
    Object,
    ProductKind,
    Symbol,
    const,
    eta_long,
    rebind_away,
    symbols,
    var,
)
from tfkernel.tf_check import (
    RULES,
    ConstDecl,
    Derivation,
    EqDecl,
    Equality,
    InstData,
    Judgement,
    Specification,
    Typing,
    Valid,
    VALID,
)

TF, TFK, LF = "tf", "tfk", "lf"
DIALECTS = (TF, TFK, LF)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line, self.col = line, col


# ---------------------------------------------------------------------------
# lexer


@dataclasses.dataclass(frozen=True)
class Token:
    kind: str  # NAME, STRING, NUM, SYM, EOF
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>--[^\n]*)|(?P<turn>\|-)|(?P<arrow>->)
    |(?P<string>"(?:[^"\\]|\\.)*")|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<num>[0-9]+)
    |(?P<sym>[()\[\],:.=\\*])""",
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - start + 1)
        col = i - start + 1
        k = m.lastgroup
        if k == "nl":
            line += 1
            start = m.end()
        elif k in ("ws", "comment"):
            pass
        elif k == "string":
            body = m.group()[1:-1]
            out.append(Token("STRING", re.sub(r"\\(.)", r"\1", body), line, col))
        elif k == "name":
            out.append(Token("NAME", m.group(), line, col))
        elif k == "num":
            out.append(Token("NUM", m.group(), line, col))
        else:
            out.append(Token("SYM", m.group(), line, col))
        i = m.end()
    out.append(Token("EOF", "", line, i - start + 1))
    return out


KEYWORDS = {"const", "eq", "check", "derivation", "Type", "El", "valid", "using"}


# ---------------------------------------------------------------------------
# items


@dataclasses.dataclass(frozen=True)
class CheckItem:
    judgement: Judgement


@dataclasses.dataclass(frozen=True)
class DerivationItem:
    derivation: Derivation


@dataclasses.dataclass
class SourceFile:
    path: str
    dialect: str
    items: list  # (ident, item) pairs
    spec: typing.Any = None

    def declarations(self):
        return [it for _, it in self.items if isinstance(it, (ConstDecl, EqDecl)) or _is_lf_decl(it)]


def _is_lf_decl(it) -> bool:
    return getattr(it, "is_lf_declaration", False)


# ---------------------------------------------------------------------------
# parser


class Cursor:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.toks[self.i]

    def ahead(self, n: int = 1) -> Token:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek
        return t.kind in ("SYM", "NAME") and t.text == text

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind not in ("SYM", "NAME"):
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def name(self) -> Token:
        t = self.next()
        if t.kind != "NAME" or t.text in KEYWORDS:
            raise ParseError(f"expected a name, found {t.text or 'end of input'!r}", t.line, t.col)
        return t

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.peek.line, self.peek.col)


Scope = dict  # name -> Symbol (variables in scope)


class TFParser:
    """Recursive descent over the shared token stream for tf and tfk."""

    def __init__(self, cur: Cursor, constants: dict[str, Symbol], labelled: bool):
        self.cur = cur
        self.constants = constants
        self.labelled = labelled

    def arity_error(self, message: str, tok: Token | None = None):
        tok = tok or self.cur.peek
        err = ArityError(f"{tok.line}:{tok.col}: {message}")
        err.line, err.col = tok.line, tok.col
        return err

    def resolve(self, tok: Token, scope: Scope) -> Symbol:
        s = scope.get(tok.text) or self.constants.get(tok.text)
        if s is None:
            raise ParseError(f"unknown name {tok.text}", tok.line, tok.col)
        return s

    # kinds

    def kind(self, scope: Scope) -> ProductKind:
        if self.cur.at("("):
            self.cur.next()
            tel, inner = self.telescope(scope)
            self.cur.expect(")")
            return ProductKind(tel, self.basekind(inner))
        return ProductKind(EMPTY, self.basekind(scope))

    def basekind(self, scope: Scope) -> BaseKind:
        if self.cur.at("Type"):
            self.cur.next()
            return TYPE
        if self.cur.at("El"):
            self.cur.next()
            return BaseKind(self.atom_or_obj(scope))
        raise self.cur.error("expected Type or El")

    def atom_or_obj(self, scope: Scope) -> Object:
        if self.cur.at("("):
            self.cur.next()
            m = self.obj(scope)
            self.cur.expect(")")
            return m
        return self.obj(scope)

    def telescope(self, scope: Scope) -> tuple[Context, Scope]:
        entries = []
        inner = dict(scope)
        if self.cur.at(")"):
            return EMPTY, inner
        while True:
            tok = self.cur.name()
            self.cur.expect(":")
            k = self.kind(inner)
            x = var(tok.text, k.arity)
            if any(s.name == x.name for s, _ in entries):
                raise self.arity_error(f"{x.name} is bound twice in one telescope", tok)
            entries.append((x, k))
            inner[x.name] = x
            if not self.cur.at(","):
                break
            self.cur.next()
        return Context(tuple(entries)), inner

    # objects

    def obj(self, scope: Scope, expected: Arity = BASE) -> Object | Abstraction:
        tok = self.cur.name()
        head = self.resolve(tok, scope)
        kids = head.arity.children
        if expected != BASE:
            # only a bare name can stand at a higher arity
            if head.arity != expected:
                raise self.arity_error(f"{head.name} has arity {head.arity}, expected {expected}", tok)
            return eta_long(head)
        args = []
        for i, a in enumerate(kids):
            if not self.arg_start():
                raise self.arity_error(f"{head.name} expects {len(kids)} arguments, found {i}", tok)
            args.append(self.arg(scope, a))
        return Object(head, tuple(args))

    def arg_start(self) -> bool:
        t = self.cur.peek
        return (t.kind == "NAME" and t.text not in KEYWORDS) or (t.kind == "SYM" and t.text in "([")

    def arg(self, scope: Scope, a: Arity) -> Abstraction:
        t = self.cur.peek
        if t.kind == "NAME":
            self.cur.next()
            s = self.resolve(t, scope)
            if s.arity != a:
                if a == BASE:
                    raise self.arity_error(f"{s.name} expects {len(s.arity.children)} arguments, found 0", t)
                raise self.arity_error(f"{s.name} has arity {s.arity}, expected {a}", t)
            return eta_long(s) if a != BASE else Abstraction((), Object(s, ()))
        if self.cur.at("["):
            return self.abstraction(scope, a)
        self.cur.expect("(")
        if self.cur.at("["):
            f = self.abstraction(scope, a)
        elif a == BASE:
            f = Abstraction((), self.obj(scope))
        else:
            f = self.obj(scope, a)
        self.cur.expect(")")
        return f

    def abstraction(self, scope: Scope, a: Arity) -> Abstraction:
        open_tok = self.cur.expect("[")
        binders, labels = [], []
        inner = dict(scope)
        kids = a.children
        if not self.cur.at("]"):
            while True:
                tok = self.cur.name()
                if len(binders) >= len(kids):
                    raise self.arity_error(f"abstraction has more binders than arity {a} allows", tok)
                if self.labelled:
                    self.cur.expect(":")
                    k = self.kind(inner)
                    if k.arity != kids[len(binders)]:
                        raise self.arity_error(f"{tok.text} : {k} has arity {k.arity}, expected {kids[len(binders)]}", tok)
                    labels.append(k)
                x = var(tok.text, kids[len(binders)])
                if x in binders or any(b.name == x.name for b in binders):
                    raise self.arity_error(f"{x.name} is bound twice", tok)
                binders.append(x)
                inner[x.name] = x
                if not self.cur.at(","):
                    break
                self.cur.next()
        self.cur.expect("]")
        if len(binders) != len(kids):
            raise self.arity_error(f"abstraction binds {len(binders)} names, arity {a} needs {len(kids)}", open_tok)
        if self.labelled != bool(labels) and binders:
            raise self.arity_error("binder labels are required in tfk and forbidden in tf", open_tok)
        body = self.obj(inner)
        return Abstraction(tuple(binders), body, tuple(labels) if labels else None)

    # judgements

    def judgement(self, scope: Scope | None = None) -> Judgement:
        self.cur.expect("(")
        ctx, inner = self.telescope(scope or {})
        self.cur.expect(")")
        if self.cur.at("valid"):
            self.cur.next()
            return Judgement(ctx, VALID)
        self.cur.expect("|-")
        m = self.obj(inner)
        if self.cur.at("="):
            self.cur.next()
            n = self.obj(inner)
            self.cur.expect(":")
            return Judgement(ctx, Equality(m, n, self.basekind(inner)))
        self.cur.expect(":")
        return Judgement(ctx, Typing(m, self.basekind(inner)))

    def scope_of(self, ctx: Context) -> Scope:
        return {s.name: s for s in ctx.dom}


def _skim_kind_arity(cur: Cursor) -> Arity:
    """Arity of the kind at the cursor, without resolving any names."""
    if not cur.at("("):
        return BASE
    cur.next()
    kids = []
    if cur.at(")"):
        cur.next()
        return BASE
    while True:
        cur.name()
        cur.expect(":")
        kids.append(_skim_kind_arity(cur))
        # skip the base kind's object to the next ',' or ')' at depth 0
        depth = 0
        while True:
            t = cur.peek
            if t.kind == "EOF":
                raise ParseError("unterminated telescope", t.line, t.col)
            if t.text in ("(", "[") and t.kind == "SYM":
                depth += 1
            elif t.text in (")", "]") and t.kind == "SYM":
                if depth == 0:
                    break
                depth -= 1
            elif t.text == "," and t.kind == "SYM" and depth == 0:
                break
            cur.next()
        if cur.at(","):
            cur.next()
            continue
        cur.expect(")")
        return Arity(tuple(kids))


def prescan_constants(tokens: list[Token]) -> dict[str, Symbol]:
    """Names and arities of every `const` item, so items may appear in any order."""
    out = {}
    cur = Cursor(tokens)
    while cur.peek.kind != "EOF":
        t = cur.next()
        if t.kind == "NAME" and t.text == "const" and (cur.i == 1 or tokens[cur.i - 2].text == "."):
            name = cur.name()
            cur.expect(":")
            if name.text in out:
                raise ParseError(f"constant {name.text} declared twice", name.line, name.col)
            out[name.text] = const(name.text, _skim_kind_arity(cur))
    return out


def parse_file(text: str, dialect: str = TF, path: str = "<input>",
               base: Specification | None = None) -> SourceFile:
    """Parse a tf or tfk source file; `base` supplies included declarations."""
    if dialect == LF:
        from tfkernel import lf_syntax

        return lf_syntax.parse_lf_file(text, path, base)
    tokens = tokenize(text)
    constants = {c.symbol.name: c.symbol for c in (base.constants if base else [])}
    for name, sym in prescan_constants(tokens).items():
        if name in constants:
            raise ParseError(f"constant {name} declared twice")
        constants[name] = sym
    cur = Cursor(tokens)
    p = TFParser(cur, constants, dialect == TFK)
    items = []
    decls = list(base.declarations) if base else []
    n_eq = sum(1 for d in decls if isinstance(d, EqDecl))
    index = 0
    while cur.peek.kind != "EOF":
        index += 1
        t = cur.next()
        match t.text if t.kind == "NAME" else None:
            case "const":
                name = cur.name()
                cur.expect(":")
                k = p.kind({})
                cur.expect(".")
                d = ConstDecl(constants[name.text], k)
                if d.symbol.arity != k.arity:
                    raise p.arity_error(f"{name.text} arity mismatch", name)
                items.append((name.text, d))
                decls.append(d)
            case "eq":
                n_eq += 1
                ident = f"eq{n_eq}"
                if cur.peek.kind == "NAME" and not cur.at("("):
                    ident = cur.name().text
                cur.expect("(")
                ctx, inner = p.telescope({})
                cur.expect(")")
                cur.expect("(")
                m = p.obj(inner)
                cur.expect("=")
                n = p.obj(inner)
                cur.expect(":")
                k = p.basekind(inner)
                cur.expect(")")
                cur.expect(".")
                d = EqDecl(ident, ctx, m, n, k)
                items.append((ident, d))
                decls.append(d)
            case "check":
                j = p.judgement()
                cur.expect(".")
                items.append((f"check{index}", CheckItem(j)))
            case "derivation":
                spec = Specification(tuple(decls), dialect == TFK)
                d = parse_sexpr_derivation(cur, spec, dialect)
                cur.expect(".")
                items.append((f"derivation{index}", DerivationItem(d)))
            case _:
                raise ParseError(f"expected an item, found {t.text or 'end of input'!r}", t.line, t.col)
    seen = set()
    for ident, it in items:
        if isinstance(it, (ConstDecl, EqDecl)):
            if ident in seen:
                raise ParseError(f"{ident} declared twice")
            seen.add(ident)
    spec = Specification(tuple(decls), dialect == TFK)
    return SourceFile(path, dialect, items, spec)


def parse_judgement(text: str, spec: Specification, dialect: str = TF) -> Judgement:
    cur = Cursor(tokenize(text))
    p = TFParser(cur, {c.symbol.name: c.symbol for c in spec.constants}, dialect == TFK)
    j = p.judgement()
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r} after judgement")
    return j


def parse_object(text: str, spec: Specification, ctx: Context = EMPTY, dialect: str = TF) -> Object:
    cur = Cursor(tokenize(text))
    p = TFParser(cur, {c.symbol.name: c.symbol for c in spec.constants}, dialect == TFK)
    m = p.obj(p.scope_of(ctx))
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r} after object")
    return m


def parse_kind(text: str, spec: Specification, ctx: Context = EMPTY, dialect: str = TF) -> ProductKind:
    cur = Cursor(tokenize(text))
    p = TFParser(cur, {c.symbol.name: c.symbol for c in spec.constants}, dialect == TFK)
    k = p.kind(p.scope_of(ctx))
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r} after kind")
    return k


def parse_spec(text: str, dialect: str = TF) -> Specification:
    return parse_file(text, dialect).spec


# ---------------------------------------------------------------------------
# printer


def _safe(f: Abstraction) -> Abstraction:
    """Rename binders whose names would be misread as some other symbol."""
    if not f.binders:
        return f
    others = {s.name for s in symbols((f.body, f.labels or ())) if s not in f.binders}
    if any(b.name in others for b in f.binders):
        return rebind_away(f, others)
    return f


def print_obj(m: Object) -> str:
    parts = [m.head.name] + [print_arg(a) for a in m.args]
    return " ".join(parts)


def print_arg(a: Abstraction) -> str:
    if not a.binders:
        return a.body.head.name if not a.body.args else f"({print_obj(a.body)})"
    a = _safe(a)
    if a.labels is None:
        binders = ", ".join(b.name for b in a.binders)
    else:
        binders = ", ".join(f"{b.name} : {print_kind(k)}" for b, k in zip(a.binders, a.labels))
    return f"([{binders}] {print_obj(a.body)})"


def print_basekind(t: BaseKind) -> str:
    if t.is_type:
        return "Type"
    m = t.carrier
    return f"El {m.head.name}" if not m.args else f"El ({print_obj(m)})"


def print_context(ctx: Context) -> str:
    return ", ".join(f"{x.name} : {print_kind(k)}" for x, k in ctx.entries)


def print_kind(k: ProductKind) -> str:
    if k.is_base:
        return print_basekind(k.target)
    return f"({print_context(k.telescope)}) {print_basekind(k.target)}"


def print_judgement(j: Judgement) -> str:
    ctx = f"({print_context(j.context)})"
    match j.body:
        case Valid():
            return f"{ctx} valid"
        case Typing(m, t):
            return f"{ctx} |- {print_obj(m)} : {print_basekind(t)}"
        case Equality(m, n, t):
            return f"{ctx} |- {print_obj(m)} = {print_obj(n)} : {print_basekind(t)}"


def print_decl(d) -> str:
    match d:
        case ConstDecl(sym, k):
            return f"const {sym.name} : {print_kind(k)}."
        case EqDecl(ident, ctx, m, n, t):
            return f"eq {ident} ({print_context(ctx)})\n   ({print_obj(m)} = {print_obj(n)} : {print_basekind(t)})."
    raise TypeError(type(d).__name__)


def print_spec(spec: Specification) -> str:
    return "".join(print_decl(d) + "\n" for d in spec.declarations)


def print_entity(x, dialect: str = TF) -> str:
    if dialect == LF:
        from tfkernel import lf_syntax

        return lf_syntax.print_lf(x)
    match x:
        case Object():
            return print_obj(x)
        case Abstraction():
            return print_arg(x)
        case BaseKind():
            return print_basekind(x)
        case ProductKind():
            return print_kind(x)
        case Context():
            return print_context(x)
        case Judgement():
            return print_judgement(x)
        case Specification():
            return print_spec(x)
        case ConstDecl() | EqDecl():
            return print_decl(x)
    raise TypeError(f"cannot print {type(x).__name__}")


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_derivation(d: Derivation, indent: int = 0) -> str:
    pad = "  " * indent
    head = f"{pad}({d.rule} {_quote(print_judgement(d.conclusion))}"
    lines = [head]
    if d.rule == "eq" and d.data is not None:
        args = " ".join(_quote(print_arg(a)) for a in d.data.args)
        lines.append(f"{pad}  (using {d.data.ident}{' ' + args if args else ''})")
    for p in d.premises:
        lines.append(emit_derivation(p, indent + 1))
    return "\n".join(lines) + ")"


def parse_derivation(text: str, spec: Specification, dialect: str = TF) -> Derivation:
    cur = Cursor(tokenize(text))
    d = parse_sexpr_derivation(cur, spec, dialect)
    if cur.peek.kind != "EOF":
        raise cur.error(f"unexpected {cur.peek.text!r} after derivation")
    return d


def parse_sexpr_derivation(cur: Cursor, spec: Specification, dialect: str) -> Derivation:
    cur.expect("(")
    rule_tok = cur.next()
    if rule_tok.kind != "NAME" or rule_tok.text not in RULES:
        raise ParseError(f"unknown rule name {rule_tok.text!r}", rule_tok.line, rule_tok.col)
    s = cur.next()
    if s.kind != "STRING":
        raise ParseError("expected a quoted judgement", s.line, s.col)
    try:
        j = parse_judgement(s.text, spec, dialect)
    except ParseError as e:
        raise ParseError(f"in judgement: {e}", s.line, s.col) from None
    data = None
    if cur.at("(") and cur.ahead().text == "using":
        cur.next()
        cur.next()
        ident = cur.name()
        decl = spec.equation(ident.text)
        if decl is None:
            raise ParseError(f"no equation named {ident.text}", ident.line, ident.col)
        args = []
        p = TFParser(Cursor([]), {c.symbol.name: c.symbol for c in spec.constants}, dialect == TFK)
        for x in decl.context.dom:
            a = cur.next()
            if a.kind != "STRING":
                raise ParseError("expected a quoted argument", a.line, a.col)
            sub = Cursor(tokenize(a.text))
            p.cur = sub
            args.append(p.arg(p.scope_of(j.context), x.arity))
            if sub.peek.kind != "EOF":
                raise ParseError(f"trailing input in argument {a.text!r}", a.line, a.col)
        cur.expect(")")
        data = InstData(ident.text, tuple(args))
    elif rule_tok.text in ("var", "const") and isinstance(j.body, Typing):
        data = InstData(j.body.term.head.name, j.body.term.args)
    premises = []
    while cur.at("("):
        premises.append(parse_sexpr_derivation(cur, spec, dialect))
    cur.expect(")")
    if rule_tok.text == "eq" and data is None:
        raise ParseError("(eq) needs a (using ...) clause", rule_tok.line, rule_tok.col)
    return Derivation(rule_tok.text, j, tuple(premises), data)


def print_file(sf: SourceFile) -> str:
    out = []
    for ident, it in sf.items:
        match it:
            case ConstDecl() | EqDecl():
                out.append(print_decl(it))
            case CheckItem(j):
                out.append(f"check {print_judgement(j)}.")
            case DerivationItem(d):
                out.append(f"derivation\n{emit_derivation(d)}.")
    return "\n".join(out) + ("\n" if out else "")
