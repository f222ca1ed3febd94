"""Hand-written recursive-descent parser for ``.ltau`` programs and ``.sig`` files.

The concrete grammar is documented (EBNF) in the README.  Parsing resolves
identifiers against the enclosing binders and the signature, desugars tuple
patterns, sequencing and generic effects, and finally renames any binder that
reuses a name so every binder in the result is distinct.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, SignatureError
from .grades import RHO, ZERO, Grade, GradeError
from .syntax import (
    UNIT, App, Box, Clause, CompType, Const, ConstSig, Delay, Fun, Handle, Let, Match, Op,
    OpSig, Pair, Return, Signature, Span, TBase, TBox, TFun, TProd, TUnit, Unbox, Unit, Var,
    fresh, is_ground, rename_free, reserve,
)

KEYWORDS = {
    "return", "let", "in", "match", "with", "perform", "as", "delay", "handle", "to",
    "unbox", "box", "fun", "unit", "rho", "base", "const", "operation",
}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:\.\d+)?)
  | (?P<sym>->|~>|[()\[\]{},:!*|=;@+])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "ident" | "kw" | "sym" | "eof"
    text: str
    span: Span


def tokenize(text: str, error=ParseError) -> list[Token]:
    tokens: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise error(f"unexpected character {text[pos]!r}", span=Span(line, col))
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ident":
            if chunk in KEYWORDS:
                kind = "kw"
            else:
                reserve(chunk)
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, Span(line, col)))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, col)))
    return tokens


class _Base:
    error = ParseError

    def __init__(self, text: str) -> None:
        self.toks = tokenize(text, self.error)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("kw", "sym")

    def fail(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise self.error(f"{msg}, found {found}", span=t.span)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.fail("expected identifier")
        t = self.tok
        self.i += 1
        return t.text

    def number(self) -> int:
        if self.tok.kind != "num":
            self.fail("expected number")
        t = self.tok
        self.i += 1
        return int(t.text)

    # grades and types are shared by programs and signatures

    def grade(self, allow_rho: bool = False) -> Grade:
        total = ZERO
        while True:
            span = self.tok.span
            if self.tok.kind == "num":
                n = self.number()
                if self.accept("*"):
                    self.expect("rho")
                    term = Grade(0, n)
                else:
                    term = Grade(n)
            elif self.accept("rho"):
                term = RHO
            else:
                self.fail("expected grade")
            if not term.is_concrete and not allow_rho:
                raise self.error("the grade variable rho is only allowed inside handler clauses",
                                 span=span)
            total = total + term
            if not self.accept("+"):
                return total

    def vtype(self, allow_rho: bool = False):
        dom = self.prod_type(allow_rho)
        if self.accept("->"):
            return TFun(dom, self.comp_type(allow_rho))
        return dom

    def comp_type(self, allow_rho: bool = False) -> CompType:
        ret = self.prod_type(allow_rho)
        self.expect("!")
        return CompType(ret, self.grade(allow_rho))

    def prod_type(self, allow_rho: bool):
        left = self.unary_type(allow_rho)
        if self.accept("*"):
            return TProd(left, self.prod_type(allow_rho))
        return left

    def unary_type(self, allow_rho: bool):
        if self.accept("["):
            g = self.grade(allow_rho)
            self.expect("]")
            return TBox(g, self.unary_type(allow_rho))
        if self.accept("unit"):
            return UNIT
        if self.accept("("):
            ty = self.vtype(allow_rho)
            self.expect(")")
            return ty
        if self.tok.kind == "ident":
            return TBase(self.ident())
        self.fail("expected type")


class _ProgramParser(_Base):
    def __init__(self, text: str, sig: Signature) -> None:
        super().__init__(text)
        self.sig = sig
        self.scope: list[str] = []
        self.clause_depth = 0

    @property
    def rho_ok(self) -> bool:
        return self.clause_depth > 0

    def program(self):
        m = self.comp()
        if self.tok.kind != "eof":
            self.fail("expected end of program")
        return m

    def bind(self, *names: str):
        outer = self

        class _Scope:
            def __enter__(self):
                outer.scope.extend(names)

            def __exit__(self, *exc):
                del outer.scope[len(outer.scope) - len(names):]

        return _Scope()

    # computations -----------------------------------------------------

    def comp(self):
        span = self.tok.span
        if self.at("delay"):
            self.i += 1
            g = self.grade(self.rho_ok)
            self.accept(";")  # "delay 2; M" and "delay 2 M" are the same
            return Delay(g, self.comp(), span=span)
        m = self.simple()
        if self.accept(";"):
            x = fresh("_")
            with self.bind(x):
                return Let(x, m, self.comp(), span=span)
        return m

    def simple(self):
        t = self.tok
        span = t.span
        if self.accept("return"):
            return Return(self.value(), span=span)
        if self.accept("let"):
            names = self.pattern()
            self.expect("=")
            bound = self.comp()
            self.expect("in")
            if len(names) == 1:
                with self.bind(names[0]):
                    return Let(names[0], bound, self.comp(), span=span)
            tmp = fresh("p")
            with self.bind(tmp, *names):
                body = self.comp()
            return Let(tmp, bound, self.destructure(Var(tmp, span=span), names, body, span), span=span)
        if self.accept("match"):
            v = self.value()
            self.expect("with")
            names = self.pattern()
            if len(names) < 2:
                self.fail("match needs a pair pattern")
            self.expect("->")
            with self.bind(*names):
                body = self.comp()
            return self.destructure(v, names, body, span)
        if self.accept("perform"):
            op = self.ident()
            if op not in self.sig.ops:
                raise ParseError(f"unknown operation {op}", span=span)
            arg = self.value()
            if self.accept("as"):
                x = self.ident()
                self.expect("in")
                with self.bind(x):
                    return Op(op, arg, x, self.comp(), span=span)
            y = fresh("y")
            return Op(op, arg, y, Return(Var(y, span=span), span=span), span=span)
        if self.accept("handle"):
            m = self.comp()
            self.expect("with")
            self.expect("{")
            clauses = []
            self.accept("|")
            if not self.at("}"):
                clauses.append(self.clause())
                while self.accept("|"):
                    clauses.append(self.clause())
            self.expect("}")
            seen = [c.op for c in clauses]
            dup = {o for o in seen if seen.count(o) > 1}
            if dup:
                raise ParseError(f"duplicate clause for {sorted(dup)[0]}", span=span)
            self.expect("to")
            x = self.ident()
            self.expect("in")
            with self.bind(x):
                body = self.comp()
            return Handle(m, tuple(clauses), x, body, span=span)
        if self.accept("unbox"):
            self.expect("@")
            g = self.grade(self.rho_ok)
            v = self.value()
            self.expect("as")
            x = self.ident()
            self.expect("in")
            with self.bind(x):
                return Unbox(g, v, x, self.comp(), span=span)
        if self.at("("):
            # either a parenthesised computation or an application whose head is parenthesised
            save = self.i
            try:
                return self.application()
            except ParseError:
                self.i = save
            self.expect("(")
            m = self.comp()
            self.expect(")")
            return m
        if self.tok.kind == "ident" or self.at("box") or self.at("fun"):
            return self.application()
        self.fail("expected computation")

    def application(self):
        span = self.tok.span
        f = self.value()
        a = self.value()
        return App(f, a, span=span)

    def clause(self) -> Clause:
        span = self.tok.span
        op = self.ident()
        if op not in self.sig.ops:
            raise ParseError(f"clause for unknown operation {op}", span=span)
        x = self.ident()
        k = self.ident()
        self.expect("->")
        self.clause_depth += 1
        try:
            with self.bind(x, k):
                body = self.comp()
        finally:
            self.clause_depth -= 1
        return Clause(op, x, k, body, span=span)

    def pattern(self) -> list[str]:
        if self.accept("("):
            names = [self.ident()]
            while self.accept(","):
                names.append(self.ident())
            self.expect(")")
            return names
        return [self.ident()]

    def destructure(self, v, names: list[str], body, span):
        """``match v with (a, (b, (c, ...)))`` for a right-nested tuple pattern."""
        if len(names) == 2:
            return Match(v, names[0], names[1], body, span=span)
        rest = fresh("q")
        inner = self.destructure(Var(rest, span=span), names[1:], body, span)
        return Match(v, names[0], rest, inner, span=span)

    # values -----------------------------------------------------------

    def value(self):
        span = self.tok.span
        if self.accept("box"):
            self.expect("@")
            g = self.grade(self.rho_ok)
            return Box(g, self.value(), span=span)
        if self.accept("fun"):
            self.expect("(")
            x = self.ident()
            self.expect(":")
            ty = self.vtype(self.rho_ok)
            self.expect(")")
            self.expect("->")
            with self.bind(x):
                return Fun(x, ty, self.comp(), span=span)
        if self.accept("("):
            if self.accept(")"):
                return Unit(span=span)
            items = [self.value()]
            while self.accept(","):
                items.append(self.value())
            self.expect(")")
            return _tuple(items, span)
        if self.tok.kind == "ident":
            name = self.ident()
            if name in self.scope:
                return Var(name, span=span)
            if self.at("(") and name in self.sig.consts:
                self.expect("(")
                args = []
                if not self.at(")"):
                    args.append(self.value())
                    while self.accept(","):
                        args.append(self.value())
                self.expect(")")
                return Const(name, tuple(args), span=span)
            if self.sig.is_constant(name):
                return Const(name, (), span=span)
            return Var(name, span=span)
        self.fail("expected value")


def _tuple(items, span):
    if len(items) == 1:
        return items[0]
    return Pair(items[0], _tuple(items[1:], span), span=span)


def parse_program(text: str, sig: Signature | None = None):
    """Parse a computation; every binder in the result has a distinct name."""
    sig = sig if sig is not None else Signature()
    m = _ProgramParser(text, sig).program()
    return alpha_normalize(m)


def parse_value(text: str, sig: Signature | None = None):
    p = _ProgramParser(text, sig if sig is not None else Signature())
    v = p.value()
    if p.tok.kind != "eof":
        p.fail("expected end of value")
    return v


def parse_type(text: str):
    p = _Base(text)
    ty = p.vtype(allow_rho=True)
    if p.tok.kind != "eof":
        p.fail("expected end of type")
    return ty


def parse_grade(text: str) -> Grade:
    p = _Base(text)
    g = p.grade(allow_rho=True)
    if p.tok.kind != "eof":
        p.fail("expected end of grade")
    return g


# ---------------------------------------------------------------------------
# Alpha-normalisation


def alpha_normalize(t):
    """Rename binders that reuse a name already seen (bound or free) in ``t``."""
    from .syntax import free_vars

    used = set(free_vars(t))
    return _norm(t, used)


def _norm(t, used: set[str]):
    from dataclasses import replace

    def pick(x: str) -> str:
        if x in used:
            x2 = fresh(x)
            used.add(x2)
            return x2
        used.add(x)
        return x

    def under(body, olds, news):
        mapping = {o: n for o, n in zip(olds, news) if o != n}
        return _norm(rename_free(body, mapping) if mapping else body, used)

    match t:
        case Var() | Unit():
            return t
        case Const(_, args):
            return replace(t, args=tuple(_norm(a, used) for a in args))
        case Pair(l, r):
            return replace(t, left=_norm(l, used), right=_norm(r, used))
        case Fun(x, _, body):
            x2 = pick(x)
            return replace(t, param=x2, body=under(body, [x], [x2]))
        case Box(_, v) | Return(v):
            return replace(t, value=_norm(v, used))
        case Let(x, a, b):
            a2 = _norm(a, used)
            x2 = pick(x)
            return replace(t, name=x2, bound=a2, body=under(b, [x], [x2]))
        case App(f, a):
            return replace(t, fn=_norm(f, used), arg=_norm(a, used))
        case Match(v, x, y, n):
            v2 = _norm(v, used)
            x2, y2 = pick(x), pick(y)
            return replace(t, scrutinee=v2, left=x2, right=y2, body=under(n, [x, y], [x2, y2]))
        case Op(_, v, x, b):
            v2 = _norm(v, used)
            x2 = pick(x)
            return replace(t, arg=v2, name=x2, body=under(b, [x], [x2]))
        case Delay(_, b):
            return replace(t, body=_norm(b, used))
        case Handle(a, clauses, x, n):
            a2 = _norm(a, used)
            cs = []
            for c in clauses:
                p, k = pick(c.arg), pick(c.cont)
                cs.append(replace(c, arg=p, cont=k, body=under(c.body, [c.arg, c.cont], [p, k])))
            x2 = pick(x)
            return replace(t, comp=a2, clauses=tuple(cs), name=x2, body=under(n, [x], [x2]))
        case Unbox(_, v, x, n):
            v2 = _norm(v, used)
            x2 = pick(x)
            return replace(t, value=v2, name=x2, body=under(n, [x], [x2]))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Signatures


class _SigParser(_Base):
    error = SignatureError

    def signature(self) -> Signature:
        sig = Signature()
        while self.tok.kind != "eof":
            span = self.tok.span
            if self.accept("base"):
                self.base_decl(sig, span)
            elif self.accept("const"):
                self.const_decl(sig, span)
            elif self.accept("operation"):
                self.op_decl(sig, span)
            else:
                self.fail("expected 'base', 'const' or 'operation'")
        return sig

    def declared(self, sig: Signature, name: str, span) -> None:
        if name in sig.bases or name in sig.consts or name in sig.ops or sig.element_base(name):
            raise SignatureError(f"{name} is declared twice", span=span)

    def base_decl(self, sig: Signature, span) -> None:
        name = self.ident()
        self.declared(sig, name, span)
        self.expect("=")
        self.expect("{")
        elems: list[str] = []
        if not self.at("}"):
            elems.append(self.ident())
            while self.accept(","):
                elems.append(self.ident())
        self.expect("}")
        if not elems:
            raise SignatureError(f"base type {name} has an empty carrier", span=span)
        for e in elems:
            if elems.count(e) > 1:
                raise SignatureError(f"element {e} listed twice", span=span)
            self.declared(sig, e, span)
        sig.bases[name] = tuple(elems)

    def ground(self, sig: Signature, span):
        ty = self.vtype()
        if not is_ground(ty):
            raise SignatureError(f"{ty} is not a ground type", span=span)
        self.check_bases(sig, ty, span)
        return ty

    def check_bases(self, sig: Signature, ty, span) -> None:
        match ty:
            case TBase(n) if n not in sig.bases:
                raise SignatureError(f"unknown base type {n}", span=span)
            case TProd(l, r):
                self.check_bases(sig, l, span)
                self.check_bases(sig, r, span)
            case TBox(_, b):
                self.check_bases(sig, b, span)

    def const_decl(self, sig: Signature, span) -> None:
        name = self.ident()
        self.declared(sig, name, span)
        self.expect(":")
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.ground(sig, span))
            while self.accept(","):
                params.append(self.ground(sig, span))
        self.expect(")")
        self.expect("->")
        result = self.ground(sig, span)
        for ty in (*params, result):
            if _has_box(ty):
                raise SignatureError("constant types must be box-free", span=span)
        self.expect("=")
        self.expect("{")
        table: dict[tuple, object] = {}
        while not self.at("}"):
            key = self.const_key(len(params))
            self.expect("->")
            table[key] = self.literal()
            if not self.accept(","):
                break
        self.expect("}")
        domain = [()]
        for p in params:
            domain = [k + (v,) for k in domain for v in sig.carrier(p)]
        missing = [k for k in domain if k not in table]
        if missing:
            raise SignatureError(f"constant {name} is not total: no entry for {missing[0]}", span=span)
        extra = [k for k in table if k not in domain]
        if extra:
            raise SignatureError(f"constant {name}: {extra[0]} is outside its domain", span=span)
        outs = sig.carrier(result)
        for v in table.values():
            if v not in outs:
                raise SignatureError(f"constant {name}: result {v} is not in the carrier of {result}",
                                     span=span)
        sig.consts[name] = ConstSig(name, tuple(params), result, table)

    def const_key(self, arity: int) -> tuple:
        if arity == 0:
            self.expect("(")
            self.expect(")")
            return ()
        if arity == 1:
            return (self.literal(),)
        self.expect("(")
        items = [self.literal()]
        while self.accept(","):
            items.append(self.literal())
        self.expect(")")
        if len(items) != arity:
            self.fail(f"expected {arity} arguments")
        return tuple(items)

    def literal(self):
        if self.accept("("):
            if self.accept(")"):
                return ()
            items = [self.literal()]
            while self.accept(","):
                items.append(self.literal())
            self.expect(")")
            out = items[-1]
            for it in reversed(items[:-1]):
                out = (it, out)
            return out
        return self.ident()

    def op_decl(self, sig: Signature, span) -> None:
        name = self.ident()
        self.declared(sig, name, span)
        self.expect(":")
        param = self.ground(sig, span)
        self.expect("~>")
        result = self.ground(sig, span)
        self.expect("!")
        try:
            dur = self.grade()
        except GradeError as e:
            raise SignatureError(str(e), span=span) from None
        sig.ops[name] = OpSig(name, param, result, dur)


def _has_box(ty) -> bool:
    match ty:
        case TBox():
            return True
        case TProd(l, r):
            return _has_box(l) or _has_box(r)
    return False


def parse_signature(text: str) -> Signature:
    return _SigParser(text).signature()


def load_signature(path: str | Path) -> Signature:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SignatureError(f"cannot read signature {path}: {e.strerror}") from None
    return parse_signature(text)


__all__ = [
    "parse_program", "parse_value", "parse_type", "parse_grade", "parse_signature",
    "load_signature", "alpha_normalize", "tokenize", "Token", "TUnit",
]
