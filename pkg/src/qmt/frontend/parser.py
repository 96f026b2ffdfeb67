"""Textual syntax for queries, propositions, relations, types and signatures.

Identifiers bound by an enclosing binder parse as variables, all others as
concept names. Sugar (replacement, select, for/let, box, exists, ||, false)
is expanded while parsing, so the result is always kernel syntax.
"""

from __future__ import annotations

import json
import re

from .. import sugar
from ..kernel import (
    And, Apply, BaseTypeDecl, BigUnion, Closure, Compose, Comprehension, Concept, ConceptDecl,
    Forall, FunctionDecl, Image, Inverse, Literal, Not, Pred, PredicateDecl, Proj, Rel, RelDiff,
    RelIntersect, RelUnion, RelationDecl, SetType, SimpleType, Tuple, Var, free_vars,
)
from ..mmt import objects

KEYWORDS = frozenset({
    "union", "in", "of", "inv", "forall", "exists", "select", "from", "where", "for", "let",
    "return", "box", "true", "false",
})

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#\#[^\n]*)
  | (?P<colref>\#\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<op>&&|\|\||->|[{}()\[\],.|&\\;+!=:^<>])
""", re.VERBOSE)

_decoder = json.JSONDecoder()


class ParseError(Exception):
    def __init__(self, message, line=None, col=None):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.col = col


class Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r})"


def _linecol(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def tokenize(text: str) -> list[Token]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "⟨":
            raise ParseError("unexpected '⟨'", *_linecol(text, pos))
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {ch!r}", *_linecol(text, pos))
        kind = m.lastgroup
        end = m.end()
        if kind == "ws":
            pos = end
            continue
        if kind == "ident" and end < n and text[end] == '"':
            try:
                s, end = _decoder.raw_decode(text, end)
            except json.JSONDecodeError:
                raise ParseError("malformed string literal", *_linecol(text, end)) from None
            toks.append(Token("lit", (m.group(), s), pos))
            pos = end
            continue
        if kind == "ident" and m.group() == "obj" and end < n and text[end] in "⟨<":
            close = "⟩" if text[end] == "⟨" else ">"
            start = end + 1
            while start < n and text[start].isspace():
                start += 1
            try:
                doc, end = _decoder.raw_decode(text, start)
                term = objects.from_json(doc)
            except (json.JSONDecodeError, objects.ObjectFormatError) as e:
                raise ParseError(f"malformed object literal: {e}", *_linecol(text, start)) from None
            while end < n and text[end].isspace():
                end += 1
            if end >= n or text[end] != close:
                raise ParseError(f"object literal must end with {close!r}", *_linecol(text, end))
            toks.append(Token("lit", ("obj", term), pos))
            pos = end + 1
            continue
        value = m.group()
        if kind == "ident" and value in KEYWORDS:
            kind = "kw"
        elif kind == "int":
            value = int(value)
        toks.append(Token(kind, value, pos))
        pos = end
    toks.append(Token("eof", None, n))
    return toks


class Parser:
    def __init__(self, text: str, variables=()):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.scope: list[str] = list(variables)
        self.no_bar = False      # inside a comprehension domain, '|' ends the domain
        self.colrefs = False     # '#n' column references allowed (select ... where)

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, *_linecol(self.text, tok.pos))

    def at(self, kind, value=None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def at_op(self, value) -> bool:
        return self.at("op", value)

    def at_kw(self, value) -> bool:
        return self.at("kw", value)

    def accept(self, kind, value=None):
        if self.at(kind, value):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind, value=None):
        t = self.accept(kind, value)
        if t is None:
            want = value if value is not None else kind
            got = self.tok.value if self.tok.kind != "eof" else "end of input"
            raise self.error(f"expected {want!r}, got {got!r}")
        return t

    def ident(self) -> str:
        if self.at("kw"):
            raise self.error(f"keyword {self.tok.value!r} cannot be used as a name")
        return self.expect("ident").value

    def attempt(self, fn):
        """Run ``fn``; on a parse error rewind and return None."""
        saved = (self.i, list(self.scope), self.no_bar, self.colrefs)
        try:
            return fn()
        except ParseError:
            self.i, self.scope, self.no_bar, self.colrefs = saved
            return None

    def done(self):
        if not self.at("eof"):
            raise self.error(f"unexpected {self.tok.value!r}")

    # -- relations ------------------------------------------------------------

    def rel(self):
        left = self.rel_compose()
        while True:
            if self.at_op("|") and not self.no_bar:
                ctor = RelUnion
            elif self.at_op("&"):
                ctor = RelIntersect
            elif self.at_op("\\"):
                ctor = RelDiff
            else:
                return left
            self.i += 1
            left = ctor(left, self.rel_compose())

    def rel_compose(self):
        left = self.rel_unary()
        while self.accept("op", ";"):
            left = Compose(left, self.rel_unary())
        return left

    def rel_unary(self):
        if self.accept("kw", "inv"):
            return Inverse(self.rel_unary())
        if self.accept("op", "("):
            saved, self.no_bar = self.no_bar, False
            r = self.rel()
            self.no_bar = saved
            self.expect("op", ")")
        else:
            r = Rel(self.ident())
        while self.accept("op", "+"):
            r = Closure(r)
        return r

    # -- queries ----------------------------------------------------------------

    def query(self):
        e = self.primary()
        while self.at_op(".") and self.peek().kind == "int":
            self.i += 1
            t = self.expect("int")
            if t.value < 1:
                raise self.error("projection indices start at 1", t)
            e = Proj(e, t.value)
        return e

    def _image(self):
        r = self.rel()
        self.expect("kw", "of")
        return Image(r, self.query())

    def primary(self):
        t = self.tok
        if t.kind == "kw":
            if t.value == "union":
                return self.big_union()
            if t.value == "select":
                return self.select()
            if t.value == "for":
                return self.for_let()
            if t.value == "box":
                return self.box()
            if t.value == "inv":
                return self._image()
            raise self.error(f"unexpected keyword {t.value!r}")
        if t.kind == "lit":
            self.i += 1
            return Literal(*t.value)
        if t.kind == "colref":
            if not self.colrefs:
                raise self.error("column references are only allowed in select ... where")
            self.i += 1
            return Var(t.value)
        if self.at_op("{"):
            return self.brace()
        if self.at_op("(") or t.kind == "ident":
            img = self.attempt(self._image)
            if img is not None:
                return img
        if self.accept("op", "("):
            saved, self.no_bar = self.no_bar, False
            items = [self.query()]
            while self.accept("op", ","):
                items.append(self.query())
            self.no_bar = saved
            self.expect("op", ")")
            return items[0] if len(items) == 1 else Tuple(tuple(items))
        if t.kind == "ident":
            self.i += 1
            if self.at_op("("):
                return Apply(t.value, self.args())
            return Var(t.value) if t.value in self.scope else Concept(t.value)
        got = t.value if t.kind != "eof" else "end of input"
        raise self.error(f"expected a query, got {got!r}")

    def args(self):
        self.expect("op", "(")
        saved, self.no_bar = self.no_bar, False
        out = []
        if not self.at_op(")"):
            out.append(self.query())
            while self.accept("op", ","):
                out.append(self.query())
        self.no_bar = saved
        self.expect("op", ")")
        return tuple(out)

    def binder_domain(self):
        self.expect("kw", "in")
        return self.query()

    def big_union(self):
        self.expect("kw", "union")
        x = self.ident()
        dom = self.binder_domain()
        self.expect("op", ".")
        self.scope.append(x)
        body = self.query()
        self.scope.pop()
        return BigUnion(x, dom, body)

    def brace(self):
        self.expect("op", "{")
        saved = self.no_bar
        if self.tok.kind == "ident" and self.peek().kind == "kw" and self.peek().value == "in":
            x = self.ident()
            self.no_bar = True
            dom = self.binder_domain()
            self.no_bar = False
            self.expect("op", "|")
            self.scope.append(x)
            F = self.prop()
            self.scope.pop()
            self.no_bar = saved
            self.expect("op", "}")
            return Comprehension(x, dom, F)
        self.no_bar = False
        body = self.query()
        if self.accept("op", ":"):
            binders = []
            depth = len(self.scope)
            while True:
                x = self.ident()
                dom = self.binder_domain()
                binders.append((x, dom))
                self.scope.append(x)
                if not self.accept("op", ","):
                    break
            del self.scope[depth:]
            self.no_bar = saved
            self.expect("op", "}")
            body = rebind(body, {x for x, _ in binders})
            return sugar.desugar_multi_replacement(body, binders)
        self.no_bar = saved
        self.expect("op", "}")
        return sugar.singleton(body)

    def select(self):
        self.expect("kw", "select")
        cols = [self.expect("int")]
        while self.accept("op", ","):
            cols.append(self.expect("int"))
        for c in cols:
            if c.value < 1:
                raise self.error("columns are numbered from 1", c)
        self.expect("kw", "from")
        source = self.query()
        if self.accept("kw", "where"):
            saved, self.colrefs = self.colrefs, True
            where = self.prop()
            self.colrefs = saved
        else:
            where = sugar.true()
        refs = [int(v[1:]) for v in free_vars(where) if v.startswith("#")]
        columns = [f"#{i}" for i in range(1, max(refs + [c.value for c in cols]) + 1)]
        return sugar.desugar_select([c.value for c in cols], source, where, columns)

    def for_let(self):
        self.expect("kw", "for")
        x = self.ident()
        dom = self.binder_domain()
        self.scope.append(x)
        self.expect("kw", "let")
        y = self.ident()
        self.expect("op", "=")
        let = self.query()
        self.scope.append(y)
        where = self.prop() if self.accept("kw", "where") else sugar.true()
        self.expect("kw", "return")
        ret = self.query()
        self.scope.pop()
        self.scope.pop()
        return sugar.desugar_for_let(x, dom, y, let, where, ret)

    def box(self):
        self.expect("kw", "box")
        self.expect("op", "^")
        c = self.ident()
        r = self.rel()
        self.expect("op", ".")
        return sugar.desugar_dl_box(c, r, self.query())

    # -- propositions -----------------------------------------------------------

    def prop(self):
        left = self.conj()
        while self.accept("op", "||"):
            right = self.conj()
            left = Not(And(Not(left), Not(right)))
        return left

    def conj(self):
        left = self.unary()
        while self.accept("op", "&&"):
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.accept("op", "!"):
            return Not(self.unary())
        if self.at_kw("forall") or self.at_kw("exists"):
            exists = self.tok.value == "exists"
            self.i += 1
            x = self.ident()
            dom = self.binder_domain()
            self.expect("op", ".")
            self.scope.append(x)
            body = self.prop()
            self.scope.pop()
            if exists:
                return Not(Forall(x, dom, Not(body)))
            return Forall(x, dom, body)
        return self.atom()

    def _comparison(self):
        a = self.query()
        if self.accept("op", "="):
            return sugar.eq(a, self.query())
        if self.accept("kw", "in"):
            return sugar.member(a, self.query())
        raise self.error("expected '=' or 'in'")

    def _predicate(self):
        name = self.ident()
        return Pred(name, self.args())

    def atom(self):
        if self.accept("kw", "true"):
            return sugar.true()
        if self.accept("kw", "false"):
            return Not(sugar.true())
        for alt in (self._comparison, self._predicate):
            got = self.attempt(alt)
            if got is not None:
                return got
        if self.accept("op", "("):
            saved, self.no_bar = self.no_bar, False
            F = self.prop()
            self.no_bar = saved
            self.expect("op", ")")
            return F
        raise self.error("expected a proposition")

    # -- types and signatures ---------------------------------------------------

    def simple_type(self):
        if self.accept("op", "("):
            comps = [self.ident()]
            while self.accept("op", ","):
                comps.append(self.ident())
            self.expect("op", ")")
            return SimpleType(tuple(comps))
        return SimpleType((self.ident(),))

    def general_type(self):
        if self.accept("op", "{"):
            t = self.simple_type()
            self.expect("op", "}")
            return SetType(t)
        return self.simple_type()

    def arg_types(self):
        # "(T, ..., T)" or a single type
        if self.at_op("("):
            self.i += 1
            if self.accept("op", ")"):
                return ()
            out = [self.general_type()]
            while self.accept("op", ","):
                out.append(self.general_type())
            self.expect("op", ")")
            return tuple(out)
        return (self.general_type(),)

    def declaration(self):
        name = self.ident()
        if self.accept("op", "<"):
            if self.accept("op", "("):
                a = self.ident()
                self.expect("op", ",")
                b = self.ident()
                self.expect("op", ")")
                return RelationDecl(name, a, b)
            return ConceptDecl(name, self.ident())
        self.expect("op", ":")
        if self.at("ident", "btp"):
            self.i += 1
            return BaseTypeDecl(name)
        args = self.arg_types()
        self.expect("op", "->")
        if self.at("ident", "prop"):
            self.i += 1
            return PredicateDecl(name, args)
        return FunctionDecl(name, args, self.general_type())

    def signature(self):
        decls = []
        while not self.at("eof"):
            decls.append(self.declaration())
            while self.accept("op", ";"):
                pass
        return decls


def rebind(e, names):
    """Turn concept references to ``names`` into variables, respecting shadowing."""
    if not names:
        return e
    if isinstance(e, Concept):
        return Var(e.name) if e.name in names else e
    if isinstance(e, (Var, Literal)):
        return e
    if isinstance(e, Apply):
        return Apply(e.fun, tuple(rebind(a, names) for a in e.args))
    if isinstance(e, Pred):
        return Pred(e.name, tuple(rebind(a, names) for a in e.args))
    if isinstance(e, Tuple):
        return Tuple(tuple(rebind(a, names) for a in e.items))
    if isinstance(e, Proj):
        return Proj(rebind(e.query, names), e.index)
    if isinstance(e, Image):
        return Image(e.rel, rebind(e.query, names))
    if isinstance(e, Not):
        return Not(rebind(e.prop, names))
    if isinstance(e, And):
        return And(rebind(e.left, names), rebind(e.right, names))
    inner = names - {e.var}
    if isinstance(e, BigUnion):
        return BigUnion(e.var, rebind(e.domain, names), rebind(e.body, inner))
    if isinstance(e, Comprehension):
        return Comprehension(e.var, rebind(e.domain, names), rebind(e.filter, inner))
    if isinstance(e, Forall):
        return Forall(e.var, rebind(e.domain, names), rebind(e.body, inner))
    raise TypeError(f"not an expression: {e!r}")


def parse_query(text: str, variables=()):
    p = Parser(text, variables)
    q = p.query()
    p.done()
    return q


def parse_prop(text: str, variables=()):
    p = Parser(text, variables)
    F = p.prop()
    p.done()
    return F


def parse_relation(text: str):
    p = Parser(text)
    r = p.rel()
    p.done()
    return r


def parse_type(text: str):
    p = Parser(text)
    t = p.general_type()
    p.done()
    return t


def parse_signature(text: str):
    return Parser(text).signature()
