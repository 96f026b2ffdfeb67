"""Printing kernel syntax in the textual form read by :mod:`.parser`.

``parse_query(print_query(q)) == q`` for every query whose concept names do
not clash with the names of variables bound around them.
"""

from __future__ import annotations

import json

from .. import sugar
from ..kernel import (
    And, Apply, BaseTypeDecl, BigUnion, Closure, Compose, Comprehension, Concept, ConceptDecl,
    Forall, FunctionDecl, Image, Inverse, Literal, Not, Pred, PredicateDecl, Proj, Rel, RelDiff,
    RelIntersect, RelUnion, RelationDecl, SetType, SimpleType, Tuple, Var,
)
from ..mmt import objects

_SETOPS = {RelUnion: "|", RelIntersect: "&", RelDiff: "\\"}
_BINARY = (Compose, RelUnion, RelIntersect, RelDiff)


def print_relation(r) -> str:
    if isinstance(r, Rel):
        return r.name
    if isinstance(r, Closure):
        inner = print_relation(r.rel)
        return f"{inner}+" if isinstance(r.rel, (Rel, Closure)) else f"({inner})+"
    if isinstance(r, Inverse):
        return f"inv {_rel_operand(r.rel)}"
    if isinstance(r, Compose):
        return f"{_rel_operand(r.left)} ; {_rel_operand(r.right)}"
    op = _SETOPS.get(type(r))
    if op is not None:
        return f"{_rel_operand(r.left)} {op} {_rel_operand(r.right)}"
    raise TypeError(f"not a relation expression: {r!r}")


def _rel_operand(r):
    s = print_relation(r)
    return f"({s})" if isinstance(r, _BINARY) else s


def _literal(q: Literal) -> str:
    if q.type == "obj" and not isinstance(q.value, str):
        return "obj⟨" + json.dumps(objects.to_json(q.value), ensure_ascii=False) + "⟩"
    if not isinstance(q.value, str):
        raise TypeError(f"cannot print literal value {q.value!r}")
    return q.type + json.dumps(q.value, ensure_ascii=False)


def print_query(q) -> str:
    if isinstance(q, (Concept, Var)):
        return q.name
    if isinstance(q, Literal):
        return _literal(q)
    if isinstance(q, Apply):
        if q.fun == sugar.SINGLETON and len(q.args) == 1:
            return "{" + print_query(q.args[0]) + "}"
        return q.fun + "(" + ", ".join(print_query(a) for a in q.args) + ")"
    if isinstance(q, Tuple):
        return "(" + ", ".join(print_query(a) for a in q.items) + ")"
    if isinstance(q, Proj):
        return f"{_operand(q.query)}.{q.index}"
    if isinstance(q, Image):
        return f"{print_relation(q.rel)} of {print_query(q.query)}"
    if isinstance(q, BigUnion):
        return f"union {q.var} in {_operand(q.domain)} . {print_query(q.body)}"
    if isinstance(q, Comprehension):
        return "{ " + f"{q.var} in {_operand(q.domain)} | {print_prop(q.filter)}" + " }"
    raise TypeError(f"not a query: {q!r}")


def _operand(q):
    s = print_query(q)
    return f"({s})" if isinstance(q, (Image, BigUnion)) else s


def _open_ended(F) -> bool:
    # a binder body extends as far right as possible
    if isinstance(F, Forall):
        return True
    if isinstance(F, Not):
        return _open_ended(F.prop)
    if isinstance(F, And):
        return _open_ended(F.right)
    return False


def print_prop(F) -> str:
    if isinstance(F, Pred):
        if F.name == sugar.TRUE:
            if F.args:
                raise TypeError("'true' takes no arguments")
            return "true"
        if F.name == sugar.EQ and len(F.args) == 2:
            return f"{print_query(F.args[0])} = {print_query(F.args[1])}"
        if F.name == sugar.IN:
            if len(F.args) != 2:
                raise TypeError("'in' takes two arguments")
            return f"{print_query(F.args[0])} in {print_query(F.args[1])}"
        return F.name + "(" + ", ".join(print_query(a) for a in F.args) + ")"
    if isinstance(F, Not):
        inner = print_prop(F.prop)
        return f"!({inner})" if isinstance(F.prop, And) else f"!{inner}"
    if isinstance(F, And):
        left = print_prop(F.left)
        if _open_ended(F.left):
            left = f"({left})"
        right = print_prop(F.right)
        if isinstance(F.right, And):
            right = f"({right})"
        return f"{left} && {right}"
    if isinstance(F, Forall):
        return f"forall {F.var} in {_operand(F.domain)} . {print_prop(F.body)}"
    raise TypeError(f"not a proposition: {F!r}")


def print_type(t) -> str:
    if isinstance(t, SetType):
        return "{" + print_type(t.elem) + "}"
    if isinstance(t, SimpleType):
        if len(t.components) == 1:
            return t.components[0]
        return "(" + ", ".join(t.components) + ")"
    raise TypeError(f"not a type: {t!r}")


def _args(types):
    return "(" + ", ".join(print_type(t) for t in types) + ")"


def print_declaration(d) -> str:
    if isinstance(d, BaseTypeDecl):
        return f"{d.name} : btp"
    if isinstance(d, ConceptDecl):
        return f"{d.name} < {d.of}"
    if isinstance(d, RelationDecl):
        return f"{d.name} < ({d.source}, {d.target})"
    if isinstance(d, FunctionDecl):
        return f"{d.name} : {_args(d.args)} -> {print_type(d.result)}"
    if isinstance(d, PredicateDecl):
        return f"{d.name} : {_args(d.args)} -> prop"
    raise TypeError(f"not a declaration: {d!r}")


def print_signature(decls) -> str:
    return "".join(print_declaration(d) + "\n" for d in decls)
