"""Predefined symbols and definable query forms.

The predefined symbols (singleton, equality, elementhood, plus binary union
and the nullary ``true``) are polymorphic families instantiated per use site.
The ``desugar_*`` functions expand the replacement, SQL-, XQuery- and DL-style
forms into kernel syntax.
"""

from __future__ import annotations

import re

from .kernel import (
    Apply, BigUnion, Comprehension, Concept, Family, Forall, Image, Pred, Proj, SetType, Signature,
    SimpleType, Var, fresh_name, free_vars, make_tuple, substitute, bound_names,
)

SINGLETON = "singleton"
CUP = "cup"
EQ = "eq"
IN = "in"
TRUE = "true"

PREDEFINED_NAMES = (SINGLETON, CUP, EQ, IN, TRUE)


def _singleton(name, types):
    if len(types) == 1 and isinstance(types[0], SimpleType):
        return SetType(types[0])
    return None


def _cup(name, types):
    if len(types) == 2 and isinstance(types[0], SetType) and types[0] == types[1]:
        return types[0]
    return None


def _eq(name, types):
    if len(types) == 2 and isinstance(types[0], SimpleType) and types[0] == types[1]:
        return "prop"
    return None


def _in(name, types):
    if len(types) == 2 and isinstance(types[0], SimpleType) and types[1] == SetType(types[0]):
        return "prop"
    return None


def _true(name, types):
    return "prop" if not types else None


def _exact(n):
    return lambda name: name == n


PREDEFINED_FAMILIES = (
    Family("function", _exact(SINGLETON), _singleton, SINGLETON),
    Family("function", _exact(CUP), _cup, CUP),
    Family("predicate", _exact(EQ), _eq, EQ),
    Family("predicate", _exact(IN), _in, IN),
    Family("predicate", _exact(TRUE), _true, TRUE),
)

# fixed semantics, keyed by family label
PREDEFINED_IMPLS = {
    SINGLETON: lambda name, x: frozenset((x,)),
    CUP: lambda name, a, b: a | b,
    EQ: lambda name, a, b: a == b,
    IN: lambda name, a, s: a in s,
    TRUE: lambda name: True,
}


def install_predefined(sig: Signature) -> Signature:
    if any(fam.label == SINGLETON for fam in sig.families):
        return sig
    clash = [n for n in PREDEFINED_NAMES if n in sig]
    if clash:
        raise ValueError(f"signature already declares predefined names {clash}")
    return sig.extend(families=PREDEFINED_FAMILIES)


def indexed_family(prefix: str, resolve, kind: str = "function") -> Family:
    """A family of symbols ``<prefix>_<n>`` indexed by a natural number."""
    pat = re.compile(rf"{re.escape(prefix)}_(\d+)$")
    return Family(kind, lambda name: pat.match(name) is not None, resolve, prefix)


def family_index(name: str) -> int:
    return int(name.rsplit("_", 1)[1])


# -- shorthands ---------------------------------------------------------------


def singleton(q):
    return Apply(SINGLETON, (q,))


def cup(a, b):
    return Apply(CUP, (a, b))


def eq(a, b):
    return Pred(EQ, (a, b))


def member(a, s):
    return Pred(IN, (a, s))


def true():
    return Pred(TRUE, ())


# -- definable queries --------------------------------------------------------


def desugar_replacement(x: str, domain, body):
    """``{body : x in domain}`` as a union of singletons."""
    return BigUnion(x, domain, singleton(body))


def desugar_multi_replacement(body, binders):
    """``{body : x1 in Q1, ..., xk in Qk}``; later domains may mention earlier variables."""
    binders = list(binders)
    if not binders:
        raise ValueError("replacement needs at least one binder")
    out = singleton(body)
    for x, domain in reversed(binders):
        out = BigUnion(x, domain, out)
    return out


def _avoid(*exprs):
    names = set()
    for e in exprs:
        names |= free_vars(e) | bound_names(e)
    return names


def desugar_select(indices, source, where, columns):
    """``select n1..nk from source where F``.

    ``columns[i]`` is the name under which ``where`` refers to component i+1
    of the source tuples.
    """
    indices = list(indices)
    if not indices:
        raise ValueError("select needs at least one column")
    y = fresh_name(_avoid(source, where) | set(columns), "y")
    filt = substitute(where, {c: Proj(Var(y), i + 1) for i, c in enumerate(columns)})
    filtered = Comprehension(y, source, filt)
    x = fresh_name(_avoid(filtered), "x")
    row = make_tuple(Proj(Var(x), n) for n in indices)
    return desugar_replacement(x, filtered, row)


def desugar_for_let(x: str, domain, y: str, let, where, ret):
    """``for x in domain let y = let where F return ret``."""
    pairs = desugar_replacement(x, domain, make_tuple((Var(x), let)))
    z = fresh_name(_avoid(where, ret, domain, let) | {x, y}, "z")
    proj = {x: Proj(Var(z), 1), y: Proj(Var(z), 2)}
    P = Comprehension(z, pairs, substitute(where, proj))
    return BigUnion(z, P, substitute(ret, proj))


def desugar_dl_box(concept: str, rel, query):
    """``box^c R . Q``: the members of c all of whose R-successors lie in Q."""
    avoid = _avoid(query)
    x = fresh_name(avoid, "x")
    y = fresh_name(avoid | {x}, "y")
    return Comprehension(x, Concept(concept), Forall(y, Image(rel, Var(x)), member(Var(y), query)))
