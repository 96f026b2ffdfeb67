"""Abstract syntax of signatures, types, relation/proposition/query expressions
and the value universe they denote into.

All nodes are frozen dataclasses, so structural equality and hashing come for
free and nodes can be shared between threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Union


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleType:
    """A product of base types; a 1-tuple is the base type itself."""

    components: tuple[str, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("simple types need at least one component")

    @property
    def arity(self) -> int:
        return len(self.components)

    @property
    def is_base(self) -> bool:
        return len(self.components) == 1

    def __str__(self):
        if self.is_base:
            return self.components[0]
        return "(" + ", ".join(self.components) + ")"


@dataclass(frozen=True)
class SetType:
    elem: SimpleType

    def __str__(self):
        return "{" + str(self.elem) + "}"


GeneralType = Union[SimpleType, SetType]


def base(name: str) -> SimpleType:
    return SimpleType((name,))


def product(*names: str) -> SimpleType:
    return SimpleType(tuple(names))


def set_of(t: SimpleType | str) -> SetType:
    if isinstance(t, str):
        t = base(t)
    if not isinstance(t, SimpleType):
        raise TypeError("power types do not nest")
    return SetType(t)


# -- signature declarations ---------------------------------------------------


@dataclass(frozen=True)
class BaseTypeDecl:
    name: str


@dataclass(frozen=True)
class ConceptDecl:
    name: str
    of: str


@dataclass(frozen=True)
class RelationDecl:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    args: tuple[GeneralType, ...]
    result: GeneralType


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    args: tuple[GeneralType, ...]


SignatureDecl = Union[BaseTypeDecl, ConceptDecl, RelationDecl, FunctionDecl, PredicateDecl]


@dataclass(frozen=True)
class Family:
    """An infinite family of function or predicate symbols, resolved at use sites.

    ``resolve(name, arg_types)`` returns the result type (``"prop"`` for
    predicates) or None when the family has no instance at those arguments.
    """

    kind: str  # "function" | "predicate"
    matches: Any  # callable(name) -> bool
    resolve: Any  # callable(name, tuple[GeneralType, ...]) -> GeneralType | "prop" | None
    label: str = ""


class Signature:
    """An ordered list of declarations with name lookup.

    Use :func:`qmt.checker.check_signature` to build one from untrusted
    declarations; the constructor only indexes what it is given.
    """

    def __init__(self, decls: Iterable[SignatureDecl] = (), families: Iterable[Family] = ()):
        self.decls: tuple[SignatureDecl, ...] = tuple(decls)
        self.families: tuple[Family, ...] = tuple(families)
        self._by_name: dict[str, list[SignatureDecl]] = {}
        for d in self.decls:
            self._by_name.setdefault(d.name, []).append(d)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def lookup(self, name: str) -> list[SignatureDecl]:
        return list(self._by_name.get(name, ()))

    def base_types(self) -> list[str]:
        return [d.name for d in self.decls if isinstance(d, BaseTypeDecl)]

    def is_base_type(self, name: str) -> bool:
        return any(isinstance(d, BaseTypeDecl) for d in self._by_name.get(name, ()))

    def concept(self, name: str) -> ConceptDecl | None:
        for d in self._by_name.get(name, ()):
            if isinstance(d, ConceptDecl):
                return d
        return None

    def relation(self, name: str) -> RelationDecl | None:
        for d in self._by_name.get(name, ()):
            if isinstance(d, RelationDecl):
                return d
        return None

    def functions(self, name: str) -> list[FunctionDecl]:
        return [d for d in self._by_name.get(name, ()) if isinstance(d, FunctionDecl)]

    def predicates(self, name: str) -> list[PredicateDecl]:
        return [d for d in self._by_name.get(name, ()) if isinstance(d, PredicateDecl)]

    def family(self, name: str, kind: str) -> Family | None:
        for fam in self.families:
            if fam.kind == kind and fam.matches(name):
                return fam
        return None

    def concepts(self) -> list[ConceptDecl]:
        return [d for d in self.decls if isinstance(d, ConceptDecl)]

    def relations(self) -> list[RelationDecl]:
        return [d for d in self.decls if isinstance(d, RelationDecl)]

    def extend(self, decls: Iterable[SignatureDecl] = (), families: Iterable[Family] = ()) -> "Signature":
        return Signature(self.decls + tuple(decls), self.families + tuple(families))

    def __repr__(self):
        return f"Signature({len(self.decls)} decls, {len(self.families)} families)"


# -- contexts -----------------------------------------------------------------


@dataclass(frozen=True)
class Context:
    bindings: tuple[tuple[str, SimpleType], ...] = ()

    def extend(self, name: str, t: SimpleType) -> "Context":
        # keep names distinct; the new binding shadows any older one
        kept = tuple(b for b in self.bindings if b[0] != name)
        return Context(kept + ((name, t),))

    def lookup(self, name: str) -> SimpleType | None:
        for n, t in reversed(self.bindings):
            if n == name:
                return t
        return None

    def names(self) -> list[str]:
        return [n for n, _ in self.bindings]


# -- relation expressions -----------------------------------------------------


@dataclass(frozen=True)
class Rel:
    name: str


@dataclass(frozen=True)
class Inverse:
    rel: "RelExpr"


@dataclass(frozen=True)
class Closure:
    rel: "RelExpr"


@dataclass(frozen=True)
class Compose:
    left: "RelExpr"
    right: "RelExpr"


@dataclass(frozen=True)
class RelUnion:
    left: "RelExpr"
    right: "RelExpr"


@dataclass(frozen=True)
class RelIntersect:
    left: "RelExpr"
    right: "RelExpr"


@dataclass(frozen=True)
class RelDiff:
    left: "RelExpr"
    right: "RelExpr"


RelExpr = Union[Rel, Inverse, Closure, Compose, RelUnion, RelIntersect, RelDiff]
REL_SET_OPS = (RelUnion, RelIntersect, RelDiff)


# -- queries and propositions -------------------------------------------------


@dataclass(frozen=True)
class Concept:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Apply:
    fun: str
    args: tuple["QueryExpr", ...] = ()
    # filled in by the checker once the overload is known; not part of identity
    profile: tuple[GeneralType, ...] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Literal:
    """A literal constant of a base type, i.e. a nullary function symbol
    interpreted as the value it spells out."""

    type: str
    value: Any


@dataclass(frozen=True)
class Tuple:
    items: tuple["QueryExpr", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuples need at least two components")


@dataclass(frozen=True)
class Proj:
    query: "QueryExpr"
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("projection indices start at 1")


@dataclass(frozen=True)
class Image:
    rel: RelExpr
    query: "QueryExpr"


@dataclass(frozen=True)
class BigUnion:
    var: str
    domain: "QueryExpr"
    body: "QueryExpr"


@dataclass(frozen=True)
class Comprehension:
    var: str
    domain: "QueryExpr"
    filter: "PropExpr"


QueryExpr = Union[Concept, Var, Apply, Literal, Tuple, Proj, Image, BigUnion, Comprehension]


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[QueryExpr, ...] = ()
    profile: tuple[GeneralType, ...] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    prop: "PropExpr"


@dataclass(frozen=True)
class And:
    left: "PropExpr"
    right: "PropExpr"


@dataclass(frozen=True)
class Forall:
    var: str
    domain: QueryExpr
    body: "PropExpr"


PropExpr = Union[Pred, Not, And, Forall]

BINDERS = (BigUnion, Comprehension, Forall)


def make_tuple(items) -> QueryExpr:
    items = tuple(items)
    return items[0] if len(items) == 1 else Tuple(items)


# -- values -------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Uri:
    text: str

    def __str__(self):
        return self.text

    def sort_key(self):
        return (0, self.text)


class Obj:
    """An object value; equality and hashing are up to alpha-renaming.

    The wrapped term must provide ``alpha_key()`` (see :mod:`qmt.mmt.objects`).
    """

    __slots__ = ("term", "_key")

    def __init__(self, term):
        self.term = term
        self._key = term.alpha_key()

    def __eq__(self, other):
        return isinstance(other, Obj) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Obj({self.term!r})"

    def sort_key(self):
        return (1, repr(self._key))


@dataclass(frozen=True)
class Xml:
    markup: str

    def sort_key(self):
        return (2, self.markup)


@dataclass(frozen=True)
class Tup:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuple values need arity >= 2")

    def sort_key(self):
        return (3, tuple(sort_key(v) for v in self.items))


ElementValue = Union[Uri, Obj, Xml, Tup]
Value = Union[ElementValue, frozenset]


def make_tup(items) -> ElementValue:
    items = tuple(items)
    return items[0] if len(items) == 1 else Tup(items)


def sort_key(v):
    if isinstance(v, frozenset):
        return (4, tuple(sorted(sort_key(x) for x in v)))
    return v.sort_key()


def sorted_values(values) -> list:
    return sorted(values, key=sort_key)


# -- binding structure --------------------------------------------------------


class CaptureError(Exception):
    pass


def free_vars(e) -> set[str]:
    """Variables of a query or proposition that occur outside any binder for them."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Concept, Literal)):
        return set()
    if isinstance(e, (Apply, Pred)):
        return set().union(*(free_vars(a) for a in e.args))
    if isinstance(e, Tuple):
        return set().union(*(free_vars(a) for a in e.items))
    if isinstance(e, Proj):
        return free_vars(e.query)
    if isinstance(e, Image):
        return free_vars(e.query)
    if isinstance(e, BigUnion):
        return free_vars(e.domain) | (free_vars(e.body) - {e.var})
    if isinstance(e, Comprehension):
        return free_vars(e.domain) | (free_vars(e.filter) - {e.var})
    if isinstance(e, Forall):
        return free_vars(e.domain) | (free_vars(e.body) - {e.var})
    if isinstance(e, Not):
        return free_vars(e.prop)
    if isinstance(e, And):
        return free_vars(e.left) | free_vars(e.right)
    raise TypeError(f"not an expression: {e!r}")


def _body_of(e):
    return e.filter if isinstance(e, Comprehension) else e.body


def _rebuild_binder(e, var, domain, body):
    if isinstance(e, Comprehension):
        return Comprehension(var, domain, body)
    return type(e)(var, domain, body)


def alpha_rename(e, old: str, new: str):
    """Rename every occurrence of ``old`` (free or binding) to ``new``.

    Raises :class:`CaptureError` when ``new`` is already free in ``e`` or when
    the renaming would let an existing binder capture a renamed occurrence.
    """
    if old == new:
        return e
    if new in free_vars(e):
        raise CaptureError(f"{new!r} occurs free in the expression")
    return _rename(e, old, new, frozenset())


def _rename(e, old, new, bound):
    # bound: binder names in scope that are *not* being renamed
    if isinstance(e, Var):
        if e.name == old:
            if new in bound:
                raise CaptureError(f"renaming {old!r} to {new!r} is captured by a binder")
            return Var(new)
        return e
    if isinstance(e, (Concept, Literal)):
        return e
    if isinstance(e, Apply):
        return Apply(e.fun, tuple(_rename(a, old, new, bound) for a in e.args), e.profile)
    if isinstance(e, Pred):
        return Pred(e.name, tuple(_rename(a, old, new, bound) for a in e.args), e.profile)
    if isinstance(e, Tuple):
        return Tuple(tuple(_rename(a, old, new, bound) for a in e.items))
    if isinstance(e, Proj):
        return Proj(_rename(e.query, old, new, bound), e.index)
    if isinstance(e, Image):
        return Image(e.rel, _rename(e.query, old, new, bound))
    if isinstance(e, Not):
        return Not(_rename(e.prop, old, new, bound))
    if isinstance(e, And):
        return And(_rename(e.left, old, new, bound), _rename(e.right, old, new, bound))
    if isinstance(e, BINDERS):
        domain = _rename(e.domain, old, new, bound)
        body = _body_of(e)
        if e.var == old:
            if new in free_vars(body):
                raise CaptureError(f"binder {old!r} renamed to {new!r} captures a free {new!r}")
            var = new
            body = _rename(body, old, new, bound - {new})
        else:
            var = e.var
            body = _rename(body, old, new, bound | {e.var})
        return _rebuild_binder(e, var, domain, body)
    raise TypeError(f"not an expression: {e!r}")


def fresh_name(avoid: Iterable[str], hint: str = "z") -> str:
    avoid = set(avoid)
    if hint not in avoid:
        return hint
    for i in itertools.count(1):
        cand = f"{hint}{i}"
        if cand not in avoid:
            return cand


def bound_names(e) -> set[str]:
    if isinstance(e, (Var, Concept, Literal)):
        return set()
    if isinstance(e, (Apply, Pred)):
        return set().union(*(bound_names(a) for a in e.args))
    if isinstance(e, Tuple):
        return set().union(*(bound_names(a) for a in e.items))
    if isinstance(e, (Proj, Image)):
        return bound_names(e.query)
    if isinstance(e, Not):
        return bound_names(e.prop)
    if isinstance(e, And):
        return bound_names(e.left) | bound_names(e.right)
    if isinstance(e, BINDERS):
        return {e.var} | bound_names(e.domain) | bound_names(_body_of(e))
    raise TypeError(f"not an expression: {e!r}")


def substitute(e, mapping: dict):
    """Capture-avoiding substitution of queries for free variables."""
    if not mapping:
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, (Concept, Literal)):
        return e
    if isinstance(e, Apply):
        return Apply(e.fun, tuple(substitute(a, mapping) for a in e.args), e.profile)
    if isinstance(e, Pred):
        return Pred(e.name, tuple(substitute(a, mapping) for a in e.args), e.profile)
    if isinstance(e, Tuple):
        return Tuple(tuple(substitute(a, mapping) for a in e.items))
    if isinstance(e, Proj):
        return Proj(substitute(e.query, mapping), e.index)
    if isinstance(e, Image):
        return Image(e.rel, substitute(e.query, mapping))
    if isinstance(e, Not):
        return Not(substitute(e.prop, mapping))
    if isinstance(e, And):
        return And(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, BINDERS):
        domain = substitute(e.domain, mapping)
        inner = {k: v for k, v in mapping.items() if k != e.var}
        body = _body_of(e)
        var = e.var
        incoming = set().union(*(free_vars(v) for v in inner.values())) if inner else set()
        if var in incoming:
            var = fresh_name(incoming | free_vars(body) | set(inner), e.var)
            body = alpha_rename(body, e.var, var)
        return _rebuild_binder(e, var, domain, substitute(body, inner))
    raise TypeError(f"not an expression: {e!r}")
