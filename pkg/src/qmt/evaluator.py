"""Denotational evaluation of queries and propositions over a model.

Partial function symbols signal :class:`Undefined`; by default it propagates
strictly to the whole query. With ``lenient_filter`` an undefined comprehension
filter excludes the element and an undefined quantifier body counts as false.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checker import check_query
from .index import ImageCache, Index
from .kernel import (
    And, Apply, BigUnion, Comprehension, Concept, Forall, FunctionDecl, GeneralType, Image, Literal, Not, Pred,
    PredicateDecl, Proj, SetType, Signature, SimpleType, Tup, Tuple, Uri, Var,
)
from .sugar import PREDEFINED_IMPLS, install_predefined


class Undefined(Exception):
    """The error value: an application of a partial symbol outside its domain."""

    def __init__(self, symbol: str = "", args=(), reason: str = ""):
        super().__init__(reason or f"{symbol} is undefined here")
        self.symbol = symbol
        self.args = tuple(args)
        self.reason = reason or f"{symbol} is undefined here"
        self.path: list[str] = []

    def __str__(self):
        return self.reason

    def to_dict(self, encode=repr) -> dict:
        return {
            "symbol": self.symbol,
            "args": [encode(a) for a in self.args],
            "reason": self.reason,
            "path": list(self.path),
        }


class ModelError(Exception):
    pass


def _default_literal(base_type, value):
    if isinstance(value, str):
        return Uri(value)
    raise Undefined(base_type, (value,), f"no literals of type {base_type}")


class Model:
    """A model of a signature: concept/relation indices plus host functions.

    ``functions``/``predicates`` map either a symbol name (all overloads) or a
    ``(name, profile)`` pair to a callable on values. ``families`` maps a
    family label to ``callable(name, *values)``. A callable may return None to
    signal an undefined application, or raise :class:`Undefined`.
    """

    def __init__(self, signature: Signature, index: Index, functions=None, predicates=None,
                 families=None, inhabitants=None, literal=None, validate=True):
        self.signature = install_predefined(signature)
        self.index = index
        self.functions = dict(functions or {})
        self.predicates = dict(predicates or {})
        self.families = dict(PREDEFINED_IMPLS)
        self.families.update(families or {})
        self.inhabitants = dict(inhabitants or {})  # base type -> callable(value) -> bool
        self.literal = literal or _default_literal
        if validate:
            self.validate()

    def validate(self):
        for d in self.signature.decls:
            if isinstance(d, FunctionDecl) and self._lookup(self.functions, d.name, d.args) is None:
                raise ModelError(f"no interpretation for function {d.name} at {d.args}")
            if isinstance(d, PredicateDecl) and self._lookup(self.predicates, d.name, d.args) is None:
                raise ModelError(f"no interpretation for predicate {d.name} at {d.args}")
        for fam in self.signature.families:
            if fam.label not in self.families:
                raise ModelError(f"no interpretation for symbol family {fam.label}")

    @staticmethod
    def _lookup(table, name, profile):
        fn = table.get((name, tuple(profile)))
        return fn if fn is not None else table.get(name)

    def inhabits(self, v, T: GeneralType) -> bool:
        if isinstance(T, SetType):
            return isinstance(v, frozenset) and all(self.inhabits(x, T.elem) for x in v)
        if isinstance(v, frozenset):
            return False
        if T.is_base:
            if isinstance(v, Tup):
                return False
            test = self.inhabitants.get(T.components[0])
            return True if test is None else bool(test(v))
        return (isinstance(v, Tup) and len(v.items) == T.arity
                and all(self.inhabits(x, SimpleType((a,))) for x, a in zip(v.items, T.components)))

    def resolve(self, name, profile, args, kind):
        table = self.functions if kind == "function" else self.predicates
        decls = self.signature.functions(name) if kind == "function" else self.signature.predicates(name)
        if profile is None:
            fits = [d for d in decls if len(d.args) == len(args)
                    and all(self.inhabits(v, T) for v, T in zip(args, d.args))]
            if len(fits) == 1:
                profile = fits[0].args
            elif len(fits) > 1:
                raise ModelError(f"cannot resolve overload of {name} at run time; typecheck first")
        if profile is not None and any(d.args == tuple(profile) for d in decls):
            fn = self._lookup(table, name, profile)
            if fn is not None:
                return lambda *vs: fn(*vs)
        fam = self.signature.family(name, kind)
        if fam is not None:
            impl = self.families[fam.label]
            return lambda *vs: impl(name, *vs)
        raise ModelError(f"no interpretation for {kind} {name}")


class Evaluator:
    def __init__(self, model: Model, lenient_filter: bool = False):
        self.model = model
        self.lenient_filter = lenient_filter
        self.images = ImageCache(model.index)

    def query(self, Q, env: dict):
        try:
            return self._query(Q, env)
        except Undefined as u:
            u.path.insert(0, _describe(Q))
            raise

    def prop(self, F, env: dict) -> bool:
        try:
            return self._prop(F, env)
        except Undefined as u:
            u.path.insert(0, _describe(F))
            raise

    def _query(self, Q, env):
        if isinstance(Q, Concept):
            return self.model.index.extension(Q.name)
        if isinstance(Q, Var):
            return env[Q.name]
        if isinstance(Q, Literal):
            return self.model.literal(Q.type, Q.value)
        if isinstance(Q, Apply):
            args = [self.query(a, env) for a in Q.args]
            fn = self.model.resolve(Q.fun, Q.profile, args, "function")
            out = fn(*args)
            if out is None:
                raise Undefined(Q.fun, args)
            return out
        if isinstance(Q, Tuple):
            return Tup(tuple(self.query(q, env) for q in Q.items))
        if isinstance(Q, Proj):
            v = self.query(Q.query, env)
            if isinstance(v, Tup):
                return v.items[Q.index - 1]
            return v  # a base-typed value is its own 1-tuple
        if isinstance(Q, Image):
            return self.images.image(Q.rel, self.query(Q.query, env))
        if isinstance(Q, BigUnion):
            out = set()
            for u in self.query(Q.domain, env):
                out |= self.query(Q.body, {**env, Q.var: u})
            return frozenset(out)
        if isinstance(Q, Comprehension):
            keep = []
            for u in self.query(Q.domain, env):
                try:
                    ok = self.prop(Q.filter, {**env, Q.var: u})
                except Undefined:
                    if not self.lenient_filter:
                        raise
                    ok = False
                if ok:
                    keep.append(u)
            return frozenset(keep)
        raise TypeError(f"not a query expression: {Q!r}")

    def _prop(self, F, env):
        if isinstance(F, Pred):
            args = [self.query(a, env) for a in F.args]
            fn = self.model.resolve(F.name, F.profile, args, "predicate")
            out = fn(*args)
            if out is None:
                raise Undefined(F.name, args)
            return bool(out)
        if isinstance(F, Not):
            return not self.prop(F.prop, env)
        if isinstance(F, And):
            # both sides are evaluated so that undefinedness is symmetric
            left = self.prop(F.left, env)
            right = self.prop(F.right, env)
            return left and right
        if isinstance(F, Forall):
            result = True
            for u in self.query(F.domain, env):
                try:
                    ok = self.prop(F.body, {**env, F.var: u})
                except Undefined:
                    if not self.lenient_filter:
                        raise
                    ok = False
                result = result and ok
            return result
        raise TypeError(f"not a proposition: {F!r}")


def _describe(e) -> str:
    name = type(e).__name__.lower()
    for attr in ("fun", "name", "var"):
        val = getattr(e, attr, None)
        if isinstance(val, str):
            return f"{name} {val}"
    return name


def eval_query(model: Model, Q, assignment=None, lenient_filter: bool = False):
    """Evaluate Q under an assignment; raises :class:`Undefined` on errors."""
    return Evaluator(model, lenient_filter).query(Q, dict(assignment or {}))


def eval_prop(model: Model, F, assignment=None, lenient_filter: bool = False) -> bool:
    return Evaluator(model, lenient_filter).prop(F, dict(assignment or {}))


@dataclass
class Outcome:
    type: GeneralType
    value: object = None
    error: Undefined | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_query(model: Model, Q, lenient_filter: bool = False) -> Outcome:
    """Typecheck a closed query against the model's signature and evaluate it.

    Type errors raise :class:`qmt.checker.TypeCheckError`; undefinedness is
    reported in the outcome.
    """
    elaborated, T = check_query(model.signature, Q)
    try:
        return Outcome(T, eval_query(model, elaborated, lenient_filter=lenient_filter))
    except Undefined as u:
        return Outcome(T, error=u)
