"""Typing judgments: well-formed signatures, types, queries, relations and
propositions.

The query and proposition checkers also *elaborate*: they return a copy of the
expression in which every function/predicate application carries the argument
profile of the overload it resolved to, which the evaluator uses to dispatch.
"""

from __future__ import annotations

import enum

from .kernel import (
    And, Apply, BaseTypeDecl, BigUnion, Closure, Compose, Comprehension, Concept, ConceptDecl,
    Context, Forall, FunctionDecl, GeneralType, Image, Inverse, Literal, Not, Pred,
    PredicateDecl, Proj, Rel, RelDiff, RelIntersect, RelUnion, RelationDecl, SetType, Signature,
    SimpleType, Tuple, Var, free_vars,
)


class ErrorKind(enum.Enum):
    UNKNOWN_SYMBOL = "UnknownSymbol"
    ARITY_MISMATCH = "ArityMismatch"
    TYPE_MISMATCH = "TypeMismatch"
    NOT_A_PRODUCT = "NotAProduct"
    PROJ_OUT_OF_RANGE = "ProjOutOfRange"
    RELATION_ENDPOINT_MISMATCH = "RelationEndpointMismatch"
    DUPLICATE_NAME = "DuplicateName"
    OVERLOAD_AMBIGUOUS = "OverloadAmbiguous"
    UNBOUND_VARIABLE = "UnboundVariable"


class TypeCheckError(Exception):
    def __init__(self, kind: ErrorKind, message: str, path=()):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.path = tuple(path)

    def at(self, *prefix) -> "TypeCheckError":
        self.path = tuple(prefix) + self.path
        return self

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "path": "/".join(map(str, self.path)), "message": self.message}

    def __str__(self):
        where = "/".join(map(str, self.path)) or "<root>"
        return f"{self.kind.value} at {where}: {self.message}"


class SignatureError(Exception):
    def __init__(self, errors: list[TypeCheckError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


# -- signatures and types -----------------------------------------------------


def check_type(sig: Signature, T: GeneralType) -> None:
    elem = T.elem if isinstance(T, SetType) else T
    if not isinstance(elem, SimpleType):
        raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"not a type: {T!r}")
    for a in elem.components:
        if not sig.is_base_type(a):
            raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown base type {a!r}")


def check_signature(decls, base: Signature | None = None) -> Signature:
    """Check declarations in order, each against the prefix before it.

    ``base`` is an already-checked signature that the declarations extend.
    Raises :class:`SignatureError` listing every violated premise.
    """
    sig = base if base is not None else Signature()
    errors: list[TypeCheckError] = []
    for i, d in enumerate(decls):
        try:
            _check_decl(sig, d)
        except TypeCheckError as e:
            errors.append(e.at(f"decl[{i}]"))
            continue
        sig = sig.extend([d])
    if errors:
        raise SignatureError(errors)
    return sig


def _check_decl(sig: Signature, d) -> None:
    existing = sig.lookup(d.name)
    reserved = sig.family(d.name, "function") or sig.family(d.name, "predicate")
    if reserved is not None:
        raise TypeCheckError(ErrorKind.DUPLICATE_NAME, f"{d.name!r} is a predefined symbol")
    if existing:
        overload = isinstance(d, (FunctionDecl, PredicateDecl)) and all(type(e) is type(d) for e in existing)
        if not overload or any(e.args == d.args for e in existing):
            raise TypeCheckError(ErrorKind.DUPLICATE_NAME, f"{d.name!r} is already declared")
    if isinstance(d, BaseTypeDecl):
        return
    if isinstance(d, ConceptDecl):
        if not sig.is_base_type(d.of):
            raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown base type {d.of!r}")
        return
    if isinstance(d, RelationDecl):
        for a in (d.source, d.target):
            if not sig.is_base_type(a):
                raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown base type {a!r}")
        return
    if isinstance(d, FunctionDecl):
        for T in d.args + (d.result,):
            check_type(sig, T)
        return
    if isinstance(d, PredicateDecl):
        for T in d.args:
            check_type(sig, T)
        return
    raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"not a declaration: {d!r}")


# -- relations ----------------------------------------------------------------


def check_relation(sig: Signature, R) -> tuple[str, str]:
    """Return the (source, target) base types of a relation expression."""
    if isinstance(R, Rel):
        d = sig.relation(R.name)
        if d is None:
            raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown relation {R.name!r}")
        return d.source, d.target
    if isinstance(R, Inverse):
        a, b = _sub(check_relation, sig, R.rel, path="inv")
        return b, a
    if isinstance(R, Closure):
        a, b = _sub(check_relation, sig, R.rel, path="closure")
        if a != b:
            raise TypeCheckError(ErrorKind.RELATION_ENDPOINT_MISMATCH,
                                 f"transitive closure needs equal endpoints, got ({a}, {b})")
        return a, b
    if isinstance(R, Compose):
        a, b = _sub(check_relation, sig, R.left, path="left")
        b2, c = _sub(check_relation, sig, R.right, path="right")
        if b != b2:
            raise TypeCheckError(ErrorKind.RELATION_ENDPOINT_MISMATCH,
                                 f"composition midpoints differ: {b} vs {b2}")
        return a, c
    if isinstance(R, (RelUnion, RelIntersect, RelDiff)):
        left = _sub(check_relation, sig, R.left, path="left")
        right = _sub(check_relation, sig, R.right, path="right")
        if left != right:
            raise TypeCheckError(ErrorKind.RELATION_ENDPOINT_MISMATCH,
                                 f"set operation on relations of different types: {left} vs {right}")
        return left
    raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"not a relation expression: {R!r}")


def _sub(fn, *args, path):
    try:
        return fn(*args)
    except TypeCheckError as e:
        raise e.at(path)


# -- queries and propositions -------------------------------------------------


def infer_query(sig: Signature, ctx: Context, Q) -> GeneralType:
    return elaborate_query(sig, ctx, Q)[1]


def check_prop(sig: Signature, ctx: Context, F) -> None:
    elaborate_prop(sig, ctx, F)


def check_query(sig: Signature, Q, ctx: Context | None = None):
    """Typecheck a top-level query: it must be closed. Returns (elaborated, type)."""
    ctx = ctx or Context()
    unbound = free_vars(Q) - set(ctx.names())
    if unbound:
        raise TypeCheckError(ErrorKind.UNBOUND_VARIABLE, f"unbound variables: {sorted(unbound)}")
    return elaborate_query(sig, ctx, Q)


def _elem(T, what, path):
    if not isinstance(T, SimpleType):
        raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"{what} must be an element query, got {T}", (path,))
    return T


def _setelem(T, what, path):
    if not isinstance(T, SetType):
        raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"{what} must be a set query, got {T}", (path,))
    return T.elem


def elaborate_query(sig: Signature, ctx: Context, Q):
    if isinstance(Q, Concept):
        d = sig.concept(Q.name)
        if d is None:
            raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown concept {Q.name!r}")
        return Q, SetType(SimpleType((d.of,)))
    if isinstance(Q, Var):
        t = ctx.lookup(Q.name)
        if t is None:
            raise TypeCheckError(ErrorKind.UNBOUND_VARIABLE, f"unbound variable {Q.name!r}")
        return Q, t
    if isinstance(Q, Literal):
        if not sig.is_base_type(Q.type):
            raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown base type {Q.type!r} for literal")
        return Q, SimpleType((Q.type,))
    if isinstance(Q, Apply):
        args, types = _elaborate_args(sig, ctx, Q.args)
        profile, result = _resolve(sig, Q.fun, types, "function")
        return Apply(Q.fun, args, profile), result
    if isinstance(Q, Tuple):
        items, comps = [], []
        for i, item in enumerate(Q.items):
            e, T = _sub(elaborate_query, sig, ctx, item, path=f"item[{i}]")
            t = _elem(T, "tuple component", f"item[{i}]")
            if not t.is_base:
                raise TypeCheckError(ErrorKind.TYPE_MISMATCH,
                                     f"tuple components must have base types, got {t}", (f"item[{i}]",))
            items.append(e)
            comps.append(t.components[0])
        return Tuple(tuple(items)), SimpleType(tuple(comps))
    if isinstance(Q, Proj):
        e, T = _sub(elaborate_query, sig, ctx, Q.query, path="proj")
        if not isinstance(T, SimpleType) or (T.is_base and Q.index != 1):
            raise TypeCheckError(ErrorKind.NOT_A_PRODUCT, f"cannot project component {Q.index} from {T}")
        if Q.index > T.arity:
            raise TypeCheckError(ErrorKind.PROJ_OUT_OF_RANGE, f"index {Q.index} out of range for {T}")
        return Proj(e, Q.index), SimpleType((T.components[Q.index - 1],))
    if isinstance(Q, Image):
        a, b = _sub(check_relation, sig, Q.rel, path="rel")
        e, T = _sub(elaborate_query, sig, ctx, Q.query, path="arg")
        t = _elem(T, "image argument", "arg")
        if t != SimpleType((a,)):
            raise TypeCheckError(ErrorKind.TYPE_MISMATCH,
                                 f"relation expects {a}, argument has type {t}", ("arg",))
        return Image(Q.rel, e), SetType(SimpleType((b,)))
    if isinstance(Q, BigUnion):
        dom, T = _sub(elaborate_query, sig, ctx, Q.domain, path="domain")
        t = _setelem(T, "union domain", "domain")
        body, T2 = _sub(elaborate_query, sig, ctx.extend(Q.var, t), Q.body, path="body")
        _setelem(T2, "union body", "body")
        return BigUnion(Q.var, dom, body), T2
    if isinstance(Q, Comprehension):
        dom, T = _sub(elaborate_query, sig, ctx, Q.domain, path="domain")
        t = _setelem(T, "comprehension domain", "domain")
        F = _sub(elaborate_prop, sig, ctx.extend(Q.var, t), Q.filter, path="filter")
        return Comprehension(Q.var, dom, F), T
    raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"not a query expression: {Q!r}")


def elaborate_prop(sig: Signature, ctx: Context, F):
    if isinstance(F, Pred):
        args, types = _elaborate_args(sig, ctx, F.args)
        profile, _ = _resolve(sig, F.name, types, "predicate")
        return Pred(F.name, args, profile)
    if isinstance(F, Not):
        return Not(_sub(elaborate_prop, sig, ctx, F.prop, path="not"))
    if isinstance(F, And):
        return And(_sub(elaborate_prop, sig, ctx, F.left, path="left"),
                   _sub(elaborate_prop, sig, ctx, F.right, path="right"))
    if isinstance(F, Forall):
        dom, T = _sub(elaborate_query, sig, ctx, F.domain, path="domain")
        t = _setelem(T, "quantifier domain", "domain")
        body = _sub(elaborate_prop, sig, ctx.extend(F.var, t), F.body, path="body")
        return Forall(F.var, dom, body)
    raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"not a proposition: {F!r}")


def _elaborate_args(sig, ctx, args):
    out, types = [], []
    for i, a in enumerate(args):
        e, T = _sub(elaborate_query, sig, ctx, a, path=f"arg[{i}]")
        out.append(e)
        types.append(T)
    return tuple(out), tuple(types)


def _resolve(sig: Signature, name: str, types: tuple, kind: str):
    decls = sig.functions(name) if kind == "function" else sig.predicates(name)
    fam = sig.family(name, kind)
    if not decls and fam is None:
        raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"unknown {kind} symbol {name!r}")
    hits = [d for d in decls if d.args == types]
    candidates = [(d.args, d.result if kind == "function" else "prop") for d in hits]
    if fam is not None:
        res = fam.resolve(name, types)
        if res is not None:
            candidates.append((types, res))
    if len(candidates) > 1:
        raise TypeCheckError(ErrorKind.OVERLOAD_AMBIGUOUS, f"{name!r} has several overloads at {_fmt(types)}")
    if not candidates:
        if decls and all(len(d.args) != len(types) for d in decls):
            raise TypeCheckError(ErrorKind.ARITY_MISMATCH,
                                 f"{name!r} takes {sorted({len(d.args) for d in decls})} arguments, got {len(types)}")
        if fam is not None and not decls:
            raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"{name!r} is not defined at {_fmt(types)}")
        raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"no overload of {name!r} accepts {_fmt(types)}")
    return candidates[0]


def _fmt(types):
    return "(" + ", ".join(str(t) for t in types) + ")"
