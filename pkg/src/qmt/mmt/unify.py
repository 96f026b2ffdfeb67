"""Object queries: first-order syntactic matching of a pattern against every
subobject of a library, through a subterm index keyed by head symbol.

A pattern is an object whose outer free-binder context lists its
metavariables. Each hit is ``(declaration uri, subobject, substitution)``; the
subobject and the substitution are closed over the subobject's scope with the
free binder, and the substitution is encoded as
``OMA(OMS(subst), OMA(OMS(pair), OMV(X), value), ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .objects import (
    OMA, OMBIND, OMLIT, OMS, OMV, PAIR, SUBST, Term, alpha_equal, free_variables, unwrap_free,
    wrap_free,
)


@dataclass(frozen=True)
class Occurrence:
    uri: str          # declaration containing the subobject
    term: Term
    scope: tuple      # VarDecls of the binders around the occurrence, outermost first


def subobjects(term: Term, scope=(), heads=True):
    """Yield ``(subobject, scope)`` for every subobject, the root included.
    A top-level free binder is transparent: its context becomes the scope.
    With ``heads=False`` the head of an application and the binder of a
    binding are not visited on their own."""
    ctx, body = unwrap_free(term)
    stack = [(body, tuple(scope) + tuple(ctx))]
    while stack:
        t, sc = stack.pop()
        yield t, sc
        if isinstance(t, OMA):
            if heads:
                stack.append((t.head, sc))
            stack.extend((a, sc) for a in t.args)
        elif isinstance(t, OMBIND):
            if heads:
                stack.append((t.binder, sc))
            inner = sc
            for vd in t.context:
                if vd.type is not None:
                    stack.append((vd.type, inner))
                inner = inner + (vd,)
            stack.append((t.body, inner))


def declaration_objects(lib):
    """``(uri, object)`` for every object component of every declaration."""
    for c in lib.constants.values():
        if c.type is not None:
            yield c.uri, c.type
        if c.definiens is not None:
            yield c.uri, c.definiens
    for v in lib.views.values():
        for _, o in v.assignments:
            yield v.uri, o


def head_key(t: Term):
    if isinstance(t, OMS):
        return ("sym", t.uri)
    if isinstance(t, OMA):
        return ("sym", t.head.uri) if isinstance(t.head, OMS) else ("app",)
    if isinstance(t, OMBIND):
        return ("sym", t.binder.uri) if isinstance(t.binder, OMS) else ("bind",)
    if isinstance(t, OMV):
        return ("var",)
    return ("lit",)


class SubtermIndex:
    def __init__(self, lib):
        self.by_head: dict = {}
        self.by_kind: dict = {}
        self.all: list[Occurrence] = []
        for uri, obj in declaration_objects(lib):
            for t, sc in subobjects(obj):
                occ = Occurrence(uri, t, sc)
                self.all.append(occ)
                self.by_head.setdefault(head_key(t), []).append(occ)
                self.by_kind.setdefault(type(t), []).append(occ)

    def candidates(self, pattern: Term, metavars) -> list[Occurrence]:
        if isinstance(pattern, OMV) and pattern.name in metavars:
            return self.all
        if isinstance(pattern, OMA) and not isinstance(pattern.head, OMS):
            return self.by_kind.get(OMA, [])
        if isinstance(pattern, OMBIND) and not isinstance(pattern.binder, OMS):
            return self.by_kind.get(OMBIND, [])
        return self.by_head.get(head_key(pattern), [])

    def unify(self, query: Term) -> list[tuple[str, Term, Term]]:
        ctx, pattern = unwrap_free(query)
        metavars = {vd.name for vd in ctx}
        hits = []
        for occ in self.candidates(pattern, metavars):
            s = match(pattern, occ.term, metavars)
            if s is not None:
                hits.append((occ.uri, wrap_free(occ.scope, occ.term), wrap_free(occ.scope, encode_substitution(s))))
        return hits


def match(pattern: Term, target: Term, metavars) -> dict | None:
    """First-order matching; returns the substitution or None."""
    subst: dict = {}
    if _match(pattern, target, metavars, {}, {}, 0, subst):
        return subst
    return None


def _match(p, t, meta, penv, tenv, depth, subst) -> bool:
    if isinstance(p, OMV):
        if p.name in penv:
            return isinstance(t, OMV) and tenv.get(t.name) == penv[p.name]
        if p.name in meta:
            if free_variables(t) & set(tenv):
                return False  # would escape a binder inside the matched object
            prev = subst.get(p.name)
            if prev is None:
                subst[p.name] = t
                return True
            return alpha_equal(prev, t)
        return isinstance(t, OMV) and t.name == p.name and t.name not in tenv
    if isinstance(p, OMS):
        return isinstance(t, OMS) and t.uri == p.uri
    if isinstance(p, OMLIT):
        return isinstance(t, OMLIT) and t.kind == p.kind and t.value == p.value
    if isinstance(p, OMA):
        if not isinstance(t, OMA) or len(t.args) != len(p.args):
            return False
        if not _match(p.head, t.head, meta, penv, tenv, depth, subst):
            return False
        return all(_match(a, b, meta, penv, tenv, depth, subst) for a, b in zip(p.args, t.args))
    if isinstance(p, OMBIND):
        if not isinstance(t, OMBIND) or len(t.context) != len(p.context):
            return False
        if not _match(p.binder, t.binder, meta, penv, tenv, depth, subst):
            return False
        penv, tenv = dict(penv), dict(tenv)
        for pv, tv in zip(p.context, t.context):
            if (pv.type is None) != (tv.type is None):
                return False
            if pv.type is not None and not _match(pv.type, tv.type, meta, penv, tenv, depth, subst):
                return False
            penv[pv.name] = depth
            tenv[tv.name] = depth
            depth += 1
        return _match(p.body, t.body, meta, penv, tenv, depth, subst)
    return False


def encode_substitution(subst: dict) -> Term:
    if not subst:
        return OMS(SUBST)
    return OMA(OMS(SUBST), tuple(OMA(OMS(PAIR), (OMV(x), subst[x])) for x in sorted(subst)))


def decode_substitution(obj: Term) -> tuple[tuple, dict]:
    """Inverse of the encoding; returns (scope, {metavariable: object})."""
    ctx, body = unwrap_free(obj)
    if isinstance(body, OMS) and body.uri == SUBST:
        return ctx, {}
    if not (isinstance(body, OMA) and body.head == OMS(SUBST)):
        raise ValueError("not an encoded substitution")
    out = {}
    for pair in body.args:
        if not (isinstance(pair, OMA) and pair.head == OMS(PAIR) and len(pair.args) == 2
                and isinstance(pair.args[0], OMV)):
            raise ValueError("malformed substitution pair")
        out[pair.args[0].name] = pair.args[1]
    return ctx, out
