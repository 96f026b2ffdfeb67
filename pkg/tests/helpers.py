"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import random

from qmt.checker import check_signature
from qmt.evaluator import Model, Undefined
from qmt.index import build_index
from qmt.kernel import (
    And, Apply, BaseTypeDecl, BigUnion, Closure, Compose, Comprehension, Concept, ConceptDecl, Forall,
    FunctionDecl, Image, Inverse, Literal, Not, Pred, PredicateDecl, Proj, Rel, RelDiff, RelIntersect,
    RelUnion, RelationDecl, SetType, Signature, SimpleType, Tup, Tuple, Uri, Var, base, product, set_of,
)
from qmt.sugar import (
    desugar_dl_box, desugar_for_let, desugar_replacement, desugar_select, install_predefined,
)
from qmt.mmt.objects import OMA, OMBIND, OMLIT, OMS, OMV, VarDecl

A, B = base("a"), base("b")

TEST_DECLS = (
    BaseTypeDecl("a"),
    BaseTypeDecl("b"),
    ConceptDecl("ca", "a"),
    ConceptDecl("da", "a"),
    ConceptDecl("cb", "b"),
    RelationDecl("r", "a", "a"),
    RelationDecl("s", "a", "a"),
    RelationDecl("t", "a", "b"),
    RelationDecl("w", "b", "a"),
    FunctionDecl("f", (A,), B),          # partial: undefined on a0
    FunctionDecl("g", (A,), A),          # total rotation
    FunctionDecl("nb", (B,), SetType(A)),
    PredicateDecl("p", (A,)),            # partial: undefined on a5
    PredicateDecl("q", (B,)),
)

A_VALUES = [Uri(f"a{i}") for i in range(6)]
B_VALUES = [Uri(f"b{i}") for i in range(6)]


def sample_signature() -> Signature:
    return install_predefined(check_signature(TEST_DECLS))


def _num(u: Uri) -> int:
    return int(u.text[1:])


def _f(u):
    if u == Uri("a0"):
        raise Undefined("f", (u,), "f is undefined at a0")
    return Uri(f"b{_num(u) % 6}")


def _g(u):
    return Uri(f"a{(_num(u) + 1) % 6}")


def _nb(u):
    return frozenset(Uri(f"a{j}") for j in range(_num(u) + 1) if j % 2 == _num(u) % 2)


def _p(u):
    if u == Uri("a5"):
        raise Undefined("p", (u,), "p is undefined at a5")
    return _num(u) % 2 == 0


def _q(u):
    return _num(u) < 3


HOST = {"f": _f, "g": _g, "nb": _nb}
HOST_PREDS = {"p": _p, "q": _q}
INHABITANTS = {"a": lambda v: isinstance(v, Uri) and v.text.startswith("a"),
               "b": lambda v: isinstance(v, Uri) and v.text.startswith("b")}


def make_model(facts) -> Model:
    sig = sample_signature()
    index = build_index(facts, sig, lambda v, a: INHABITANTS[a](v))
    return Model(sig, index, HOST, HOST_PREDS, inhabitants=INHABITANTS)


def random_facts(rng: random.Random, max_edges: int = 30, n: int = 6):
    av, bv = A_VALUES[:n], B_VALUES[:n]
    facts = []
    for c, vals in (("ca", av), ("da", av), ("cb", bv)):
        facts += [(c, v) for v in vals if rng.random() < 0.5]
    ends = {"r": (av, av), "s": (av, av), "t": (av, bv), "w": (bv, av)}
    for _ in range(rng.randint(0, max_edges)):
        name = rng.choice(sorted(ends))
        src, tgt = ends[name]
        facts.append((name, rng.choice(src), rng.choice(tgt)))
    return facts


# -- relation expressions ---------------------------------------------------------

ENDPOINTS = {"r": ("a", "a"), "s": ("a", "a"), "t": ("a", "b"), "w": ("b", "a")}


def _feasible(src, tgt, depth):
    return depth > 0 or (src, tgt) != ("b", "b")


def random_relation(rng: random.Random, src: str, tgt: str, depth: int):
    """A well-typed relation expression from src to tgt of depth at most ``depth``."""
    atoms = [n for n, e in ENDPOINTS.items() if e == (src, tgt)]
    inv_atoms = [n for n, e in ENDPOINTS.items() if e == (tgt, src)]
    options = []
    if atoms:
        options.append("atom")
    if depth > 0:
        if _feasible(tgt, src, depth - 1):
            options.append("inverse")
        if _feasible(src, tgt, depth - 1):
            options.append("setop")
            if src == tgt:
                options.append("closure")
        if any(_feasible(src, m, depth - 1) and _feasible(m, tgt, depth - 1) for m in "ab"):
            options.append("compose")
    if not options:
        return Inverse(Rel(rng.choice(inv_atoms)))
    kind = rng.choice(options)
    if kind == "atom":
        return Rel(rng.choice(atoms))
    if kind == "inverse":
        return Inverse(random_relation(rng, tgt, src, depth - 1))
    if kind == "closure":
        return Closure(random_relation(rng, src, src, depth - 1))
    if kind == "compose":
        mid = rng.choice([m for m in "ab" if _feasible(src, m, depth - 1) and _feasible(m, tgt, depth - 1)])
        return Compose(random_relation(rng, src, mid, depth - 1), random_relation(rng, mid, tgt, depth - 1))
    ctor = rng.choice([RelUnion, RelIntersect, RelDiff])
    return ctor(random_relation(rng, src, tgt, depth - 1), random_relation(rng, src, tgt, depth - 1))


def relation_depth(R) -> int:
    if isinstance(R, Rel):
        return 0
    if isinstance(R, (Inverse, Closure)):
        return 1 + relation_depth(R.rel)
    return 1 + max(relation_depth(R.left), relation_depth(R.right))


def materialize(R, facts) -> set:
    """Naive oracle: the relation denoted by R as an explicit set of pairs."""
    if isinstance(R, Rel):
        return {(f[1], f[2]) for f in facts if len(f) == 3 and f[0] == R.name}
    if isinstance(R, Inverse):
        return {(v, u) for u, v in materialize(R.rel, facts)}
    if isinstance(R, Closure):
        pairs = set(materialize(R.rel, facts))
        while True:
            extra = {(u, y) for u, v in pairs for x, y in pairs if v == x} - pairs
            if not extra:
                return pairs
            pairs |= extra
    if isinstance(R, Compose):
        left, right = materialize(R.left, facts), materialize(R.right, facts)
        return {(u, y) for u, v in left for x, y in right if v == x}
    left, right = materialize(R.left, facts), materialize(R.right, facts)
    if isinstance(R, RelUnion):
        return left | right
    if isinstance(R, RelIntersect):
        return left & right
    return left - right


def oracle_image(R, u, facts) -> frozenset:
    return frozenset(v for x, v in materialize(R, facts) if x == u)


# -- well-typed random queries ------------------------------------------------------

_NAMES = "xyzuvw"


def random_query(rng: random.Random, T, ctx: dict, depth: int):
    """A query of type T under ctx (name -> SimpleType)."""
    if isinstance(T, SetType):
        return _set_query(rng, T.elem, ctx, depth)
    return _elem_query(rng, T, ctx, depth)


def _fresh(ctx):
    for n in _NAMES:
        if n not in ctx:
            return n
    return f"v{len(ctx)}"


def _elem_query(rng, T: SimpleType, ctx, depth):
    if T.arity > 1:
        return Tuple(tuple(_elem_query(rng, SimpleType((c,)), ctx, depth - 1) for c in T.components))
    vars_here = [v for v, t in ctx.items() if t == T]
    opts = ["lit"] + (["var"] * 3 if vars_here else [])
    if depth > 0:
        opts += ["fun", "proj"]
    kind = rng.choice(opts)
    a = T.components[0]
    if kind == "var":
        return Var(rng.choice(vars_here))
    if kind == "lit":
        return Literal(a, f"{a}{rng.randrange(6)}")
    if kind == "proj":
        other = "b" if a == "a" else "a"
        comps = [a, other] if rng.random() < 0.5 else [other, a]
        return Proj(_elem_query(rng, product(*comps), ctx, depth - 1), comps.index(a) + 1)
    if a == "a":
        return Apply("g", (_elem_query(rng, A, ctx, depth - 1),))
    return Apply("f", (_elem_query(rng, A, ctx, depth - 1),))


def _set_query(rng, E: SimpleType, ctx, depth):
    opts = ["singleton"]
    if E.arity == 1:
        opts += ["concept"]
    if depth > 0:
        opts += ["union", "comprehension", "cup"]
        if E.arity == 1:
            opts += ["image"]
            if E == A:
                opts.append("nb")
    kind = rng.choice(opts)
    if kind == "concept":
        return Concept(rng.choice(["ca", "da"]) if E == A else "cb")
    if kind == "singleton":
        return Apply("singleton", (_elem_query(rng, E, ctx, depth - 1),))
    if kind == "cup":
        return Apply("cup", (_set_query(rng, E, ctx, depth - 1), _set_query(rng, E, ctx, depth - 1)))
    if kind == "nb":
        return Apply("nb", (_elem_query(rng, B, ctx, depth - 1),))
    if kind == "image":
        src = rng.choice("ab")
        R = random_relation(rng, src, E.components[0], 2)
        return Image(R, _elem_query(rng, base(src), ctx, depth - 1))
    x = _fresh(ctx)
    if kind == "union":
        dom_t = rng.choice([A, B, product("a", "b")])
        dom = _set_query(rng, dom_t, ctx, depth - 1)
        return BigUnion(x, dom, _set_query(rng, E, {**ctx, x: dom_t}, depth - 1))
    dom = _set_query(rng, E, ctx, depth - 1)
    return Comprehension(x, dom, random_prop(rng, {**ctx, x: E}, depth - 1))


def random_prop(rng, ctx, depth):
    opts = ["pred", "eq", "in", "true"]
    if depth > 0:
        opts += ["not", "and", "forall"]
    kind = rng.choice(opts)
    if kind == "true":
        return Pred("true", ())
    if kind == "pred":
        if rng.random() < 0.5:
            return Pred("p", (_elem_query(rng, A, ctx, depth - 1),))
        return Pred("q", (_elem_query(rng, B, ctx, depth - 1),))
    if kind == "eq":
        T = rng.choice([A, B])
        return Pred("eq", (_elem_query(rng, T, ctx, depth - 1), _elem_query(rng, T, ctx, depth - 1)))
    if kind == "in":
        T = rng.choice([A, B])
        return Pred("in", (_elem_query(rng, T, ctx, depth - 1), _set_query(rng, T, ctx, depth - 1)))
    if kind == "not":
        return Not(random_prop(rng, ctx, depth - 1))
    if kind == "and":
        return And(random_prop(rng, ctx, depth - 1), random_prop(rng, ctx, depth - 1))
    x = _fresh(ctx)
    T = rng.choice([A, B])
    return Forall(x, _set_query(rng, T, ctx, depth - 1), random_prop(rng, {**ctx, x: T}, depth - 1))


def random_type(rng):
    E = rng.choice([A, B, product("a", "b"), product("a", "a", "b")])
    return set_of(E) if rng.random() < 0.8 else E


def conforms(v, T) -> bool:
    """Independent shape check of a value against a type."""
    if isinstance(T, SetType):
        return isinstance(v, frozenset) and all(conforms(x, T.elem) for x in v)
    if T.arity == 1:
        return isinstance(v, Uri) and v.text[0] == T.components[0]
    return (isinstance(v, Tup) and len(v.items) == T.arity
            and all(conforms(x, SimpleType((c,))) for x, c in zip(v.items, T.components)))


def subsets(values):
    for k in range(len(values) + 1):
        yield from itertools.combinations(values, k)


# -- OpenMath objects ---------------------------------------------------------------

SYMS = [f"urn:t?s{i}" for i in range(4)]


def random_term(rng, bound=(), depth=3, names="xyz"):
    opts = ["sym", "sym"]
    if bound:
        opts += ["bvar", "bvar"]
    opts.append("lit")
    if depth > 0:
        opts += ["app", "app", "bind"]
    kind = rng.choice(opts)
    if kind == "sym":
        return OMS(rng.choice(SYMS))
    if kind == "bvar":
        return OMV(rng.choice(bound))
    if kind == "lit":
        return OMLIT("integer", str(rng.randrange(3)))
    if kind == "app":
        return OMA(OMS(rng.choice(SYMS)),
                   tuple(random_term(rng, bound, depth - 1, names) for _ in range(rng.randint(1, 2))))
    v = rng.choice(names)
    ty = OMS(rng.choice(SYMS)) if rng.random() < 0.3 else None
    return OMBIND(OMS(rng.choice(SYMS)), (VarDecl(v, ty),), random_term(rng, bound + (v,), depth - 1, names))


def term_size(t) -> int:
    if isinstance(t, OMA):
        return 1 + term_size(t.head) + sum(term_size(a) for a in t.args)
    if isinstance(t, OMBIND):
        return 1 + term_size(t.binder) + term_size(t.body) + sum(
            term_size(vd.type) for vd in t.context if vd.type is not None)
    return 1


# -- desugaring oracles ------------------------------------------------------------

def relation_family(seed: int = 0) -> dict:
    """Fixed edge sets for ``r`` over A_VALUES: empty, identity, full, chain, seeded random."""
    rng = random.Random(seed)
    av = A_VALUES
    return {
        "empty": [],
        "identity": [(u, u) for u in av],
        "full": [(u, v) for u in av for v in av],
        "chain": list(zip(av, av[1:])),
        "random": [(u, v) for u in av for v in av if rng.random() < 0.3],
    }


_SIG = sample_signature()


def fast_model(ca, da, r_edges) -> Model:
    facts = [("ca", u) for u in ca] + [("da", u) for u in da] + [("r", u, v) for u, v in r_edges]
    return Model(_SIG, build_index(facts), HOST, HOST_PREDS, inhabitants=INHABITANTS)


def succ(edges, u):
    return {v for x, v in edges if x == u}


def _pairs_in_ca():
    inner = desugar_replacement("y", Image(Rel("r"), Var("x")), Tuple((Var("x"), Var("y"))))
    return BigUnion("x", Concept("ca"), inner)


def desugar_forms():
    """(name, expansion, declared type, oracle over (ca, da, r-edges))."""
    gx = Apply("g", (Var("x"),))
    in_da = lambda v: Pred("in", (Var(v), Concept("da")))  # noqa: E731
    return [
        ("replacement", desugar_replacement("x", Concept("ca"), gx), set_of(A),
         lambda ca, da, E: {_g(u) for u in ca}),
        ("select", desugar_select([2, 1], _pairs_in_ca(), in_da("c1"), ["c1", "c2"]), set_of(product("a", "a")),
         lambda ca, da, E: {Tup((v, u)) for u in ca if u in da for v in succ(E, u)}),
        ("select-one", desugar_select([2], _pairs_in_ca(), in_da("c2"), ["c1", "c2"]), set_of(A),
         lambda ca, da, E: {v for u in ca for v in succ(E, u) if v in da}),
        ("for-let", desugar_for_let("x", Concept("ca"), "y", gx, in_da("y"), Image(Rel("r"), Var("y"))), set_of(A),
         lambda ca, da, E: {v for u in ca if _g(u) in da for v in succ(E, _g(u))}),
        ("dl-box", desugar_dl_box("ca", Rel("r"), Concept("da")), set_of(A),
         lambda ca, da, E: {u for u in ca if succ(E, u) <= set(da)}),
    ]


# -- brute-force object matching -----------------------------------------------------

def db(t, bound=()):
    """Nameless form with de Bruijn indices; free variables keep their names."""
    if isinstance(t, OMS):
        return ("S", t.uri)
    if isinstance(t, OMV):
        for i, name in enumerate(reversed(bound)):
            if name == t.name:
                return ("B", i)
        return ("F", t.name)
    if isinstance(t, OMLIT):
        return ("L", t.kind, t.value)
    if isinstance(t, OMA):
        return ("A", db(t.head, bound), tuple(db(a, bound) for a in t.args))
    inner = tuple(bound)
    types = []
    for vd in t.context:
        types.append(None if vd.type is None else db(vd.type, inner))
        inner = inner + (vd.name,)
    return ("Bind", db(t.binder, bound), tuple(types), db(t.body, inner))


def has_loose(d, depth=0) -> bool:
    tag = d[0]
    if tag == "B":
        return d[1] >= depth
    if tag == "A":
        return has_loose(d[1], depth) or any(has_loose(a, depth) for a in d[2])
    if tag == "Bind":
        return (has_loose(d[1], depth)
                or any(ty is not None and has_loose(ty, depth + k) for k, ty in enumerate(d[2]))
                or has_loose(d[3], depth + len(d[2])))
    return False


def db_match(p, t, metas, s) -> bool:
    if p[0] == "F" and p[1] in metas:
        if has_loose(t):
            return False
        if p[1] in s:
            return s[p[1]] == t
        s[p[1]] = t
        return True
    if p[0] != t[0]:
        return False
    if p[0] == "A":
        return (len(p[2]) == len(t[2]) and db_match(p[1], t[1], metas, s)
                and all(db_match(a, b, metas, s) for a, b in zip(p[2], t[2])))
    if p[0] == "Bind":
        if len(p[2]) != len(t[2]) or not db_match(p[1], t[1], metas, s):
            return False
        for a, b in zip(p[2], t[2]):
            if (a is None) != (b is None):
                return False
            if a is not None and not db_match(a, b, metas, s):
                return False
        return db_match(p[3], t[3], metas, s)
    return p == t


def all_subobjects(t, scope=()):
    """Every subobject with the binder context around it; an outer free binder is transparent."""
    if isinstance(t, OMBIND) and t.binder == OMS("urn:qmt?builtin?free"):
        scope, t = tuple(scope) + t.context, t.body
    out = [(t, tuple(scope))]
    if isinstance(t, OMA):
        out += all_subobjects(t.head, scope)
        for a in t.args:
            out += all_subobjects(a, scope)
    elif isinstance(t, OMBIND):
        out += all_subobjects(t.binder, scope)
        inner = tuple(scope)
        for vd in t.context:
            if vd.type is not None:
                out += all_subobjects(vd.type, inner)
            inner = inner + (vd,)
        out += all_subobjects(t.body, inner)
    return out


def library_objects(lib):
    for c in lib.constants.values():
        for o in (c.type, c.definiens):
            if o is not None:
                yield c.uri, o
    for v in lib.views.values():
        for _, o in v.assignments:
            yield v.uri, o


def random_library(rng, max_subterms=50):
    from qmt.mmt.library import Constant, Library, Theory

    while True:
        lib = Library()
        for i in range(rng.randint(1, 3)):
            uri = f"urn:lib?T{i}"
            consts = []
            for j in range(rng.randint(1, 3)):
                ty = random_term(rng, depth=2) if rng.random() < 0.8 else None
                df = random_term(rng, depth=2) if rng.random() < 0.5 else None
                consts.append(Constant(f"{uri}?c{j}", ty, df))
            lib.add(Theory(uri, (), tuple(consts)))
        n = sum(len(all_subobjects(o)) for _, o in library_objects(lib))
        if 0 < n <= max_subterms:
            return lib


def abstract_pattern(rng, t, metas, p=0.3):
    """Replace random subterms of ``t`` by metavariables drawn from ``metas``."""
    if rng.random() < p:
        return OMV(rng.choice(metas))
    if isinstance(t, OMA):
        return OMA(t.head, tuple(abstract_pattern(rng, a, metas, p) for a in t.args))
    if isinstance(t, OMBIND):
        return OMBIND(t.binder, t.context, abstract_pattern(rng, t.body, metas, p))
    return t


def _canon(d, scope):
    """Replace free names bound by the scope with their scope position."""
    if d is None:
        return None
    tag = d[0]
    if tag == "F" and d[1] in scope:
        return ("P", len(scope) - 1 - scope[::-1].index(d[1]))
    if tag == "A":
        return ("A", _canon(d[1], scope), tuple(_canon(a, scope) for a in d[2]))
    if tag == "Bind":
        return ("Bind", _canon(d[1], scope), tuple(_canon(t, scope) for t in d[2]), _canon(d[3], scope))
    return d


def _scope_key(scope_db, names):
    return tuple(_canon(t, names[:i]) for i, t in enumerate(scope_db))


def oracle_hit_keys(lib, metas, pattern):
    out = set()
    for uri, o in library_objects(lib):
        for sub, scope in all_subobjects(o):
            s = {}
            if db_match(db(pattern), db(sub), metas, s):
                names = tuple(vd.name for vd in scope)
                tys = tuple(None if vd.type is None else db(vd.type) for vd in scope)
                out.add((uri, _scope_key(tys, names), _canon(db(sub), names),
                         frozenset((x, _canon(v, names)) for x, v in s.items())))
    return out


def unify_hit_key(hit):
    from qmt.mmt.objects import unwrap_free
    from qmt.mmt.unify import decode_substitution

    uri, o, s = hit.items
    ctx, body = unwrap_free(o.term)
    names = tuple(vd.name for vd in ctx)
    tys = tuple(None if vd.type is None else db(vd.type) for vd in ctx)
    sctx, subst = decode_substitution(s.term)
    assert tuple(vd.name for vd in sctx) == names
    return (uri.text, _scope_key(tys, names), _canon(db(body), names),
            frozenset((x, _canon(db(v), names)) for x, v in subst.items()))


def unify_failures(rng, lib, patterns=8):
    """Check unify on random patterns drawn from ``lib``; returns (hits seen, list of failures)."""
    from qmt.kernel import Obj
    from qmt.mmt import objects
    from qmt.mmt.model import MMTFunctions
    from qmt.mmt.unify import decode_substitution

    fns = MMTFunctions(lib)
    occurrences = [t for _, o in library_objects(lib) for t, _ in all_subobjects(o)]
    failures, seen = [], 0
    for _ in range(patterns):
        metas = ["M0", "M1"]
        target = rng.choice(occurrences)
        body = abstract_pattern(rng, target, metas) if rng.random() < 0.8 else random_term(rng)
        used = sorted(n for n in objects.free_variables(body) if n in metas)
        pattern = objects.wrap_free(tuple(VarDecl(n) for n in used), body)
        hits = fns.unify(Obj(pattern))
        for h in hits:
            ctx, sub = objects.unwrap_free(h.items[1].term)
            sctx, s = decode_substitution(h.items[2].term)
            inst = objects.substitute(body, s)
            if not objects.alpha_equal(objects.wrap_free(sctx, inst), objects.wrap_free(ctx, sub)):
                failures.append(("unsound", pattern, h))
        if {unify_hit_key(h) for h in hits} != oracle_hit_keys(lib, set(used), body):
            failures.append(("hit set differs", pattern))
        seen += len(hits)
    return seen, failures
