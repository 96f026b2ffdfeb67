"""OpenMath-style objects: symbols, variables, applications, binders, literals.

Objects compare structurally as dataclasses; :meth:`alpha_key` gives the
canonical (de Bruijn) form used wherever objects are values, so two objects
that differ only in bound-variable names are the same value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union
import xml.etree.ElementTree as ET

RESERVED = "urn:qmt?builtin"
FREE = f"{RESERVED}?free"
ARROW = f"{RESERVED}?arrow"
LAMBDA = f"{RESERVED}?lambda"
SUBST = f"{RESERVED}?subst"
PAIR = f"{RESERVED}?pair"
RESERVED_URIS = frozenset({FREE, ARROW, LAMBDA, SUBST, PAIR})

LITERAL_KINDS = ("integer", "string")


class ObjectFormatError(ValueError):
    pass


@dataclass(frozen=True)
class OMS:
    uri: str

    def alpha_key(self):
        return ("S", self.uri)


@dataclass(frozen=True)
class OMV:
    name: str

    @cached_property
    def _key(self):
        return _key(self, {}, 0)

    def alpha_key(self):
        return self._key


@dataclass(frozen=True)
class OMA:
    head: "Term"
    args: tuple["Term", ...]

    def __post_init__(self):
        if not self.args:
            raise ObjectFormatError("OMA needs at least one argument")

    @cached_property
    def _key(self):
        return _key(self, {}, 0)

    def alpha_key(self):
        return self._key


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: "Term | None" = None


@dataclass(frozen=True)
class OMBIND:
    binder: "Term"
    context: tuple[VarDecl, ...]
    body: "Term"

    @cached_property
    def _key(self):
        return _key(self, {}, 0)

    def alpha_key(self):
        return self._key


@dataclass(frozen=True)
class OMLIT:
    kind: str
    value: str

    def __post_init__(self):
        if self.kind not in LITERAL_KINDS:
            raise ObjectFormatError(f"unsupported literal kind {self.kind!r}")
        if self.kind == "integer":
            try:
                int(self.value)
            except ValueError:
                raise ObjectFormatError(f"not an integer literal: {self.value!r}") from None

    def alpha_key(self):
        return ("L", self.kind, self.value)


Term = Union[OMS, OMV, OMA, OMBIND, OMLIT]


def _key(t, env, depth):
    # env: bound name -> de Bruijn level
    if isinstance(t, OMS):
        return ("S", t.uri)
    if isinstance(t, OMV):
        lvl = env.get(t.name)
        return ("V", t.name) if lvl is None else ("B", lvl)
    if isinstance(t, OMLIT):
        return ("L", t.kind, t.value)
    if isinstance(t, OMA):
        return ("A", _key(t.head, env, depth), tuple(_key(a, env, depth) for a in t.args))
    if isinstance(t, OMBIND):
        if is_free_binder(t.binder) and not t.context:
            return _key(t.body, env, depth)
        env = dict(env)
        ctx = []
        for vd in t.context:
            ctx.append(None if vd.type is None else _key(vd.type, env, depth))
            env[vd.name] = depth
            depth += 1
        return ("Bind", _key(t.binder, env, depth), tuple(ctx), _key(t.body, env, depth))
    raise ObjectFormatError(f"not an object: {t!r}")


def alpha_equal(a: Term, b: Term) -> bool:
    return a.alpha_key() == b.alpha_key()


def is_free_binder(t) -> bool:
    return isinstance(t, OMS) and t.uri == FREE


def wrap_free(context, body: Term) -> Term:
    """Close ``body`` over ``context`` with the free binder; merges with an
    existing free wrapper and drops an empty one."""
    context = tuple(context)
    if isinstance(body, OMBIND) and is_free_binder(body.binder):
        context = context + body.context
        body = body.body
    if not context:
        return body
    return OMBIND(OMS(FREE), context, body)


def unwrap_free(t: Term) -> tuple[tuple[VarDecl, ...], Term]:
    if isinstance(t, OMBIND) and is_free_binder(t.binder):
        return t.context, t.body
    return (), t


def head_symbol(t: Term) -> str | None:
    if isinstance(t, OMS):
        return t.uri
    if isinstance(t, OMA) and isinstance(t.head, OMS):
        return t.head.uri
    if isinstance(t, OMBIND) and isinstance(t.binder, OMS):
        return t.binder.uri
    return None


def symbols(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, OMS):
            out.add(t.uri)
        elif isinstance(t, OMA):
            stack.append(t.head)
            stack.extend(t.args)
        elif isinstance(t, OMBIND):
            stack.append(t.binder)
            stack.extend(vd.type for vd in t.context if vd.type is not None)
            stack.append(t.body)
    return out


def free_variables(t: Term, bound=frozenset()) -> set[str]:
    if isinstance(t, OMV):
        return set() if t.name in bound else {t.name}
    if isinstance(t, (OMS, OMLIT)):
        return set()
    if isinstance(t, OMA):
        return free_variables(t.head, bound).union(*(free_variables(a, bound) for a in t.args))
    if isinstance(t, OMBIND):
        out = free_variables(t.binder, bound)
        for vd in t.context:
            if vd.type is not None:
                out |= free_variables(vd.type, bound)
            bound = bound | {vd.name}
        return out | free_variables(t.body, bound)
    raise ObjectFormatError(f"not an object: {t!r}")


def substitute(t: Term, subst: dict) -> Term:
    """Capture-avoiding replacement of free variables by objects."""
    if not subst:
        return t
    if isinstance(t, OMV):
        return subst.get(t.name, t)
    if isinstance(t, (OMS, OMLIT)):
        return t
    if isinstance(t, OMA):
        return OMA(substitute(t.head, subst), tuple(substitute(a, subst) for a in t.args))
    if isinstance(t, OMBIND):
        binder = substitute(t.binder, subst)
        incoming = set().union(*(free_variables(v) for v in subst.values()))
        avoid = incoming | free_variables(t) | set(subst)
        ctx = []
        subst = dict(subst)
        for vd in t.context:
            ty = None if vd.type is None else substitute(vd.type, subst)
            name = vd.name
            subst.pop(name, None)
            if name in incoming:
                name = _fresh(avoid, name)
                avoid.add(name)
                subst[vd.name] = OMV(name)
            ctx.append(VarDecl(name, ty))
        return OMBIND(binder, tuple(ctx), substitute(t.body, subst))
    raise ObjectFormatError(f"not an object: {t!r}")


def _fresh(avoid, hint):
    i = 1
    while f"{hint}{i}" in avoid:
        i += 1
    return f"{hint}{i}"


def arrow(*types: Term) -> Term:
    return OMA(OMS(ARROW), tuple(types))


def lam(context, body: Term) -> Term:
    return OMBIND(OMS(LAMBDA), tuple(context), body)


# -- JSON (TERM) encoding -----------------------------------------------------


def to_json(t: Term):
    if isinstance(t, OMS):
        return {"OMS": t.uri}
    if isinstance(t, OMV):
        return {"OMV": t.name}
    if isinstance(t, OMA):
        return {"OMA": [to_json(t.head)] + [to_json(a) for a in t.args]}
    if isinstance(t, OMBIND):
        ctx = []
        for vd in t.context:
            entry = {"name": vd.name}
            if vd.type is not None:
                entry["type"] = to_json(vd.type)
            ctx.append(entry)
        return {"OMBIND": {"binder": to_json(t.binder), "ctx": ctx, "body": to_json(t.body)}}
    if isinstance(t, OMLIT):
        return {"OMLIT": {"kind": t.kind, "value": t.value}}
    raise ObjectFormatError(f"not an object: {t!r}")


def from_json(doc) -> Term:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ObjectFormatError(f"TERM must be an object with exactly one key, got {doc!r}")
    (tag, val), = doc.items()
    if tag == "OMS":
        if not isinstance(val, str) or not val:
            raise ObjectFormatError("OMS needs a URI string")
        return OMS(val)
    if tag == "OMV":
        if not isinstance(val, str) or not val:
            raise ObjectFormatError("OMV needs a name string")
        return OMV(val)
    if tag == "OMA":
        if not isinstance(val, list) or len(val) < 2:
            raise ObjectFormatError("OMA needs a head and at least one argument")
        return OMA(from_json(val[0]), tuple(from_json(a) for a in val[1:]))
    if tag == "OMBIND":
        if not isinstance(val, dict) or set(val) != {"binder", "ctx", "body"}:
            raise ObjectFormatError("OMBIND needs exactly binder, ctx and body")
        ctx = []
        for entry in val["ctx"]:
            if not isinstance(entry, dict) or "name" not in entry or set(entry) - {"name", "type"}:
                raise ObjectFormatError(f"bad context entry {entry!r}")
            ty = entry.get("type")
            ctx.append(VarDecl(entry["name"], None if ty is None else from_json(ty)))
        return OMBIND(from_json(val["binder"]), tuple(ctx), from_json(val["body"]))
    if tag == "OMLIT":
        if not isinstance(val, dict) or set(val) != {"kind", "value"}:
            raise ObjectFormatError("OMLIT needs exactly kind and value")
        return OMLIT(val["kind"], str(val["value"]))
    raise ObjectFormatError(f"unknown TERM tag {tag!r}")


# -- XML encoding -------------------------------------------------------------


def to_xml(t: Term) -> ET.Element:
    if isinstance(t, OMS):
        return ET.Element("OMS", uri=t.uri)
    if isinstance(t, OMV):
        return ET.Element("OMV", name=t.name)
    if isinstance(t, OMLIT):
        return ET.Element("OMLIT", kind=t.kind, value=t.value)
    if isinstance(t, OMA):
        el = ET.Element("OMA")
        el.append(to_xml(t.head))
        el.extend(to_xml(a) for a in t.args)
        return el
    if isinstance(t, OMBIND):
        el = ET.Element("OMBIND")
        el.append(to_xml(t.binder))
        bvar = ET.SubElement(el, "OMBVAR")
        for vd in t.context:
            v = ET.SubElement(bvar, "OMV", name=vd.name)
            if vd.type is not None:
                v.append(to_xml(vd.type))
        el.append(to_xml(t.body))
        return el
    raise ObjectFormatError(f"not an object: {t!r}")


def from_xml(el: ET.Element) -> Term:
    tag = el.tag
    kids = list(el)
    if tag == "OMS":
        return OMS(_attr(el, "uri"))
    if tag == "OMV":
        return OMV(_attr(el, "name"))
    if tag == "OMLIT":
        return OMLIT(_attr(el, "kind"), _attr(el, "value"))
    if tag == "OMA":
        if len(kids) < 2:
            raise ObjectFormatError("OMA needs a head and at least one argument")
        return OMA(from_xml(kids[0]), tuple(from_xml(k) for k in kids[1:]))
    if tag == "OMBIND":
        if len(kids) != 3 or kids[1].tag != "OMBVAR":
            raise ObjectFormatError("OMBIND needs binder, OMBVAR and body")
        ctx = []
        for v in kids[1]:
            if v.tag != "OMV" or len(v) > 1:
                raise ObjectFormatError("OMBVAR holds OMV elements with at most one type child")
            ctx.append(VarDecl(_attr(v, "name"), from_xml(v[0]) if len(v) else None))
        return OMBIND(from_xml(kids[0]), tuple(ctx), from_xml(kids[2]))
    raise ObjectFormatError(f"unknown object element <{tag}>")


def _attr(el, name):
    v = el.get(name)
    if v is None:
        raise ObjectFormatError(f"<{el.tag}> lacks attribute {name!r}")
    return v
