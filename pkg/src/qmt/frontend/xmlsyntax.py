"""XML syntax for queries: one element per production.

Queries: ``<concept name/>``, ``<var name/>``, ``<literal type>``,
``<apply fun>``, ``<tuple>``, ``<proj i>``, ``<image>`` (a relation then a
query), ``<bigunion var>`` and ``<comprehension var>`` (domain then body).
Relations: ``<rel name/>`` or ``<rel op="inverse|closure|compose|union|intersect|diff">``.
Propositions: ``<prop pred>`` or ``<prop op="not|and|forall">``.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

from ..kernel import (
    And, Apply, BigUnion, Closure, Compose, Comprehension, Concept, Forall, Image, Inverse, Literal,
    Not, Pred, Proj, Rel, RelDiff, RelIntersect, RelUnion, Tuple, Var,
)
from ..mmt import objects
from .parser import ParseError

_REL_OPS = {
    "inverse": (Inverse, 1),
    "closure": (Closure, 1),
    "compose": (Compose, 2),
    "union": (RelUnion, 2),
    "intersect": (RelIntersect, 2),
    "diff": (RelDiff, 2),
}
_REL_NAMES = {ctor: op for op, (ctor, _) in _REL_OPS.items()}


def _err(el, msg):
    return ParseError(f"<{el.tag}>: {msg}")


def _attr(el, name):
    v = el.get(name)
    if v is None:
        raise _err(el, f"missing attribute {name!r}")
    return v


def _kids(el, n=None):
    kids = list(el)
    if n is not None and len(kids) != n:
        raise _err(el, f"expected {n} child element(s), got {len(kids)}")
    return kids


def _leaf(el):
    if len(el):
        raise _err(el, "takes no child elements")


# -- XML -> AST ------------------------------------------------------------------


def relation_from_xml(el):
    if el.tag != "rel":
        raise _err(el, "expected a <rel> element")
    op = el.get("op")
    if op is None:
        _leaf(el)
        return Rel(_attr(el, "name"))
    if op not in _REL_OPS:
        raise _err(el, f"unknown relation operator {op!r}")
    ctor, arity = _REL_OPS[op]
    return ctor(*(relation_from_xml(k) for k in _kids(el, arity)))


def query_from_xml(el):
    tag = el.tag
    if tag == "concept":
        _leaf(el)
        return Concept(_attr(el, "name"))
    if tag == "var":
        _leaf(el)
        return Var(_attr(el, "name"))
    if tag == "literal":
        ty = _attr(el, "type")
        if ty == "obj":
            (k,) = _kids(el, 1)
            try:
                return Literal(ty, objects.from_xml(k))
            except objects.ObjectFormatError as e:
                raise _err(el, str(e)) from None
        _leaf(el)
        return Literal(ty, el.text or "")
    if tag == "apply":
        return Apply(_attr(el, "fun"), tuple(query_from_xml(k) for k in el))
    if tag == "tuple":
        kids = _kids(el)
        if len(kids) < 2:
            raise _err(el, "tuples have at least two components")
        return Tuple(tuple(query_from_xml(k) for k in kids))
    if tag == "proj":
        try:
            i = int(_attr(el, "i"))
        except ValueError:
            raise _err(el, "attribute 'i' must be an integer") from None
        if i < 1:
            raise _err(el, "projection indices start at 1")
        (k,) = _kids(el, 1)
        return Proj(query_from_xml(k), i)
    if tag == "image":
        r, q = _kids(el, 2)
        return Image(relation_from_xml(r), query_from_xml(q))
    if tag == "bigunion":
        d, b = _kids(el, 2)
        return BigUnion(_attr(el, "var"), query_from_xml(d), query_from_xml(b))
    if tag == "comprehension":
        d, f = _kids(el, 2)
        return Comprehension(_attr(el, "var"), query_from_xml(d), prop_from_xml(f))
    raise _err(el, "unknown query element")


def prop_from_xml(el):
    if el.tag != "prop":
        raise _err(el, "expected a <prop> element")
    op = el.get("op")
    if op is None:
        return Pred(_attr(el, "pred"), tuple(query_from_xml(k) for k in el))
    if op == "not":
        (k,) = _kids(el, 1)
        return Not(prop_from_xml(k))
    if op == "and":
        a, b = _kids(el, 2)
        return And(prop_from_xml(a), prop_from_xml(b))
    if op == "forall":
        d, b = _kids(el, 2)
        return Forall(_attr(el, "var"), query_from_xml(d), prop_from_xml(b))
    raise _err(el, f"unknown proposition operator {op!r}")


def parse_query_xml(source):
    """Parse a query element or its serialized markup."""
    if isinstance(source, (str, bytes)):
        try:
            source = ET.fromstring(source)
        except ET.ParseError as e:
            line, col = e.position
            raise ParseError(f"malformed XML: {e}", line, col + 1) from None
    return query_from_xml(source)


# -- AST -> XML ------------------------------------------------------------------


def relation_to_xml(r) -> ET.Element:
    if isinstance(r, Rel):
        return ET.Element("rel", name=r.name)
    op = _REL_NAMES.get(type(r))
    if op is None:
        raise TypeError(f"not a relation expression: {r!r}")
    el = ET.Element("rel", op=op)
    if isinstance(r, (Inverse, Closure)):
        el.append(relation_to_xml(r.rel))
    else:
        el.append(relation_to_xml(r.left))
        el.append(relation_to_xml(r.right))
    return el


def query_to_xml(q) -> ET.Element:
    if isinstance(q, Concept):
        return ET.Element("concept", name=q.name)
    if isinstance(q, Var):
        return ET.Element("var", name=q.name)
    if isinstance(q, Literal):
        el = ET.Element("literal", type=q.type)
        if q.type == "obj" and not isinstance(q.value, str):
            el.append(objects.to_xml(q.value))
        else:
            el.text = q.value
        return el
    if isinstance(q, Apply):
        el = ET.Element("apply", fun=q.fun)
        el.extend(query_to_xml(a) for a in q.args)
        return el
    if isinstance(q, Tuple):
        el = ET.Element("tuple")
        el.extend(query_to_xml(a) for a in q.items)
        return el
    if isinstance(q, Proj):
        el = ET.Element("proj", i=str(q.index))
        el.append(query_to_xml(q.query))
        return el
    if isinstance(q, Image):
        el = ET.Element("image")
        el.append(relation_to_xml(q.rel))
        el.append(query_to_xml(q.query))
        return el
    if isinstance(q, BigUnion):
        el = ET.Element("bigunion", var=q.var)
        el.append(query_to_xml(q.domain))
        el.append(query_to_xml(q.body))
        return el
    if isinstance(q, Comprehension):
        el = ET.Element("comprehension", var=q.var)
        el.append(query_to_xml(q.domain))
        el.append(prop_to_xml(q.filter))
        return el
    raise TypeError(f"not a query: {q!r}")


def prop_to_xml(F) -> ET.Element:
    if isinstance(F, Pred):
        el = ET.Element("prop", pred=F.name)
        el.extend(query_to_xml(a) for a in F.args)
        return el
    if isinstance(F, Not):
        el = ET.Element("prop", op="not")
        el.append(prop_to_xml(F.prop))
        return el
    if isinstance(F, And):
        el = ET.Element("prop", op="and")
        el.append(prop_to_xml(F.left))
        el.append(prop_to_xml(F.right))
        return el
    if isinstance(F, Forall):
        el = ET.Element("prop", op="forall", var=F.var)
        el.append(query_to_xml(F.domain))
        el.append(prop_to_xml(F.body))
        return el
    raise TypeError(f"not a proposition: {F!r}")


def to_string(el: ET.Element) -> str:
    return ET.tostring(el, encoding="unicode")
