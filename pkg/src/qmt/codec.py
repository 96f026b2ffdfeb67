"""Serialization of values: tagged JSON (index caches, facts), plain JSON and
XML (result documents), and a one-line text form."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET

from .kernel import Obj, Tup, Uri, Xml
from .mmt import objects


class ValueFormatError(ValueError):
    pass


def value_to_json(v):
    if isinstance(v, Uri):
        return {"uri": v.text}
    if isinstance(v, Obj):
        return {"obj": objects.to_json(v.term)}
    if isinstance(v, Xml):
        return {"xml": v.markup}
    if isinstance(v, Tup):
        return {"tuple": [value_to_json(x) for x in v.items]}
    raise ValueFormatError(f"cannot serialize {v!r}")


def value_from_json(doc):
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ValueFormatError(f"tagged value expected, got {doc!r}")
    (tag, val), = doc.items()
    try:
        if tag == "uri":
            return Uri(val)
        if tag == "obj":
            return Obj(objects.from_json(val))
        if tag == "xml":
            return Xml(canonical_xml(val))
        if tag == "tuple":
            return Tup(tuple(value_from_json(x) for x in val))
    except (ValueError, ET.ParseError) as e:
        raise ValueFormatError(str(e)) from None
    raise ValueFormatError(f"unknown value tag {tag!r}")


def canonical_xml(markup: str) -> str:
    return ET.tostring(ET.fromstring(markup), encoding="unicode")


def element_to_json(v):
    """Type-directed plain form: URIs as strings, objects as TERM, XML as markup."""
    if isinstance(v, Uri):
        return v.text
    if isinstance(v, Obj):
        return objects.to_json(v.term)
    if isinstance(v, Xml):
        return v.markup
    if isinstance(v, Tup):
        return [element_to_json(x) for x in v.items]
    raise ValueFormatError(f"cannot serialize {v!r}")


def element_to_xml(v) -> ET.Element:
    if isinstance(v, Uri):
        el = ET.Element("uri")
        el.text = v.text
        return el
    if isinstance(v, Obj):
        el = ET.Element("obj")
        el.append(objects.to_xml(v.term))
        return el
    if isinstance(v, Xml):
        el = ET.Element("xml")
        el.append(ET.fromstring(v.markup))
        return el
    if isinstance(v, Tup):
        el = ET.Element("tuple")
        el.extend(element_to_xml(x) for x in v.items)
        return el
    raise ValueFormatError(f"cannot serialize {v!r}")


def element_from_xml(el: ET.Element):
    try:
        if el.tag == "uri":
            return Uri(el.text or "")
        if el.tag == "obj" and len(el) == 1:
            return Obj(objects.from_xml(el[0]))
        if el.tag == "xml" and len(el) == 1:
            return Xml(ET.tostring(el[0], encoding="unicode"))
        if el.tag == "tuple":
            return Tup(tuple(element_from_xml(k) for k in el))
    except ValueError as e:
        raise ValueFormatError(str(e)) from None
    raise ValueFormatError(f"unknown value element <{el.tag}>")


def element_to_text(v) -> str:
    if isinstance(v, Uri):
        return v.text
    if isinstance(v, Obj):
        return json.dumps(objects.to_json(v.term), ensure_ascii=False, separators=(",", ":"))
    if isinstance(v, Xml):
        return v.markup
    if isinstance(v, Tup):
        return "(" + ", ".join(element_to_text(x) for x in v.items) + ")"
    raise ValueFormatError(f"cannot serialize {v!r}")
