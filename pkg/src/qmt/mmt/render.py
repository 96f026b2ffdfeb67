"""Presentation of objects and declarations through a style's notations.

Output is presentation-MathML-like XML. A symbol without a notation, or whose
notation does not fit the number of arguments, falls back to prefix form
``name(a1, ..., an)``.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from .library import Constant, Library, Style, Theory, View
from .objects import OMA, OMBIND, OMLIT, OMS, OMV, is_free_binder

ATOMIC = 10**6
SLOT = re.compile(r"%(\d+)")


def local_name(uri: str) -> str:
    return uri.rsplit("?", 1)[-1] or uri


def _mo(text):
    el = ET.Element("mo")
    el.text = text
    return el


def _leaf(tag, text):
    el = ET.Element(tag)
    el.text = text
    return el


def _row(children):
    el = ET.Element("mrow")
    el.extend(children)
    return el


def _paren(el):
    return _row([_mo("("), el, _mo(")")])


class Renderer:
    def __init__(self, style: Style):
        self.style = style

    def object(self, t) -> ET.Element:
        return self._render(t)[0]

    def _arg(self, t, prec, strict=False):
        el, p = self._render(t)
        return _paren(el) if (p < prec or (strict and p == prec)) else el

    def _render(self, t):
        # returns (element, precedence of its outermost operator)
        if isinstance(t, OMS):
            n = self.style.notation(t.uri)
            if n is not None and n.text is not None:
                return _mo(n.text), ATOMIC
            return _leaf("mi", local_name(t.uri)), ATOMIC
        if isinstance(t, OMV):
            return _leaf("mi", t.name), ATOMIC
        if isinstance(t, OMLIT):
            return _leaf("mn" if t.kind == "integer" else "ms", t.value), ATOMIC
        if isinstance(t, OMA):
            n = self.style.notation(t.head.uri) if isinstance(t.head, OMS) else None
            if n is not None:
                out = self._notation(n, t.args)
                if out is not None:
                    return out
            return self._prefix(self._arg(t.head, ATOMIC), t.args), ATOMIC
        if isinstance(t, OMBIND):
            if is_free_binder(t.binder):
                return self._render(t.body)
            parts = [self._arg(t.binder, ATOMIC)]
            for i, vd in enumerate(t.context):
                if i:
                    parts.append(_mo(","))
                parts.append(_leaf("mi", vd.name))
                if vd.type is not None:
                    parts += [_mo(":"), self.object(vd.type)]
            parts += [_mo("."), self.object(t.body)]
            return _row(parts), 0
        raise TypeError(f"not an object: {t!r}")

    def _prefix(self, head, args):
        parts = [head, _mo("(")]
        for i, a in enumerate(args):
            if i:
                parts.append(_mo(","))
            parts.append(self.object(a))
        parts.append(_mo(")"))
        return _row(parts)

    def _notation(self, n, args):
        prec = n.precedence
        text = n.text if n.text is not None else local_name(n.symbol)
        if n.fixity == "infix":
            if len(args) != 2:
                return None
            return _row([self._arg(args[0], prec), _mo(text), self._arg(args[1], prec, strict=True)]), prec
        if n.fixity == "mixfix":
            if n.template is None:
                return None
            slots = [int(s) for s in SLOT.findall(n.template)]
            if sorted(set(slots)) != list(range(1, len(args) + 1)):
                return None
            parts = []
            for i, chunk in enumerate(SLOT.split(n.template)):
                if i % 2:
                    parts.append(self._arg(args[int(chunk) - 1], prec))
                elif chunk.strip():
                    parts.append(_mo(chunk.strip()))
            return _row(parts), prec
        # prefix: operator followed by its arguments
        return _row([_mo(text)] + [self._arg(a, prec, strict=True) for a in args]), prec

    def declaration(self, decl, lib: Library) -> ET.Element:
        if isinstance(decl, Constant):
            parts = [_leaf("mi", local_name(decl.uri))]
            if decl.type is not None:
                parts += [_mo(":"), self.object(decl.type)]
            if decl.definiens is not None:
                parts += [_mo("="), self.object(decl.definiens)]
            el = ET.Element("math", uri=decl.uri)
            el.append(_row(parts))
            return el
        if isinstance(decl, Theory):
            el = ET.Element("theory", uri=decl.uri, name=local_name(decl.uri))
            for inc in decl.includes:
                ET.SubElement(el, "include", uri=inc)
            for c in decl.constants:
                el.append(self.declaration(c, lib))
            return el
        if isinstance(decl, View):
            el = ET.Element("view", uri=decl.uri, name=local_name(decl.uri),
                            domain=decl.domain, codomain=decl.codomain)
            for sym, o in decl.assignments:
                a = ET.SubElement(el, "assignment", symbol=sym)
                m = ET.SubElement(a, "math")
                m.append(self.object(o))
            return el
        if isinstance(decl, Style):
            el = ET.Element("style", uri=decl.uri, name=local_name(decl.uri))
            for n in decl.notations:
                ET.SubElement(el, "notation", symbol=n.symbol, fixity=n.fixity)
            return el
        raise TypeError(f"not a declaration: {decl!r}")


def to_markup(el: ET.Element) -> str:
    return ET.tostring(el, encoding="unicode")
