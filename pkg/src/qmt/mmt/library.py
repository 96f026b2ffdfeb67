"""MMT-style libraries: theories with constants, views, styles; loading from
JSON and extraction of the ontology facts that feed the index."""

from __future__ import annotations

import hashlib
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from ..kernel import Uri
from . import objects
from .objects import Term

log = logging.getLogger(__name__)


class LibraryError(Exception):
    pass


class ParseError(LibraryError):
    def __init__(self, message, location=None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class DuplicateUri(LibraryError):
    def __init__(self, uri, location=None):
        super().__init__(f"DuplicateUri: {uri}" + (f" ({location})" if location else ""))
        self.uri = uri


@dataclass(frozen=True)
class Constant:
    uri: str
    type: Term | None = None
    definiens: Term | None = None


@dataclass(frozen=True)
class Theory:
    uri: str
    includes: tuple[str, ...] = ()
    constants: tuple[Constant, ...] = ()


@dataclass(frozen=True)
class View:
    uri: str
    domain: str
    codomain: str
    assignments: tuple[tuple[str, Term], ...] = ()


@dataclass(frozen=True)
class Notation:
    symbol: str
    fixity: str = "prefix"  # prefix | infix | mixfix
    text: str | None = None
    template: str | None = None  # mixfix, slots written %1 .. %n
    precedence: int = 0


@dataclass(frozen=True)
class Style:
    uri: str
    notations: tuple[Notation, ...] = ()

    def notation(self, symbol: str) -> Notation | None:
        for n in self.notations:
            if n.symbol == symbol:
                return n
        return None


@dataclass
class Library:
    theories: dict[str, Theory] = field(default_factory=dict)
    views: dict[str, View] = field(default_factory=dict)
    styles: dict[str, Style] = field(default_factory=dict)
    constants: dict[str, Constant] = field(default_factory=dict)
    typesystems: dict[str, str] = field(default_factory=dict)

    def add(self, decl, location=None):
        uris = [decl.uri] + ([c.uri for c in decl.constants] if isinstance(decl, Theory) else [])
        seen = set()
        for u in uris:
            if u in seen or self.declares_uri(u):
                raise DuplicateUri(u, location)
            seen.add(u)
        if isinstance(decl, Theory):
            self.theories[decl.uri] = decl
            for c in decl.constants:
                self.constants[c.uri] = c
        elif isinstance(decl, View):
            self.views[decl.uri] = decl
        elif isinstance(decl, Style):
            self.styles[decl.uri] = decl
        else:
            raise TypeError(f"not a declaration: {decl!r}")

    def declares_uri(self, uri: str) -> bool:
        return uri in self.theories or uri in self.views or uri in self.styles or uri in self.constants

    def declaration(self, uri: str):
        for table in (self.theories, self.views, self.styles, self.constants):
            if uri in table:
                return table[uri]
        return None

    def uris(self):
        yield from self.theories
        yield from self.views
        yield from self.styles
        yield from self.constants

    def merge(self, other: "Library") -> "Library":
        out = Library(typesystems={**self.typesystems})
        for lib in (self, other):
            for d in list(lib.theories.values()) + list(lib.views.values()) + list(lib.styles.values()):
                out.add(d)
        for u, ts in other.typesystems.items():
            if out.typesystems.get(u, ts) != ts:
                raise LibraryError(f"conflicting type systems registered for {u}")
            out.typesystems[u] = ts
        return out

    def to_json(self) -> dict:
        return {
            "theories": [{
                "uri": t.uri,
                "includes": list(t.includes),
                "constants": [_constant_json(c) for c in t.constants],
            } for t in self.theories.values()],
            "views": [{
                "uri": v.uri, "domain": v.domain, "codomain": v.codomain,
                "assignments": {k: objects.to_json(o) for k, o in v.assignments},
            } for v in self.views.values()],
            "styles": [{
                "uri": s.uri,
                "notations": [_notation_json(n) for n in s.notations],
            } for s in self.styles.values()],
            "typesystems": dict(self.typesystems),
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def __repr__(self):
        return (f"Library({len(self.theories)} theories, {len(self.constants)} constants, "
                f"{len(self.views)} views, {len(self.styles)} styles)")


def _constant_json(c: Constant) -> dict:
    d = {"uri": c.uri}
    if c.type is not None:
        d["type"] = objects.to_json(c.type)
    if c.definiens is not None:
        d["def"] = objects.to_json(c.definiens)
    return d


def _notation_json(n: Notation) -> dict:
    d = {"symbol": n.symbol, "fixity": n.fixity, "precedence": n.precedence}
    if n.text is not None:
        d["text"] = n.text
    if n.template is not None:
        d["template"] = n.template
    return d


# -- loading ------------------------------------------------------------------


@lru_cache(maxsize=1)
def library_schema() -> dict:
    text = resources.files("qmt.mmt").joinpath("schemas/library.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def parse_library(doc: dict, location=None) -> Library:
    try:
        jsonschema.validate(doc, library_schema())
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path)
        raise ParseError(e.message, f"{location or '<library>'}#/{where}") from None
    lib = Library(typesystems=dict(doc.get("typesystems", {})))
    for i, t in enumerate(doc.get("theories", [])):
        here = f"{location or '<library>'}#/theories/{i}"
        constants = []
        for c in t.get("constants", []):
            constants.append(Constant(
                _qualify(t["uri"], c["uri"], here),
                _term(c.get("type"), here),
                _term(c.get("def"), here),
            ))
        lib.add(Theory(t["uri"], tuple(t.get("includes", [])), tuple(constants)), here)
    for i, v in enumerate(doc.get("views", [])):
        here = f"{location or '<library>'}#/views/{i}"
        assigns = tuple((k, _term(o, here)) for k, o in sorted(v.get("assignments", {}).items()))
        lib.add(View(v["uri"], v["domain"], v["codomain"], assigns), here)
    for i, s in enumerate(doc.get("styles", [])):
        here = f"{location or '<library>'}#/styles/{i}"
        nots = tuple(Notation(n["symbol"], n["fixity"], n.get("text"), n.get("template"), n.get("precedence", 0))
                     for n in s.get("notations", []))
        lib.add(Style(s["uri"], nots), here)
    for t in lib.theories.values():
        for inc in t.includes:
            if inc not in lib.theories:
                log.warning("theory %s includes undeclared theory %s", t.uri, inc)
    return lib


def _qualify(theory_uri: str, uri: str, location) -> str:
    if "?" not in uri:
        return f"{theory_uri}?{uri}"
    if not uri.startswith(theory_uri + "?"):
        raise ParseError(f"constant {uri} is not qualified by its theory {theory_uri}", location)
    return uri


def _term(doc, location):
    if doc is None:
        return None
    try:
        return objects.from_json(doc)
    except objects.ObjectFormatError as e:
        raise ParseError(str(e), location) from None


def load_library(source) -> Library:
    """Load a library from a JSON file, or the union of all ``*.json`` files in
    a directory. An empty file is an empty library."""
    path = Path(source)
    if path.is_dir():
        lib = Library()
        for p in sorted(path.glob("*.json")):
            lib = lib.merge(load_library(p))
        return lib
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        return Library()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    return parse_library(doc, str(path))


# -- ontology -----------------------------------------------------------------


def includes_closure(lib: Library, theory: str) -> list[str]:
    """``theory`` plus every declared theory it transitively includes."""
    seen = [theory]
    visited = {theory}
    todo = deque([theory])
    while todo:
        t = lib.theories.get(todo.popleft())
        if t is None:
            continue
        for inc in t.includes:
            if inc not in visited:
                visited.add(inc)
                seen.append(inc)
                todo.append(inc)
    return seen


def extract_facts(lib: Library) -> list[tuple]:
    """Concept and relation facts of the ontology.

    ``includes`` gets every direct edge plus a reflexive edge per theory;
    ``declares`` relates a theory to its own constants and those of all
    theories it transitively includes.
    """
    facts: list[tuple] = []
    for t in lib.theories.values():
        u = Uri(t.uri)
        facts.append(("theory", u))
        facts.append(("includes", u, u))
        for inc in t.includes:
            facts.append(("includes", u, Uri(inc)))
        for c in t.constants:
            facts.append(("constant", Uri(c.uri)))
        for other in includes_closure(lib, t.uri):
            ot = lib.theories.get(other)
            if ot is None:
                continue
            for c in ot.constants:
                facts.append(("declares", u, Uri(c.uri)))
    for v in lib.views.values():
        u = Uri(v.uri)
        facts.append(("view", u))
        facts.append(("domain", u, Uri(v.domain)))
        facts.append(("codomain", u, Uri(v.codomain)))
    for s in lib.styles.values():
        facts.append(("style", Uri(s.uri)))
    return facts
