"""Query and result documents shared by the CLI and the HTTP server.

A query document carries one query, the ``lenient-filter`` flag, and
optionally extra concepts and relations together with facts about them.
Result documents come in three formats (text, json, xml) carrying the same
information; elements are listed in canonical order.
"""

from __future__ import annotations

import copy
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from ..checker import ErrorKind, SignatureError, TypeCheckError, check_signature
from ..codec import ValueFormatError, canonical_xml, element_to_json, element_to_text, element_to_xml, element_from_xml
from ..evaluator import Model, Outcome, run_query
from ..index import Index, build_index
from ..kernel import ConceptDecl, Obj, RelationDecl, SetType, SimpleType, Uri, Xml, sorted_values
from ..mmt import objects
from .parser import ParseError, parse_query, parse_signature
from .printer import print_signature, print_type
from .xmlsyntax import query_from_xml, query_to_xml

FORMATS = ("text", "json", "xml")


@dataclass
class QueryDocument:
    query: object
    lenient_filter: bool = False
    extensions: list = field(default_factory=list)
    facts: list = field(default_factory=list)

    # -- readers ----------------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, lenient_filter: bool = False) -> "QueryDocument":
        return cls(parse_query(text), lenient_filter)

    @classmethod
    def from_xml(cls, source) -> "QueryDocument":
        if isinstance(source, (str, bytes)):
            try:
                source = ET.fromstring(source)
            except ET.ParseError as e:
                line, col = e.position
                raise ParseError(f"malformed XML: {e}", line, col + 1) from None
        if source.tag != "qmt-query":
            return cls(query_from_xml(source))
        flag = source.get("lenient-filter", "false")
        if flag not in ("true", "false"):
            raise ParseError("lenient-filter must be 'true' or 'false'")
        decls, fact_els, queries = [], [], []
        for child in source:
            if child.tag == "signature":
                decls += parse_signature(child.text or "")
            elif child.tag == "fact":
                fact_els.append(child)
            else:
                queries.append(child)
        if len(queries) != 1:
            raise ParseError(f"<qmt-query> needs exactly one query element, got {len(queries)}")
        facts = []
        for el in fact_els:
            try:
                values = tuple(element_from_xml(k) for k in el)
            except ValueFormatError as e:
                raise ParseError(f"<fact>: {e}") from None
            if el.get("concept") is not None and len(values) == 1:
                facts.append((el.get("concept"),) + values)
            elif el.get("relation") is not None and len(values) == 2:
                facts.append((el.get("relation"),) + values)
            else:
                raise ParseError("<fact> needs concept= with one value or relation= with two")
        return cls(query_from_xml(queries[0]), flag == "true", decls, facts)

    @classmethod
    def from_json(cls, source) -> "QueryDocument":
        if isinstance(source, (str, bytes)):
            try:
                source = json.loads(source)
            except json.JSONDecodeError as e:
                raise ParseError(f"malformed JSON: {e.msg}", e.lineno, e.colno) from None
        if not isinstance(source, dict) or not isinstance(source.get("query"), str):
            raise ParseError("a JSON query document is an object with a 'query' string")
        unknown = set(source) - {"query", "lenient-filter", "signature", "facts"}
        if unknown:
            raise ParseError(f"unknown query document keys {sorted(unknown)}")
        flag = source.get("lenient-filter", False)
        if not isinstance(flag, bool):
            raise ParseError("lenient-filter must be a boolean")
        decls = parse_signature(source.get("signature", ""))
        kinds = {d.name: d for d in decls}
        facts = []
        for f in source.get("facts", []):
            if not isinstance(f, dict):
                raise ParseError(f"malformed fact {f!r}")
            if "concept" in f and set(f) == {"concept", "value"}:
                d = kinds.get(f["concept"])
                base = d.of if isinstance(d, ConceptDecl) else None
                facts.append((f["concept"], _plain_value(f["value"], base)))
            elif "relation" in f and set(f) == {"relation", "source", "target"}:
                d = kinds.get(f["relation"])
                src, tgt = (d.source, d.target) if isinstance(d, RelationDecl) else (None, None)
                facts.append((f["relation"], _plain_value(f["source"], src), _plain_value(f["target"], tgt)))
            else:
                raise ParseError(f"malformed fact {f!r}")
        return cls(parse_query(source["query"]), flag, decls, facts)

    @classmethod
    def parse(cls, data: str | bytes, content_type: str | None = None) -> "QueryDocument":
        """Read a document in the syntax given by ``content_type`` or sniffed from the data."""
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        kind = sniff(text, content_type)
        if kind == "json":
            return cls.from_json(text)
        if kind == "xml":
            return cls.from_xml(text)
        return cls.from_text(text)

    # -- writers --------------------------------------------------------------------

    def to_xml(self) -> str:
        root = ET.Element("qmt-query", {"lenient-filter": "true" if self.lenient_filter else "false"})
        if self.extensions:
            ET.SubElement(root, "signature").text = print_signature(self.extensions)
        for f in self.facts:
            el = ET.SubElement(root, "fact", {"concept" if len(f) == 2 else "relation": f[0]})
            el.extend(element_to_xml(v) for v in f[1:])
        root.append(query_to_xml(self.query))
        return ET.tostring(root, encoding="unicode")

    # -- evaluation -----------------------------------------------------------------

    def model_for(self, model: Model) -> Model:
        """``model`` with this document's extra concepts, relations and facts."""
        if not self.extensions and not self.facts:
            return model
        return extend_model(model, self.extensions, self.facts)

    def run(self, model: Model) -> Outcome:
        return run_query(self.model_for(model), self.query, self.lenient_filter)


def sniff(text: str | bytes, content_type: str | None = None) -> str:
    """``json``, ``xml`` or ``text``: from the content type if it names one, else from the data.

    Text queries may also start with ``{``; such data counts as JSON only if it parses as JSON.
    """
    kind = (content_type or "").split(";")[0].strip().lower()
    if kind.endswith("json"):
        return "json"
    if kind.endswith("xml"):
        return "xml"
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    head = text.lstrip()[:1]
    if head == "<":
        return "xml"
    if head == "{":
        try:
            json.loads(text)
            return "json"
        except ValueError:
            pass
    return "text"


def _plain_value(doc, base):
    if base == "obj":
        try:
            return Obj(objects.from_json(doc))
        except objects.ObjectFormatError as e:
            raise ParseError(f"bad object value: {e}") from None
    if not isinstance(doc, str):
        raise ParseError(f"expected a string value, got {doc!r}")
    if base == "xml":
        try:
            return Xml(canonical_xml(doc))
        except ET.ParseError as e:
            raise ParseError(f"bad XML value: {e}") from None
    return Uri(doc)


def extend_model(model: Model, decls, facts) -> Model:
    """Add concepts and relations over the model's base types, with their facts."""
    for i, d in enumerate(decls):
        if not isinstance(d, (ConceptDecl, RelationDecl)):
            raise TypeCheckError(ErrorKind.TYPE_MISMATCH,
                                 "query documents may only declare concepts and relations", (f"decl[{i}]",))
    sig = check_signature(decls, model.signature)
    names = {d.name for d in decls}
    for f in facts:
        if f[0] not in names:
            raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL,
                                 f"facts may only mention symbols declared in the document, not {f[0]!r}")
    extra = build_index(facts, sig, lambda v, a: model.inhabits(v, SimpleType((a,))))
    out = copy.copy(model)
    out.signature = sig
    out.index = Index(
        {**model.index.concepts, **{n: c for n, c in extra.concepts.items() if n in names}},
        {**model.index.relations, **{n: r for n, r in extra.relations.items() if n in names}},
    )
    return out


# -- results ----------------------------------------------------------------------


class ResultTooLarge(Exception):
    def __init__(self, size: int, cap: int):
        super().__init__(f"result has {size} elements, more than the cap of {cap}")
        self.size = size
        self.cap = cap


def result_elements(outcome: Outcome) -> list:
    if not outcome.ok:
        return []
    if isinstance(outcome.type, SetType):
        return sorted_values(outcome.value)
    return [outcome.value]


def _encode_arg(v, enc):
    try:
        return enc(v)
    except ValueFormatError:
        return repr(v)


def render_result(outcome: Outcome, fmt: str = "text") -> str:
    if fmt not in FORMATS:
        raise ValueError(f"unknown result format {fmt!r}")
    ty = print_type(outcome.type)
    elems = result_elements(outcome)
    err = outcome.error
    if fmt == "json":
        doc = {"outcome": "ok" if outcome.ok else "error", "type": ty}
        if outcome.ok:
            doc["elements"] = [element_to_json(v) for v in elems]
        else:
            doc["error"] = err.to_dict(lambda v: _encode_arg(v, element_to_json))
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    if fmt == "xml":
        root = ET.Element("result", outcome="ok" if outcome.ok else "error", type=ty)
        if outcome.ok:
            box = ET.SubElement(root, "elements", count=str(len(elems)))
            box.extend(element_to_xml(v) for v in elems)
        else:
            e = ET.SubElement(root, "error", symbol=err.symbol)
            ET.SubElement(e, "reason").text = err.reason
            for a in err.args:
                arg = ET.SubElement(e, "arg")
                try:
                    arg.append(element_to_xml(a))
                except ValueFormatError:
                    arg.text = repr(a)
            for step in err.path:
                ET.SubElement(e, "at").text = step
        return ET.tostring(root, encoding="unicode") + "\n"
    lines = [f"outcome: {'ok' if outcome.ok else 'error'}", f"type: {ty}"]
    if outcome.ok:
        lines.append(f"elements: {len(elems)}")
        lines += [element_to_text(v) for v in elems]
    else:
        lines.append(f"error: {err.reason}")
        lines += [f"  at: {step}" for step in err.path]
    return "\n".join(lines) + "\n"


def diagnostic(exc: Exception) -> dict:
    """The diagnostic for a rejected query: kind, path and message."""
    if isinstance(exc, TypeCheckError):
        return exc.to_dict()
    if isinstance(exc, SignatureError):
        return {"kind": "SignatureError", "path": "", "message": str(exc),
                "errors": [e.to_dict() for e in exc.errors]}
    if isinstance(exc, ParseError):
        out = {"kind": "ParseError", "path": "", "message": exc.message}
        if exc.line is not None:
            out.update(line=exc.line, column=exc.col)
        return out
    return {"kind": type(exc).__name__, "path": "", "message": str(exc)}


def render_diagnostic(exc: Exception, fmt: str = "text") -> str:
    d = diagnostic(exc)
    if fmt == "json":
        return json.dumps({"outcome": "rejected", **d}, ensure_ascii=False, indent=2) + "\n"
    if fmt == "xml":
        attrs = {k: str(v) for k, v in d.items() if k not in ("message", "errors")}
        root = ET.Element("rejected", attrs)
        root.text = d["message"]
        return ET.tostring(root, encoding="unicode") + "\n"
    where = f" at {d['path']}" if d.get("path") else ""
    if "line" in d:
        where = f" at {d['line']}:{d['column']}"
    return f"{d['kind']}{where}: {d['message']}\n"
