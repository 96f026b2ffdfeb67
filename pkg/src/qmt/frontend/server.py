"""HTTP query server.

``POST /query`` takes a query document (XML, JSON or plain text) and answers
with a result document in the same format, or the one named by a ``format``
query parameter. ``GET /health`` and ``GET /signature`` report status and the
installed signature.
"""

from __future__ import annotations

import json
import logging
import threading
import xml.etree.ElementTree as ET
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from ..checker import SignatureError, TypeCheckError
from ..index import load_index
from ..kernel import BaseTypeDecl, ConceptDecl, FunctionDecl, PredicateDecl, RelationDecl
from ..mmt.library import Library
from ..mmt.model import mmt_model
from .documents import (
    FORMATS, QueryDocument, ResultTooLarge, render_diagnostic, render_result, result_elements, sniff,
)
from .parser import ParseError
from .printer import print_type

log = logging.getLogger(__name__)

DEFAULT_RESULT_CAP = 100_000
MAX_BODY = 10 * 1024 * 1024
CONTENT_TYPES = {"xml": "application/xml", "json": "application/json", "text": "text/plain"}


def merge_libraries(libraries) -> Library:
    """One library from several; a URI declared in two of them is an error."""
    merged = Library()
    for lib in libraries:
        merged = merged.merge(lib)
    return merged


class QueryService:
    """Evaluates query documents against the libraries registered at startup."""

    def __init__(self, libraries, result_cap: int = DEFAULT_RESULT_CAP, index_cache=None, plugins=None):
        self.library = merge_libraries(libraries)
        self.result_cap = result_cap
        index = None
        if index_cache is not None:
            index = load_index(index_cache, self.library.content_hash())
        self.model = mmt_model(self.library, plugins, index=index)

    def answer(self, doc: QueryDocument, fmt: str) -> str:
        """Evaluate and render; raises ResultTooLarge over the cap."""
        outcome = doc.run(self.model)
        size = len(result_elements(outcome))
        if self.result_cap is not None and size > self.result_cap:
            raise ResultTooLarge(size, self.result_cap)
        return render_result(outcome, fmt)

    def handle(self, body: bytes, content_type: str | None = None, fmt: str | None = None) -> tuple[int, str, str]:
        """Serve one POST /query; returns (status, format, payload)."""
        fmt = fmt or sniff(body, content_type)
        try:
            doc = QueryDocument.parse(body, content_type)
            return 200, fmt, self.answer(doc, fmt)
        except (ParseError, TypeCheckError, SignatureError, UnicodeDecodeError) as e:
            return 400, fmt, render_diagnostic(e, fmt)
        except ResultTooLarge as e:
            return 413, fmt, render_diagnostic(e, fmt)
        except Exception as e:  # reported as 500
            log.exception("query failed")
            return 500, fmt, render_diagnostic(e, fmt)

    def signature_xml(self) -> str:
        root = ET.Element("signature")
        for d in self.model.signature.decls:
            if isinstance(d, BaseTypeDecl):
                ET.SubElement(root, "basetype", name=d.name)
            elif isinstance(d, ConceptDecl):
                ET.SubElement(root, "concept", name=d.name, of=d.of)
            elif isinstance(d, RelationDecl):
                ET.SubElement(root, "relation", name=d.name, source=d.source, target=d.target)
            elif isinstance(d, FunctionDecl):
                el = ET.SubElement(root, "function", name=d.name, result=print_type(d.result))
                for a in d.args:
                    ET.SubElement(el, "arg", type=print_type(a))
            elif isinstance(d, PredicateDecl):
                el = ET.SubElement(root, "predicate", name=d.name)
                for a in d.args:
                    ET.SubElement(el, "arg", type=print_type(a))
        for fam in self.model.signature.families:
            ET.SubElement(root, "family", name=fam.label, kind=fam.kind)
        return ET.tostring(root, encoding="unicode") + "\n"


class _Handler(BaseHTTPRequestHandler):
    service: QueryService  # set on the subclass built by make_server

    def log_message(self, fmt, *args):
        log.info("%s - " + fmt, self.address_string(), *args)

    def _send(self, status: int, fmt: str, payload: str):
        data = payload.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", CONTENT_TYPES[fmt] + "; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        path = urlparse(self.path).path
        if path == "/health":
            lib = self.service.library
            body = {"status": "ok", "theories": len(lib.theories), "constants": len(lib.constants),
                    "facts": self.service.model.index.fact_count()}
            self._send(200, "json", json.dumps(body) + "\n")
        elif path == "/signature":
            self._send(200, "xml", self.service.signature_xml())
        else:
            self._send(404, "text", f"no such resource: {path}\n")

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/query":
            self._send(404, "text", f"no such resource: {url.path}\n")
            return
        fmt = parse_qs(url.query).get("format", [None])[0]
        if fmt is not None and fmt not in FORMATS:
            self._send(400, "text", f"unknown format {fmt!r}\n")
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = -1
        if length < 0 or length > MAX_BODY:
            self._send(400, "text", "missing or oversized request body\n")
            return
        body = self.rfile.read(length)
        self._send(*self.service.handle(body, self.headers.get("Content-Type"), fmt))


def make_server(service: QueryService, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve_in_thread(service: QueryService, host: str = "127.0.0.1", port: int = 0):
    """Start a server on a daemon thread; returns the server (``server_address`` has the port)."""
    server = make_server(service, host, port)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server
