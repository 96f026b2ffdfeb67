"""Command line: ``qmt check|eval|serve|index``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from ..checker import SignatureError, TypeCheckError
from ..index import load_index, save_index
from ..mmt.library import LibraryError, extract_facts, load_library
from ..mmt.model import mmt_model
from .documents import FORMATS, QueryDocument, render_diagnostic, render_result
from .parser import ParseError
from .server import DEFAULT_RESULT_CAP, QueryService, make_server, merge_libraries

log = logging.getLogger("qmt")

_EXT_TYPES = {".xml": "application/xml", ".json": "application/json"}


def _load(paths):
    return merge_libraries(load_library(p) for p in paths)


def cmd_check(args, out):
    lib = _load(args.library)
    facts = extract_facts(lib)
    n_concept = sum(1 for f in facts if len(f) == 2)
    print(f"theories: {len(lib.theories)}", file=out)
    print(f"constants: {len(lib.constants)}", file=out)
    print(f"views: {len(lib.views)}", file=out)
    print(f"styles: {len(lib.styles)}", file=out)
    print(f"concept facts: {n_concept}", file=out)
    print(f"relation facts: {len(facts) - n_concept}", file=out)
    return 0


def _model(lib, cache):
    index = None
    if cache is not None:
        key = lib.content_hash()
        index = load_index(cache, key)
        if index is None:
            log.info("index cache %s missing or stale; rebuilding", cache)
            model = mmt_model(lib)
            save_index(model.index, cache, key)
            return model
    return mmt_model(lib, index=index)


def cmd_eval(args, out):
    lib = _load(args.library)
    path = Path(args.query)
    data = path.read_text(encoding="utf-8")
    doc = QueryDocument.parse(data, _EXT_TYPES.get(path.suffix.lower()))
    if args.lenient_filter:
        doc.lenient_filter = True
    outcome = doc.run(_model(lib, args.index_cache))
    out.write(render_result(outcome, args.format))
    return 0 if outcome.ok else 1


def cmd_index(args, out):
    lib = _load(args.library)
    model = mmt_model(lib)
    save_index(model.index, args.out, lib.content_hash())
    print(f"wrote {model.index.fact_count()} facts to {args.out}", file=out)
    return 0


def cmd_serve(args, out):
    port = int(os.environ.get("QMT_PORT", args.port))
    libs = [load_library(p) for p in args.library]
    service = QueryService(libs, result_cap=args.result_cap, index_cache=args.index_cache)
    server = make_server(service, args.host, port)
    host, port = server.server_address[:2]
    print(f"serving {len(service.library.theories)} theories on http://{host}:{port}/", file=out, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmt", description="Query formal libraries.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="load a library and report what was extracted")
    c.add_argument("library", nargs="+", help="library JSON file or directory")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("eval", help="typecheck and evaluate a query document")
    e.add_argument("library", nargs="+", help="library JSON file or directory")
    e.add_argument("query", help="query file (text, .xml or .json)")
    e.add_argument("--lenient-filter", action="store_true",
                   help="undefined filters exclude the element instead of failing the query")
    e.add_argument("--format", choices=FORMATS, default="text")
    e.add_argument("--index-cache", help="index cache file, rebuilt when stale")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("serve", help="run the HTTP query server")
    s.add_argument("library", nargs="+", help="library JSON files or directories to register")
    s.add_argument("--port", type=int, default=8080, help="port (QMT_PORT overrides)")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--result-cap", type=int, default=DEFAULT_RESULT_CAP)
    s.add_argument("--index-cache")
    s.set_defaults(func=cmd_serve)

    i = sub.add_parser("index", help="build indices and write them to a cache file")
    i.add_argument("library", nargs="+", help="library JSON file or directory")
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_index)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
    fmt = getattr(args, "format", "text")
    try:
        return args.func(args, out)
    except (ParseError, TypeCheckError, SignatureError) as e:
        err.write(render_diagnostic(e, fmt))
        return 1
    except LibraryError as e:
        err.write(f"{type(e).__name__}: {e}\n")
        return 1
    except OSError as e:
        err.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
