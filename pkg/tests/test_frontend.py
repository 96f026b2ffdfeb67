import io
import json
import random
import urllib.error
import urllib.request
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from qmt.checker import TypeCheckError, check_query
from qmt.evaluator import eval_query
from qmt.frontend import cli
from qmt.frontend.documents import QueryDocument, render_result, sniff
from qmt.frontend.parser import ParseError, parse_prop, parse_query, parse_relation, parse_signature, parse_type
from qmt.frontend.printer import print_prop, print_query, print_relation, print_signature, print_type
from qmt.frontend.server import QueryService, serve_in_thread
from qmt.frontend.xmlsyntax import parse_query_xml, query_to_xml, to_string
from qmt.kernel import (
    And, Apply, BigUnion, Closure, Compose, Comprehension, Concept, Forall, Image, Inverse, Literal, Not, Pred,
    Proj, Rel, Tup, Uri, Var, base, product, set_of,
)
from qmt.mmt.library import load_library
from qmt.mmt.model import mmt_model, mmt_signature
from qmt.mmt.objects import OMA, OMS

import helpers

FIX = Path(__file__).parent / "fixtures"
GRAPH, OTHER, ND = FIX / "graph.json", FIX / "other.json", FIX / "nd.json"
URI = base("uri")


# -- textual syntax ------------------------------------------------------------------


def test_concept():
    assert parse_query("theory") == Concept("theory")


def test_constants_query():
    q = parse_query('{ x in (includes+ ; declares) of uri"urn:u" | occurs(uri"urn:v", typeOF(x)) }')
    rel = Compose(Closure(Rel("includes")), Rel("declares"))
    assert q == Comprehension("x", Image(rel, Literal("uri", "urn:u")),
                              Pred("occurs", (Literal("uri", "urn:v"), Apply("typeOF", (Var("x"),)))))


def test_include_query():
    q = parse_query('inv includes+ of uri"urn:u"')
    assert q == Image(Inverse(Closure(Rel("includes"))), Literal("uri", "urn:u"))


def test_projection_is_one_based():
    with pytest.raises(ParseError) as exc:
        parse_query("(theory, theory).0")
    assert exc.value.line == 1 and exc.value.col is not None
    assert parse_query("x.2", ["x"]) == Proj(Var("x"), 2)


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_query("union x in theory .\n  {x")
    assert exc.value.line == 2


def test_bound_names_become_variables():
    q = parse_query("union theory in theory . {theory}")
    assert q == BigUnion("theory", Concept("theory"), Apply("singleton", (Var("theory"),)))


def test_object_literals():
    q = parse_query('{obj⟨{"OMA": [{"OMS": "urn:f"}, {"OMS": "urn:a"}]}⟩}')
    lit = q.args[0]
    assert lit.type == "obj" and lit.value == OMA(OMS("urn:f"), (OMS("urn:a"),))
    assert parse_query(print_query(q)) == q
    assert parse_query('{obj<{"OMS": "urn:a"}>}').args[0].value == OMS("urn:a")


def test_prop_sugar():
    p = parse_prop("exists y in theory . y = x || false", ["x"])
    assert isinstance(p, Not) and isinstance(p.prop, Forall)
    assert isinstance(p.prop.body.prop.prop, And)  # the body extends over the disjunction
    p = parse_prop("(exists y in theory . y = x) || false", ["x"])
    assert isinstance(p, Not) and isinstance(p.prop, And)
    assert parse_prop("!true && true") == And(Not(Pred("true", ())), Pred("true", ()))


def test_relations_and_types():
    assert parse_relation("inv (r ; s)+ | t & u \\ w") is not None
    assert parse_type("{(uri, obj)}") == set_of(product("uri", "obj"))
    assert print_type(set_of(product("uri", "obj"))) == "{(uri, obj)}"


def test_signature_syntax():
    text = "a : btp; c < a; r < (a, a); f : ((a, a)) -> {a}; g : (a, a) -> a; p : (a) -> prop"
    decls = parse_signature(text)
    assert [d.name for d in decls] == ["a", "c", "r", "f", "g", "p"]
    assert decls[3].args == (product("a", "a"),)
    assert parse_signature(print_signature(decls)) == decls


def _fuzz_ast(seed):
    rng = random.Random(seed)
    return helpers.random_query(rng, helpers.random_type(rng), {}, 5)


def test_text_round_trip_on_fuzzed_asts():
    for seed in range(1000):
        q = _fuzz_ast(seed)
        assert parse_query(print_query(q)) == q, print_query(q)


def test_relation_round_trip():
    rng = random.Random(9)
    for _ in range(300):
        R = helpers.random_relation(rng, rng.choice("ab"), rng.choice("ab"), 3)
        assert parse_relation(print_relation(R)) == R


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_print_parse_props(seed):
    rng = random.Random(seed)
    F = helpers.random_prop(rng, {"x": helpers.A}, 4)
    assert parse_prop(print_prop(F), ["x"]) == F


# -- XML syntax --------------------------------------------------------------------------


def test_xml_concept():
    assert parse_query_xml('<concept name="theory"/>') == Concept("theory")


def test_xml_round_trip_on_fuzzed_asts():
    for seed in range(1000):
        q = _fuzz_ast(seed)
        assert parse_query_xml(to_string(query_to_xml(q))) == q


def test_xml_round_trip_of_object_literal():
    q = Apply("singleton", (Literal("obj", OMA(OMS("urn:f"), (OMS("urn:a"),))),))
    assert parse_query_xml(to_string(query_to_xml(q))) == q


@pytest.mark.parametrize("doc", [
    "<nonsense/>", "<concept/>", "<proj i='0'><var name='x'/></proj>", "<tuple><var name='x'/></tuple>",
    "<image><concept name='theory'/></image>", "<concept name='a'",
])
def test_xml_errors(doc):
    with pytest.raises(ParseError):
        parse_query_xml(doc)


# -- query documents -----------------------------------------------------------------------


def test_sniff():
    assert sniff("<concept name='x'/>") == "xml"
    assert sniff('{"query": "theory"}') == "json"
    assert sniff("{ x in theory | true }") == "text"
    assert sniff("theory", "application/json; charset=utf-8") == "json"


def test_document_formats_agree():
    m = mmt_model(load_library(GRAPH))
    text = QueryDocument.parse("inv includes+ of uri\"urn:g?A\"")
    js = QueryDocument.parse(json.dumps({"query": 'inv includes+ of uri"urn:g?A"'}))
    xml = QueryDocument.parse(text.to_xml())
    assert text.query == js.query == xml.query
    assert text.run(m).value == {Uri("urn:g?A"), Uri("urn:g?B"), Uri("urn:g?C")}


def test_document_extensions():
    m = mmt_model(load_library(GRAPH))
    doc = QueryDocument.from_json(json.dumps({
        "signature": "core < uri; dep < (uri, uri)",
        "facts": [{"concept": "core", "value": "urn:g?A"},
                  {"relation": "dep", "source": "urn:g?C", "target": "urn:g?A"}],
        "query": "{ x in theory | x in core || x in inv dep of uri\"urn:g?A\" }",
    }))
    assert doc.run(m).value == {Uri("urn:g?A"), Uri("urn:g?C")}
    again = QueryDocument.from_xml(doc.to_xml())
    assert again.facts == doc.facts and again.extensions == doc.extensions
    assert again.run(m).value == {Uri("urn:g?A"), Uri("urn:g?C")}
    assert "core" not in m.signature  # the shared model is left alone


def test_document_extensions_are_restricted():
    m = mmt_model(load_library(GRAPH))
    with pytest.raises(TypeCheckError):
        QueryDocument.from_json(json.dumps({"signature": "f : (uri) -> uri", "query": "theory"})).run(m)
    with pytest.raises(TypeCheckError):
        QueryDocument.from_json(json.dumps({
            "facts": [{"concept": "theory", "value": "urn:x"}], "query": "theory"})).run(m)


def test_graph_queries():
    m = mmt_model(load_library(GRAPH))
    views = parse_query("{ (v, x, y) : v in view, x in domain of v, y in codomain of v }")
    incl = parse_query("{ (x, y) : x in theory, y in includes of x }")
    sig = mmt_signature()
    assert check_query(sig, views)[1] == set_of(product("uri", "uri", "uri"))
    assert check_query(sig, incl)[1] == set_of(product("uri", "uri"))
    T = lambda *xs: Tup(tuple(Uri(f"urn:g?{x}") for x in xs))  # noqa: E731
    assert eval_query(m, views) == {T("V1", "A", "B"), T("V2", "A", "C")}
    # includes is reflexive in the extracted ontology
    assert eval_query(m, incl) == {T("A", "A"), T("B", "B"), T("C", "C"), T("B", "A"), T("C", "B")}
    sel = parse_query(f"select 1, 3 from ({print_query(views)}) where #3 = uri\"urn:g?C\"")
    assert eval_query(m, sel) == {T("V2", "C")}


def test_result_rendering_is_deterministic():
    m = mmt_model(load_library(GRAPH))
    doc = QueryDocument.from_text("theory")
    outs = {fmt: render_result(doc.run(m), fmt) for fmt in ("text", "json", "xml")}
    assert outs["text"].splitlines()[:3] == ["outcome: ok", "type: {uri}", "elements: 3"]
    assert json.loads(outs["json"])["elements"] == ["urn:g?A", "urn:g?B", "urn:g?C"]
    assert ET.fromstring(outs["xml"]).find("elements").get("count") == "3"
    assert render_result(doc.run(m), "json") == outs["json"]


def test_undefined_result_document():
    m = mmt_model(load_library(GRAPH))
    out = QueryDocument.from_text('{defOF(uri"urn:g?A?one")}').run(m)
    doc = json.loads(render_result(out, "json"))
    assert doc["outcome"] == "error" and doc["error"]["symbol"] == "defOF"
    assert doc["error"]["args"] == ["urn:g?A?one"]


# -- command line ----------------------------------------------------------------------------


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def test_cli_eval_include_query(tmp_path):
    q = tmp_path / "q.txt"
    q.write_text('inv includes+ of uri"urn:g?A"')
    code, out, _ = run_cli("eval", GRAPH, q)
    assert code == 0
    assert out.splitlines() == ["outcome: ok", "type: {uri}", "elements: 3", "urn:g?A", "urn:g?B", "urn:g?C"]


def test_cli_check(tmp_path):
    code, out, _ = run_cli("check", GRAPH)
    assert code == 0 and "theories: 3" in out and "views: 2" in out


def test_cli_duplicate_uri(tmp_path):
    code, _, err = run_cli("check", GRAPH, GRAPH)
    assert code == 1 and "DuplicateUri" in err


def test_cli_ill_typed_query(tmp_path):
    q = tmp_path / "q.txt"
    q.write_text("union x in theory . x")
    code, out, err = run_cli("eval", GRAPH, q, "--format", "json")
    assert code == 1 and out == ""
    assert json.loads(err)["kind"] == "TypeMismatch"


def test_cli_lenient_flag(tmp_path):
    q = tmp_path / "q.txt"
    q.write_text('{ x in constant | occurs(uri"http://example.org/nd?Logic?i", typeOF(x)) }')
    code, out, _ = run_cli("eval", ND, q)
    assert code == 1 and "outcome: error" in out
    code, out, _ = run_cli("eval", ND, q, "--lenient-filter")
    assert code == 0 and "elements: 4" in out


def test_cli_index_cache(tmp_path):
    cache = tmp_path / "idx.json"
    code, out, _ = run_cli("index", GRAPH, "--out", cache)
    assert code == 0 and cache.exists()
    q = tmp_path / "q.xml"
    q.write_text('<concept name="view"/>')
    code, out, _ = run_cli("eval", GRAPH, q, "--index-cache", cache, "--format", "xml")
    assert code == 0 and ET.fromstring(out).find("elements").get("count") == "2"


# -- HTTP server ----------------------------------------------------------------------------


@pytest.fixture
def server():
    service = QueryService([load_library(GRAPH), load_library(OTHER)], result_cap=4)
    srv = serve_in_thread(service)
    yield f"http://127.0.0.1:{srv.server_address[1]}"
    srv.shutdown()
    srv.server_close()


def post(url, body, ctype="application/xml", fmt=None):
    target = url + "/query" + (f"?format={fmt}" if fmt else "")
    req = urllib.request.Request(target, data=body.encode(), headers={"Content-Type": ctype}, method="POST")
    try:
        with urllib.request.urlopen(req) as r:
            return r.status, r.read().decode()
    except urllib.error.HTTPError as e:
        return e.code, e.read().decode()


def test_http_theories_from_all_libraries(server):
    status, body = post(server, '<concept name="theory"/>')
    assert status == 200
    root = ET.fromstring(body)
    assert [e.text for e in root.find("elements")] == ["urn:g?A", "urn:g?B", "urn:g?C", "urn:o?D"]


def test_http_cross_library_query(server):
    status, body = post(server, json.dumps({"query": 'declares of uri"urn:o?D"'}), "application/json")
    assert status == 200
    assert json.loads(body)["elements"] == ["urn:g?A?one", "urn:g?B?two", "urn:g?C?three", "urn:o?D?four"]


def test_http_ill_typed_is_400(server):
    status, body = post(server, "{ x in theory | occurs(x, x) }", "text/plain", "json")
    assert status == 400
    doc = json.loads(body)
    assert doc["kind"] == "TypeMismatch" and doc["path"] == "filter"


def test_http_parse_error_is_400(server):
    status, body = post(server, "<concept", fmt="xml")
    assert status == 400 and ET.fromstring(body).get("kind") == "ParseError"


def test_http_result_cap(server):
    status, body = post(server, "{ (x, y) : x in constant, y in constant }", "text/plain")
    assert status == 413 and "cap" in body


def test_http_health_and_signature(server):
    with urllib.request.urlopen(server + "/health") as r:
        health = json.loads(r.read())
    assert health["status"] == "ok" and health["theories"] == 4
    with urllib.request.urlopen(server + "/signature") as r:
        sig = ET.fromstring(r.read())
    assert {e.get("name") for e in sig.findall("concept")} == {"theory", "view", "constant", "style"}


def test_http_matches_cli_bytes(server, tmp_path):
    text = "{ (v, y) : v in view, y in codomain of v }"
    q = tmp_path / "q.txt"
    q.write_text(text)
    for fmt in ("text", "json", "xml"):
        code, out, _ = run_cli("eval", GRAPH, OTHER, q, "--format", fmt)
        status, body = post(server, text, "text/plain", fmt)
        assert code == 0 and status == 200 and body == out


def test_service_handles_unknown_errors():
    service = QueryService([load_library(GRAPH)])
    status, fmt, _ = service.handle(b"\xff\xfe", None, "text")
    assert status == 400
    status, fmt, payload = service.handle(b'<concept name="theory"/>')
    assert status == 200 and fmt == "xml"
