"""Concrete syntaxes, query/result documents, the CLI and the HTTP server."""

from .documents import QueryDocument, render_result
from .parser import ParseError, parse_prop, parse_query, parse_relation, parse_signature, parse_type
from .printer import print_prop, print_query, print_relation, print_signature, print_type
from .xmlsyntax import parse_query_xml, prop_to_xml, query_to_xml, relation_to_xml

__all__ = [
    "QueryDocument", "render_result",
    "ParseError", "parse_prop", "parse_query", "parse_relation", "parse_signature", "parse_type",
    "print_prop", "print_query", "print_relation", "print_signature", "print_type",
    "parse_query_xml", "prop_to_xml", "query_to_xml", "relation_to_xml",
]
