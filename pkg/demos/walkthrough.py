"""Evaluate the demo queries through the Python API and print the results."""

from pathlib import Path

from qmt.frontend.documents import QueryDocument, render_result
from qmt.mmt.library import load_library
from qmt.mmt.model import mmt_model

HERE = Path(__file__).parent


def show(model, name, lenient=False):
    path = HERE / "queries" / name
    doc = QueryDocument.parse(path.read_text(encoding="utf-8"))
    doc.lenient_filter = doc.lenient_filter or lenient
    print(f"== {name}{' (lenient)' if lenient else ''}")
    print(render_result(doc.run(model), "text"))


def main():
    nd = mmt_model(load_library(HERE / "library.json"))
    show(nd, "witnesses.txt")
    show(nd, "inference.txt")
    show(nd, "uses_i.txt")
    show(nd, "uses_i.txt", lenient=True)
    graph = mmt_model(load_library(HERE / "graph.json"))
    show(graph, "views.xml")
    show(graph, "extension.json")


if __name__ == "__main__":
    main()
