"""A-priori indices: hash sets for concepts, bidirectional adjacency tables
for relations, and image computation for relation expressions."""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field

from .checker import ErrorKind, TypeCheckError
from .kernel import Closure, Compose, Inverse, Rel, RelDiff, RelIntersect, RelUnion

INDEX_FORMAT = "qmt-index"
INDEX_VERSION = 1


@dataclass
class Adjacency:
    forward: dict = field(default_factory=dict)
    backward: dict = field(default_factory=dict)

    def add(self, u, v):
        self.forward.setdefault(u, set()).add(v)
        self.backward.setdefault(v, set()).add(u)

    def pairs(self):
        for u, vs in self.forward.items():
            for v in vs:
                yield u, v

    def freeze(self):
        self.forward = {k: frozenset(v) for k, v in self.forward.items()}
        self.backward = {k: frozenset(v) for k, v in self.backward.items()}


@dataclass
class Index:
    concepts: dict = field(default_factory=dict)   # name -> frozenset of values
    relations: dict = field(default_factory=dict)  # name -> Adjacency

    def extension(self, concept: str) -> frozenset:
        return self.concepts.get(concept, frozenset())

    def step(self, relation: str, u, backward: bool = False) -> frozenset:
        adj = self.relations.get(relation)
        if adj is None:
            return frozenset()
        table = adj.backward if backward else adj.forward
        return table.get(u, frozenset())

    def fact_count(self) -> int:
        n = sum(len(c) for c in self.concepts.values())
        return n + sum(sum(len(vs) for vs in adj.forward.values()) for adj in self.relations.values())


def build_index(facts, signature=None, inhabits=None) -> Index:
    """Build indices from ``(concept, value)`` and ``(relation, u, v)`` facts.

    With a signature, facts about undeclared symbols are rejected; with an
    ``inhabits(value, base_type)`` test, ill-sorted facts are rejected too.
    """
    concepts: dict[str, set] = {}
    relations: dict[str, Adjacency] = {}
    if signature is not None:
        for d in signature.concepts():
            concepts.setdefault(d.name, set())
        for d in signature.relations():
            relations.setdefault(d.name, Adjacency())
    for fact in facts:
        if len(fact) == 2:
            name, v = fact
            if signature is not None:
                d = signature.concept(name)
                if d is None:
                    raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"fact about unknown concept {name!r}")
                if inhabits is not None and not inhabits(v, d.of):
                    raise TypeCheckError(ErrorKind.TYPE_MISMATCH, f"{v!r} is not a {d.of} (concept {name})")
            concepts.setdefault(name, set()).add(v)
        elif len(fact) == 3:
            name, u, v = fact
            if signature is not None:
                d = signature.relation(name)
                if d is None:
                    raise TypeCheckError(ErrorKind.UNKNOWN_SYMBOL, f"fact about unknown relation {name!r}")
                if inhabits is not None and not (inhabits(u, d.source) and inhabits(v, d.target)):
                    raise TypeCheckError(ErrorKind.TYPE_MISMATCH,
                                         f"({u!r}, {v!r}) is not in ({d.source}, {d.target}) (relation {name})")
            relations.setdefault(name, Adjacency()).add(u, v)
        else:
            raise ValueError(f"malformed fact: {fact!r}")
    for adj in relations.values():
        adj.freeze()
    return Index({k: frozenset(v) for k, v in concepts.items()}, relations)


class ImageCache:
    """Memo table for relation images; lives for a single evaluation."""

    def __init__(self, index: Index):
        self.index = index
        self._memo: dict = {}

    def image(self, R, u, inverted: bool = False) -> frozenset:
        key = (R, inverted, u)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._compute(R, u, inverted)
            self._memo[key] = hit
        return hit

    def _compute(self, R, u, inverted):
        if isinstance(R, Rel):
            return self.index.step(R.name, u, backward=inverted)
        if isinstance(R, Inverse):
            return self.image(R.rel, u, not inverted)
        if isinstance(R, Closure):
            # strict closure: u itself only if it lies on a cycle
            seen = set()
            todo = deque(self.image(R.rel, u, inverted))
            while todo:
                v = todo.popleft()
                if v in seen:
                    continue
                seen.add(v)
                todo.extend(w for w in self.image(R.rel, v, inverted) if w not in seen)
            return frozenset(seen)
        if isinstance(R, Compose):
            first, second = (R.right, R.left) if inverted else (R.left, R.right)
            out = set()
            for v in self.image(first, u, inverted):
                out |= self.image(second, v, inverted)
            return frozenset(out)
        if isinstance(R, RelUnion):
            return self.image(R.left, u, inverted) | self.image(R.right, u, inverted)
        if isinstance(R, RelIntersect):
            return self.image(R.left, u, inverted) & self.image(R.right, u, inverted)
        if isinstance(R, RelDiff):
            return self.image(R.left, u, inverted) - self.image(R.right, u, inverted)
        raise TypeError(f"not a relation expression: {R!r}")


def image(R, u, index: Index) -> frozenset:
    """All v with (u, v) in the denotation of R."""
    return ImageCache(index).image(R, u)


# -- cache files --------------------------------------------------------------


def save_index(index: Index, path, key: str) -> None:
    from .codec import value_to_json

    doc = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "key": key,
        "concepts": {c: [value_to_json(v) for v in vs] for c, vs in index.concepts.items()},
        "relations": {r: [[value_to_json(u), value_to_json(v)] for u, v in adj.pairs()]
                      for r, adj in index.relations.items()},
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(doc, f)
    os.replace(tmp, path)


def load_index(path, key: str) -> Index | None:
    """Load a cached index; None if missing, stale, or of another format version."""
    from .codec import value_from_json

    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except (OSError, ValueError):
        return None
    if doc.get("format") != INDEX_FORMAT or doc.get("version") != INDEX_VERSION or doc.get("key") != key:
        return None
    facts = []
    for c, vs in doc["concepts"].items():
        facts.extend((c, value_from_json(v)) for v in vs)
    index = build_index(facts)
    for c in doc["concepts"]:
        index.concepts.setdefault(c, frozenset())
    for r, pairs in doc["relations"].items():
        adj = Adjacency()
        for u, v in pairs:
            adj.add(value_from_json(u), value_from_json(v))
        adj.freeze()
        index.relations[r] = adj
    return index
