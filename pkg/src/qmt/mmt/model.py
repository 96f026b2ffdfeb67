"""The QMT signature for MMT libraries and the model a library induces."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from ..checker import check_signature
from ..evaluator import Model, Undefined
from ..index import Index, build_index
from ..kernel import (
    BaseTypeDecl, ConceptDecl, FunctionDecl, Obj, PredicateDecl, RelationDecl, SetType, Signature, Tup,
    Uri, Xml, base, product, set_of,
)
from ..sugar import family_index, indexed_family, install_predefined
from . import objects
from .library import Library, extract_facts, includes_closure
from .objects import OMA, OMBIND, RESERVED_URIS, head_symbol, unwrap_free, wrap_free
from .render import Renderer, to_markup
from .typing import PLUGINS, IllTyped
from .unify import SubtermIndex, subobjects

URI, OBJ, XML = "uri", "obj", "xml"


def _subobjat_type(name, types):
    if types == (base(OBJ),):
        return base(OBJ)
    return None


SUBOBJAT = indexed_family("subobjat", _subobjat_type)

MMT_DECLS = (
    BaseTypeDecl(URI),
    BaseTypeDecl(OBJ),
    BaseTypeDecl(XML),
    ConceptDecl("theory", URI),
    ConceptDecl("view", URI),
    ConceptDecl("constant", URI),
    ConceptDecl("style", URI),
    RelationDecl("includes", URI, URI),
    RelationDecl("declares", URI, URI),
    RelationDecl("domain", URI, URI),
    RelationDecl("codomain", URI, URI),
    # option types are read as the plain type; undefinedness is the error value
    FunctionDecl("typeOF", (base(URI),), base(OBJ)),
    FunctionDecl("defOF", (base(URI),), base(OBJ)),
    FunctionDecl("typeof", (base(URI), base(OBJ)), base(OBJ)),
    FunctionDecl("subobjhead", (base(OBJ), base(URI)), set_of(OBJ)),
    FunctionDecl("unify", (base(OBJ),), SetType(product(URI, OBJ, OBJ))),
    FunctionDecl("render", (base(URI), base(URI)), base(XML)),
    FunctionDecl("render", (base(OBJ), base(URI)), base(XML)),
    PredicateDecl("occurs", (base(URI), base(OBJ))),
)


def mmt_signature() -> Signature:
    sig = check_signature(MMT_DECLS, Signature(families=(SUBOBJAT,)))
    return install_predefined(sig)


class MMTFunctions:
    """Host implementations of the MMT function and predicate symbols over one library."""

    def __init__(self, lib: Library, plugins=None):
        self.lib = lib
        self.plugins = dict(PLUGINS)
        self.plugins.update(plugins or {})
        self.subterms = SubtermIndex(lib)

    # -- typeOF / defOF ---------------------------------------------------

    def type_of(self, u: Uri):
        c = self.lib.constants.get(u.text)
        if c is None:
            raise Undefined("typeOF", (u,), f"{u.text} is not a constant")
        if c.type is None:
            raise Undefined("typeOF", (u,), f"constant {u.text} has no type")
        return Obj(c.type)

    def def_of(self, u: Uri):
        c = self.lib.constants.get(u.text)
        if c is None:
            raise Undefined("defOF", (u,), f"{u.text} is not a constant")
        if c.definiens is None:
            raise Undefined("defOF", (u,), f"constant {u.text} has no definiens")
        return Obj(c.definiens)

    # -- typeof -----------------------------------------------------------

    def plugin_for(self, theory: str):
        for t in includes_closure(self.lib, theory):
            name = self.lib.typesystems.get(t)
            if name is not None and name in self.plugins:
                return self.plugins[name]
        return None

    def infer(self, ts: Uri, o: Obj):
        plugin = self.plugin_for(ts.text)
        if plugin is None:
            raise Undefined("typeof", (ts, o), f"NoPluginForTheory: {ts.text}")

        def constant_type(uri):
            c = self.lib.constants.get(uri)
            return None if c is None else c.type

        try:
            return Obj(plugin.infer(o.term, constant_type))
        except IllTyped as e:
            raise Undefined("typeof", (ts, o), f"ill-typed: {e}") from None

    # -- subobjects ---------------------------------------------------------

    def subobjat(self, name: str, o: Obj):
        p = family_index(name)
        ctx, t = unwrap_free(o.term)
        if isinstance(t, OMA):
            parts = (t.head,) + t.args
            if p < len(parts):
                return Obj(wrap_free(ctx, parts[p]))
        elif isinstance(t, OMBIND):
            if p == 1:
                return Obj(wrap_free(ctx, t.binder))
            if p == 2:
                return Obj(wrap_free(ctx + t.context, t.body))
        raise Undefined(name, (o,), f"no subobject at position {p}")

    def subobjhead(self, o: Obj, h: Uri):
        # a symbol in head or binder position is represented by its application
        return frozenset(Obj(wrap_free(sc, t)) for t, sc in subobjects(o.term, heads=False)
                         if head_symbol(t) == h.text)

    def unify(self, o: Obj):
        return frozenset(Tup((Uri(u), Obj(sub), Obj(s))) for u, sub, s in self.subterms.unify(o.term))

    # -- rendering ------------------------------------------------------------

    def _renderer(self, style: Uri, what):
        s = self.lib.styles.get(style.text)
        if s is None:
            raise Undefined("render", what, f"{style.text} is not a style")
        return Renderer(s)

    def render_decl(self, u: Uri, style: Uri):
        r = self._renderer(style, (u, style))
        decl = self.lib.declaration(u.text)
        if decl is None:
            raise Undefined("render", (u, style), f"{u.text} is not declared")
        return Xml(to_markup(r.declaration(decl, self.lib)))

    def render_obj(self, o: Obj, style: Uri):
        r = self._renderer(style, (o, style))
        el = ET.Element("math")
        el.append(r.object(o.term))
        return Xml(to_markup(el))

    # -- predicates and literals -----------------------------------------------

    @staticmethod
    def occurs(u: Uri, o: Obj) -> bool:
        return u.text in objects.symbols(o.term)

    def in_universe(self, uri: str) -> bool:
        return uri in RESERVED_URIS or self.lib.declares_uri(uri)

    def literal(self, base_type: str, value):
        if base_type == URI:
            if isinstance(value, str) and self.lib.declares_uri(value):
                return Uri(value)
            raise Undefined("literal", (Uri(str(value)),), f"{value} is not declared in the library")
        if base_type == OBJ:
            missing = sorted(s for s in objects.symbols(value) if not self.in_universe(s))
            if missing:
                raise Undefined("literal", (Obj(value),), f"undeclared symbols {missing}")
            return Obj(value)
        if base_type == XML:
            try:
                return Xml(ET.tostring(ET.fromstring(value), encoding="unicode"))
            except ET.ParseError as e:
                raise Undefined("literal", (), f"malformed XML literal: {e}") from None
        raise Undefined("literal", (), f"no literals of type {base_type}")


def mmt_model(lib: Library, plugins=None, index: Index | None = None) -> Model:
    """The model of the MMT signature induced by ``lib``.

    ``index`` may be a previously built (e.g. cached) index of the same library.
    """
    sig = mmt_signature()
    fns = MMTFunctions(lib, plugins)
    inhabitants = {
        URI: lambda v: isinstance(v, Uri),
        OBJ: lambda v: isinstance(v, Obj),
        XML: lambda v: isinstance(v, Xml),
    }
    if index is None:
        index = build_index(extract_facts(lib), sig, lambda v, a: inhabitants[a](v))
    model = Model(
        sig,
        index,
        functions={
            "typeOF": fns.type_of,
            "defOF": fns.def_of,
            "typeof": fns.infer,
            "subobjhead": fns.subobjhead,
            "unify": fns.unify,
            ("render", (base(URI), base(URI))): fns.render_decl,
            ("render", (base(OBJ), base(URI))): fns.render_obj,
        },
        predicates={"occurs": fns.occurs},
        families={"subobjat": fns.subobjat},
        inhabitants=inhabitants,
        literal=fns.literal,
    )
    model.library = lib
    model.mmt = fns
    return model
