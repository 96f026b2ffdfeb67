"""Type inference plugins for ``typeof``, selected by type-system theory."""

from __future__ import annotations

from .objects import ARROW, LAMBDA, OMA, OMBIND, OMS, OMV, alpha_equal, arrow, unwrap_free


class IllTyped(Exception):
    pass


class SimplyTyped:
    """Simply-typed lambda calculus.

    Types are objects built from symbols and the reserved n-ary arrow
    ``OMA(OMS(arrow), A1, ..., An, B)``; terms are constants (typed by the
    library), context variables, applications and annotated lambdas.
    """

    name = "stlc"

    def infer(self, term, constant_type):
        """``constant_type(uri)`` returns a constant's declared type or None."""
        ctx, body = unwrap_free(term)
        env = []
        for vd in ctx:
            env.append((vd.name, vd.type))
        return self._infer(body, env, constant_type)

    def _infer(self, t, env, constant_type):
        if isinstance(t, OMV):
            for name, ty in reversed(env):
                if name == t.name:
                    if ty is None:
                        raise IllTyped(f"variable {t.name} has no type")
                    return ty
            raise IllTyped(f"unbound variable {t.name}")
        if isinstance(t, OMS):
            if t.uri in (ARROW, LAMBDA):
                raise IllTyped(f"{t.uri} is not a term")
            ty = constant_type(t.uri)
            if ty is None:
                raise IllTyped(f"no type for {t.uri}")
            return ty
        if isinstance(t, OMA):
            if isinstance(t.head, OMS) and t.head.uri == ARROW:
                raise IllTyped("types are not terms")
            fty = self._infer(t.head, env, constant_type)
            for a in t.args:
                dom, cod = _split_arrow(fty)
                aty = self._infer(a, env, constant_type)
                if not alpha_equal(dom, aty):
                    raise IllTyped("argument type mismatch")
                fty = cod
            return fty
        if isinstance(t, OMBIND):
            if not (isinstance(t.binder, OMS) and t.binder.uri == LAMBDA):
                raise IllTyped("only lambda binders are typed")
            doms = []
            env = list(env)
            for vd in t.context:
                if vd.type is None:
                    raise IllTyped(f"lambda variable {vd.name} needs a type")
                doms.append(vd.type)
                env.append((vd.name, vd.type))
            cod = self._infer(t.body, env, constant_type)
            return arrow(*doms, cod) if doms else cod
        raise IllTyped("literals have no type in this system")


def _split_arrow(ty):
    if isinstance(ty, OMA) and isinstance(ty.head, OMS) and ty.head.uri == ARROW and len(ty.args) >= 2:
        rest = ty.args[1:]
        return ty.args[0], rest[0] if len(rest) == 1 else OMA(OMS(ARROW), rest)
    raise IllTyped("applying a non-function")


PLUGINS = {"stlc": SimplyTyped()}


def register_plugin(name: str, plugin) -> None:
    PLUGINS[name] = plugin
