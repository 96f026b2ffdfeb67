"""QMT: a typed query language for formal mathematical libraries."""

from .checker import (
    ErrorKind, SignatureError, TypeCheckError, check_prop, check_query, check_relation,
    check_signature, check_type, infer_query,
)
from .evaluator import Model, ModelError, Outcome, Undefined, eval_prop, eval_query, run_query
from .index import Index, build_index, image, load_index, save_index
from .kernel import CaptureError, Context, Signature, alpha_rename, free_vars

__version__ = "0.1.0"

__all__ = [
    "ErrorKind", "SignatureError", "TypeCheckError", "check_prop", "check_query", "check_relation",
    "check_signature", "check_type", "infer_query",
    "Model", "ModelError", "Outcome", "Undefined", "eval_prop", "eval_query", "run_query",
    "Index", "build_index", "image", "load_index", "save_index",
    "CaptureError", "Context", "Signature", "alpha_rename", "free_vars",
]
