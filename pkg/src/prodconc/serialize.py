"""JSON input specs and canonical (byte-stable) report output."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .concentration import ProcessFamily
from .errors import ParseError, ProdConcError
from .randvar import Dense, Junta, RandomVariable, Rank1, indicator_product
from .space import ProductSpace, make_finite_space, product_space, uniform_product


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def parse_space(doc: dict) -> ProductSpace:
    """``{"factors": [{"weights": [...]}, ...]}`` or ``{"uniform": {"k": k, "n": n}}``."""
    try:
        if "uniform" in doc:
            u = doc["uniform"]
            return uniform_product(int(u["k"]), int(u["n"]))
        return product_space(make_finite_space(f["weights"]) for f in doc["factors"])
    except ProdConcError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed space specification: {exc}") from exc


def parse_rv(doc: dict, space: ProductSpace) -> RandomVariable:
    try:
        kind = doc["type"]
        if kind == "dense":
            return Dense.from_values(space, doc["values"])
        if kind == "rank1":
            return Rank1(space, tuple(np.asarray(f, dtype=float) for f in doc["factors"]))
        if kind == "junta":
            return Junta.from_values(space, doc["coords"], doc["values"])
        if kind == "indicator_product":
            return indicator_product(space, doc["sets"])
    except ProdConcError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed random-variable specification: {exc}") from exc
    raise ParseError(f"unknown random-variable type {doc.get('type')!r}")


def parse_family(doc: dict, space: ProductSpace) -> ProcessFamily:
    """``{"t_weights": [...], "members": [<random-variable spec>, ...]}``."""
    try:
        weights = make_finite_space(doc["t_weights"])
        members = tuple(parse_rv(m, space) for m in doc["members"])
    except ProdConcError:
        raise
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed family specification: {exc}") from exc
    return ProcessFamily(weights, members)


def _encode(obj) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r} in report")
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Sorted keys, no whitespace, floats at 17 significant digits."""
    return _encode(obj) + "\n"


def emit_report(report, path) -> None:
    """Write ``report`` (a dict, list, or object with ``to_dict``) canonically to ``path``."""
    if hasattr(report, "to_dict"):
        report = report.to_dict()
    text = dumps_canonical(report)
    if str(path) == "-":
        print(text, end="")
        return
    Path(path).write_text(text)
