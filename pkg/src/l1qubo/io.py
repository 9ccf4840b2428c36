"""Model and gadget-metadata file formats.

JSON model::

    {"num_vars": n, "linear": [[i, v], ...], "quadratic": [[i, j, v], ...], "offset": v}

Coordinate text (qbsolv-like)::

    c comment
    n <num_vars>
    o <offset>
    i i v        # linear
    i j v        # quadratic, i < j after normalization
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import TextIO

from .encoding import AffineExpr, FixedPointEncoding
from .errors import ParseError
from .gadgets import GadgetExpansion
from .qubo import QuboModel

__all__ = [
    "model_to_json",
    "model_from_json",
    "write_json",
    "read_json",
    "write_coo",
    "read_coo",
    "read_model",
    "write_model",
    "gadget_metadata",
    "read_gadget_metadata",
]


def _num(v) -> str:
    return repr(float(v))


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} not allowed")


def _finite(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ParseError(f"{where}: non-finite value")
    return v


def model_to_json(model: QuboModel) -> dict:
    return {
        "num_vars": model.num_vars,
        "linear": [[i, v] for i, v in sorted(model.linear.items())],
        "quadratic": [[i, j, v] for (i, j), v in sorted(model.quadratic.items())],
        "offset": model.offset,
    }


def model_from_json(obj: dict) -> QuboModel:
    try:
        n = obj["num_vars"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ParseError(f"num_vars must be a non-negative integer, got {n!r}")
        linear: dict[int, float] = {}
        for entry in obj.get("linear", []):
            i, v = entry
            if i in linear:
                raise ParseError(f"duplicate linear entry for {i}")
            linear[int(i)] = _finite(v, f"linear[{i}]")
        quadratic: dict[tuple[int, int], float] = {}
        for entry in obj.get("quadratic", []):
            i, j, v = entry
            if not i < j:
                raise ParseError(f"quadratic entry ({i}, {j}) must have i < j")
            if (i, j) in quadratic:
                raise ParseError(f"duplicate quadratic entry ({i}, {j})")
            quadratic[(int(i), int(j))] = _finite(v, f"quadratic[{i},{j}]")
        offset = _finite(obj.get("offset", 0.0), "offset")
        return QuboModel(n, linear, quadratic, offset)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed model: {exc}") from exc


def write_json(model: QuboModel, fh: TextIO) -> None:
    json.dump(model_to_json(model), fh, indent=1, allow_nan=False)
    fh.write("\n")


def read_json(fh: TextIO) -> QuboModel:
    try:
        obj = json.load(fh, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    return model_from_json(obj)


def write_coo(model: QuboModel, fh: TextIO) -> None:
    fh.write(f"n {model.num_vars}\n")
    fh.write(f"o {_num(model.offset)}\n")
    entries = [((i, i), v) for i, v in model.linear.items()] + list(model.quadratic.items())
    for (i, j), v in sorted(entries):
        fh.write(f"{i} {j} {_num(v)}\n")


def read_coo(fh: TextIO) -> QuboModel:
    n = None
    offset = 0.0
    seen_offset = False
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(fh, start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "n":
                if n is not None or len(parts) != 2:
                    raise ParseError("bad or repeated 'n' line", lineno)
                n = int(parts[1])
                if n < 0:
                    raise ParseError("negative variable count", lineno)
                continue
            if parts[0] == "o":
                if seen_offset or len(parts) != 2:
                    raise ParseError("bad or repeated 'o' line", lineno)
                offset = float(parts[1])
                if not math.isfinite(offset):
                    raise ParseError("non-finite offset", lineno)
                seen_offset = True
                continue
            if n is None:
                raise ParseError("coefficient before the 'n' header", lineno)
            if len(parts) != 3:
                raise ParseError(f"expected 'i j value', got {raw.strip()!r}", lineno)
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), lineno) from exc
        if not math.isfinite(v):
            raise ParseError("non-finite coefficient", lineno)
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"index out of range 0..{n - 1}", lineno)
        if i == j:
            if i in linear:
                raise ParseError(f"duplicate entry ({i}, {j})", lineno)
            linear[i] = v
        else:
            key = (min(i, j), max(i, j))
            if key in quadratic:
                raise ParseError(f"duplicate entry {key}", lineno)
            quadratic[key] = v
    if n is None:
        raise ParseError("missing 'n' header")
    return QuboModel(n, linear, quadratic, offset)


def _is_json(path: Path) -> bool:
    return path.suffix.lower() == ".json"


def read_model(path) -> QuboModel:
    """Read a model, choosing the format from the file extension (``.json`` or anything else)."""
    path = Path(path)
    with path.open() as fh:
        return read_json(fh) if _is_json(path) else read_coo(fh)


def write_model(model: QuboModel, path) -> None:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        (write_json if _is_json(path) else write_coo)(model, fh)


def gadget_metadata(g: GadgetExpansion) -> dict:
    return {
        "variant": g.variant,
        "M": None if g.penalty is None else g.penalty.M,
        "input": g.input.to_json(),
        "aux": {name: enc.to_json() for name, enc in g.aux.items()},
    }


def read_gadget_metadata(obj: dict) -> tuple[str, float | None, AffineExpr, dict[str, FixedPointEncoding]]:
    aux = {name: FixedPointEncoding.from_json(e) for name, e in obj["aux"].items()}
    return obj["variant"], obj["M"], AffineExpr.from_json(obj["input"]), aux
