"""CSV and JSON emission at 17 significant digits, and gate-spec files.

A gate spec is {"q", "kind", "params", "matrix"} with the matrix stored as
row-major [re, im] pairs.  Seventeen significant digits reproduce every
float64 exactly, so a spec written here reloads to a bit-identical gate.
"""

from __future__ import annotations

import csv
import inspect
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .gates import _RECIPES, gate_from_recipe
from .tensor_core import UnitaryGate, decode_matrix, encode_matrix


def fmt(x: Any) -> str:
    """One CSV cell: floats at 17 significant digits, everything else via str."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if x is None:
        return ""
    return str(x)


def _plain(obj: Any) -> Any:
    """Recursively turn numpy scalars, arrays, tuples and complex numbers into JSON types."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written at 17 significant digits; NaN and inf become null."""

    def enc(o: Any, level: int) -> str:
        pad, inner = " " * (indent * level), " " * (indent * (level + 1))
        if isinstance(o, bool) or o is None or isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return f"{o:.17g}" if math.isfinite(o) else "null"
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(inner + enc(v, level + 1) for v in o) + "\n" + pad + "]"
        raise TypeError(f"cannot serialise {type(o).__name__}")

    return enc(_plain(obj), 0) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path: "str | Path", rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> Path:
    path = Path(path)
    _atomic_write(path, csv_text(rows, columns))
    return path


def write_json(path: "str | Path", obj: Any) -> Path:
    path = Path(path)
    _atomic_write(path, dumps(obj))
    return path


def read_csv(path: "str | Path") -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ------------------------------------------------------------------ gate specs


def gate_to_spec(U: UnitaryGate, with_matrix: bool = True) -> dict:
    spec = {"q": U.q, "kind": U.kind, "params": U.recipe.get("params", {})}
    if with_matrix:
        spec["matrix"] = encode_matrix(U.matrix)
    return spec


def _accepts(kind: str, name: str) -> bool:
    fn = _RECIPES.get(kind)
    return fn is not None and name in inspect.signature(fn).parameters


def gate_from_spec(spec: Mapping[str, Any]) -> UnitaryGate:
    """Load a gate spec; a stored matrix wins over replaying the recipe."""
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise ValueError("gate spec needs a 'kind' field")
    kind = spec["kind"]
    params = dict(spec.get("params") or {})
    q = spec.get("q")
    if spec.get("matrix") is not None:
        M = decode_matrix(spec["matrix"])
        d = M.shape[0]
        qq = int(round(math.sqrt(d)))
        if q is not None and q != qq:
            raise ValueError(f"gate spec says q={q} but the matrix is {d}x{d}")
        return UnitaryGate(qq, M, {"kind": kind, "params": params})
    if kind == "explicit":
        raise ValueError("an explicit gate spec needs a 'matrix' field")
    if q is not None and "q" not in params and _accepts(kind, "q"):
        params["q"] = q
    G = gate_from_recipe({"kind": kind, "params": params})
    if q is not None and G.q != q:
        raise ValueError(f"gate spec says q={q} but the recipe builds q={G.q}")
    return G


def save_gate(path: "str | Path", U: UnitaryGate) -> Path:
    return write_json(path, gate_to_spec(U))


def load_gate(path: "str | Path") -> UnitaryGate:
    with open(path) as fh:
        return gate_from_spec(json.load(fh))
