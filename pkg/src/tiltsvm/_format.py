"""Deterministic text serialization helpers (CSV rows, JSON documents)."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from typing import Any


def fmt_float(x: float) -> str:
    """Format a float with 17 significant digits (exact round trip)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    s = format(x, ".17g")
    if s == "-0":
        s = "0"
    return s


def fmt_acc(x: float) -> str:
    """Format an accuracy with 6 significant digits."""
    return format(float(x), ".6g")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """Serialize ``obj`` as JSON, writing floats via :func:`fmt_float`.

    The standard library encoder always uses ``float.__repr__``; the model
    format pins 17 significant digits, so floats are emitted here instead.
    Only dict/list/tuple/str/int/float/bool/None are supported.
    """
    out: list[str] = []
    _dump(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _dump(obj: Any, out: list[str], indent: int, level: int) -> None:
    import json

    if obj is None or isinstance(obj, (bool, str)):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        pad = "\n" + " " * (indent * (level + 1))
        out.append("{")
        for n, (k, v) in enumerate(obj.items()):
            if n:
                out.append(",")
            out.append(pad)
            out.append(json.dumps(str(k)))
            out.append(": ")
            _dump(v, out, indent, level + 1)
        out.append("\n" + " " * (indent * level) + "}")
    elif isinstance(obj, (list, tuple)):
        # numeric vectors stay on one line to keep model files readable
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            out.append("[")
            for n, v in enumerate(obj):
                if n:
                    out.append(", ")
                _dump(v, out, indent, level + 1)
            out.append("]")
            return
        if not obj:
            out.append("[]")
            return
        pad = "\n" + " " * (indent * (level + 1))
        out.append("[")
        for n, v in enumerate(obj):
            if n:
                out.append(",")
            out.append(pad)
            _dump(v, out, indent, level + 1)
        out.append("\n" + " " * (indent * level) + "]")
    else:
        raise TypeError(f"unsupported type {type(obj).__name__}")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
