"""Deterministic serialization: 17-significant-digit floats, stable JSON/CSV.

Every number that lands in an output file goes through fmt17, which
round-trips binary64 exactly and is byte-stable across platforms and worker
counts (no locale, no wall-clock dependence).
"""

from __future__ import annotations

import hashlib
import math


def fmt17(x) -> str:
    """Canonical text for a float: 17 significant digits (exact round-trip)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps_json(obj, indent: int = 0) -> str:
    """JSON text with floats in fmt17 form.  Supports dict/list/str/int/float/
    bool/None and tuples (as arrays); dict keys must be strings."""
    pad = " " * indent

    def enc(o, depth):
        if o is None:
            return "null"
        if isinstance(o, bool):
            return "true" if o else "false"
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return fmt17(o)
        if isinstance(o, str):
            return _escape(o)
        if isinstance(o, (list, tuple)):
            items = [enc(v, depth + 1) for v in o]
            return _join("[", items, "]", depth)
        if isinstance(o, dict):
            items = [f"{_escape(str(k))}: {enc(v, depth + 1)}" for k, v in o.items()]
            return _join("{", items, "}", depth)
        if hasattr(o, "item"):  # numpy scalars
            return enc(o.item(), depth)
        raise TypeError(f"cannot serialize {type(o)!r}")

    def _join(opening, items, closing, depth):
        if not indent or not items:
            return opening + ", ".join(items) + closing
        inner = ",\n".join((pad * (depth + 1)) + s for s in items)
        return opening + "\n" + inner + "\n" + pad * depth + closing

    return enc(obj, 0)


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
