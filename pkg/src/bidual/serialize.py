"""JSON I/O with every number written as a decimal string."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np


def stringify(obj: Any) -> Any:
    """Recursively turn ints, numpy scalars and Fractions into decimal strings.

    Booleans and None pass through; tuples become lists.
    """
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return bool(obj) if obj is not None else None
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return repr(float(obj))
    if isinstance(obj, str):
        return obj
    if isinstance(obj, dict):
        return {str(k): stringify(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return stringify(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [stringify(v) for v in obj]
    if hasattr(obj, "to_json"):
        return stringify(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(stringify(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_input(spec: str | None) -> Any:
    """Parse --input: a path to a JSON file, inline JSON, or '-' for stdin."""
    if spec is None:
        return None
    if spec == "-":
        import sys

        return json.loads(sys.stdin.read())
    s = spec.strip()
    if s.startswith("{") or s.startswith("["):
        return json.loads(s)
    return json.loads(Path(spec).read_text(encoding="utf-8"))


def write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
