"""Mapping JSON document paths to source line numbers.

A minimal scanner (strings with escapes, containers, scalars) walks the
text once and records the line on which each value starts, keyed by a
dotted/bracketed path like ``params.A[1]``.  Used to make schema
violations point at the offending config line.
"""

from __future__ import annotations

import json

__all__ = ["json_path_lines", "schema_path_string"]


def _skip_string(text: str, i: int) -> int:
    i += 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == '"':
            return i + 1
        i += 1
    return i


def json_path_lines(text: str) -> dict[str, int]:
    """Path -> 1-based line of the value start, first occurrence wins."""
    paths: dict[str, int] = {}
    frames: list[list] = []  # ["obj", key | None] or ["arr", index]
    line = 1
    i, n = 0, len(text)

    def path_str():
        s = ""
        for kind, v in frames:
            if kind == "obj":
                if v is None:
                    return None
                s = f"{s}.{v}" if s else str(v)
            else:
                s = f"{s}[{v}]"
        return s

    def record():
        p = path_str()
        if p:
            paths.setdefault(p, line)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c in " \t\r":
            i += 1
        elif c == "{":
            record()
            frames.append(["obj", None])
            i += 1
        elif c == "[":
            record()
            frames.append(["arr", 0])
            i += 1
        elif c in "}]":
            if frames:
                frames.pop()
            i += 1
        elif c == ",":
            if frames:
                if frames[-1][0] == "arr":
                    frames[-1][1] += 1
                else:
                    frames[-1][1] = None
            i += 1
        elif c == ":":
            i += 1
        elif c == '"':
            j = _skip_string(text, i)
            if frames and frames[-1][0] == "obj" and frames[-1][1] is None:
                try:
                    frames[-1][1] = json.loads(text[i:j])
                except json.JSONDecodeError:
                    frames[-1][1] = text[i + 1: j - 1]
            else:
                record()
            i = j
        else:
            j = i
            while j < n and text[j] not in ",}] \t\r\n":
                j += 1
            record()
            i = j
    return paths


def schema_path_string(absolute_path) -> str:
    """Render a jsonschema error path (deque of keys/indices) as a path string."""
    s = ""
    for part in absolute_path:
        if isinstance(part, int):
            s = f"{s}[{part}]"
        else:
            s = f"{s}.{part}" if s else str(part)
    return s
