"""Line-oriented ``key value`` text format used by configs and scene files.

One entry per line: the first whitespace separates the key from the value,
``#`` starts a comment, blank lines are ignored. Keys are lower-case dotted
identifiers; values keep their literal text until a typed accessor parses
them.
"""

from __future__ import annotations

import os


def parse_kv(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'key value', got {raw!r}")
        key, value = parts
        if key in entries:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value.strip()
    return entries


def format_kv(entries: dict[str, str]) -> str:
    return "".join(f"{key} {value}\n" for key, value in entries.items())


def read_kv(path: str | os.PathLike) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv(fh.read())


def write_kv(path: str | os.PathLike, entries: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kv(entries))
