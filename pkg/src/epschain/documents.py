"""Shared conventions for the JSON documents this package reads and writes.

Every document carries a ``schema_version`` and a ``kind`` field.  Emission is
canonical (sorted keys, two-space indent, trailing newline) so that identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    """Raised when a document is malformed or fails validation."""


def dumps_doc(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_doc(doc: dict, path) -> None:
    Path(path).write_text(dumps_doc(doc), encoding="utf-8")


def parse_doc(text: str, expected_kind: str | None = None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    if expected_kind is not None and doc.get("kind") != expected_kind:
        raise DocumentError(
            f"expected kind {expected_kind!r}, got {doc.get('kind')!r}"
        )
    return doc


def read_doc(path, expected_kind: str | None = None) -> dict:
    return parse_doc(Path(path).read_text(encoding="utf-8"), expected_kind)
