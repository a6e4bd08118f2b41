"""Deterministic JSON serialization and content hashing.

Canonical form: UTF-8, keys sorted by codepoint, no insignificant
whitespace, NaN/Infinity rejected. Identical logical objects must always
produce identical bytes -- request hashes, fixture keys, and rendered
reports all depend on it.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_dumps(obj: Any) -> str:
    """Canonical JSON string: sorted keys, compact separators."""
    return json.dumps(
        obj,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_bytes(obj: Any) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_hash(obj: Any) -> str:
    """SHA-256 hex digest of the canonical JSON bytes."""
    return sha256_hex(canonical_bytes(obj))
