"""Canonical serialization, content digests, and seed derivation.

Run identifiers, cache keys, and per-call RNG seeds all hash the same
canonical JSON form so identical inputs always map to identical outputs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace, unicode kept."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest_of(obj, length: int = 16) -> str:
    """Hex digest prefix of an object's canonical JSON."""
    raw = canonical_json(obj).encode("utf-8")
    return hashlib.sha256(raw).hexdigest()[:length]


def file_digest(path, length: int = 16) -> str:
    """Hex digest prefix of a file's bytes."""
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()[:length]


def derive_seed(*parts) -> int:
    """Stable non-negative 63-bit seed from arbitrary JSON-able parts."""
    raw = canonical_json(list(parts)).encode("utf-8")
    digest = hashlib.sha256(raw).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)
