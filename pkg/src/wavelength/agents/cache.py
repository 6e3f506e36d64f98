"""Content-addressed response cache backed by append-only JSONL shards.

A request's key is the digest of its identifying fields (model, prompt,
mode, estimator, temperature, seed, sample index). Records land in a shard
named by the key's first two hex chars. Appends are serialized through a
process lock; readers tolerate concurrent appends and corrupt lines: a bad
line is skipped and logged, and the next put for that key simply appends a
fresh record (last record wins on read).
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from ..errors import CacheCorruption
from ..hashing import digest_of

logger = logging.getLogger(__name__)


class RequestCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._mem = {}
        self.hits = 0
        self.misses = 0
        self.corrupt_lines = 0

    @staticmethod
    def request_key(**fields) -> str:
        return digest_of(fields, length=64)

    def _shard(self, key: str) -> Path:
        return self.root / f"{key[:2]}.jsonl"

    @staticmethod
    def _decode(line: str) -> dict:
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CacheCorruption(f"undecodable cache line: {exc.msg}") from exc
        if not isinstance(record, dict) or "key" not in record or "response" not in record:
            raise CacheCorruption("cache record missing key/response fields")
        return record

    def get(self, key: str):
        """Latest cached response for `key`, or None."""
        with self._lock:
            if key in self._mem:
                self.hits += 1
                return self._mem[key]
            shard = self._shard(key)
            if not shard.exists():
                self.misses += 1
                return None
            found = None
            for line in shard.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                try:
                    record = self._decode(line)
                except CacheCorruption as exc:
                    self.corrupt_lines += 1
                    logger.warning("skipping corrupt line in %s: %s", shard, exc)
                    continue
                if record["key"] == key:
                    found = record["response"]
            if found is None:
                self.misses += 1
                return None
            self._mem[key] = found
            self.hits += 1
            return found

    def put(self, key: str, request: dict, response) -> None:
        line = json.dumps(
            {"key": key, "request": request, "response": response},
            sort_keys=True,
            ensure_ascii=False,
        )
        with self._lock:
            shard = self._shard(key)
            # A torn write can leave the shard without a trailing newline;
            # appending straight after it would corrupt this record too.
            needs_break = False
            if shard.exists() and shard.stat().st_size > 0:
                with shard.open("rb") as fh:
                    fh.seek(-1, 2)
                    needs_break = fh.read(1) != b"\n"
            with shard.open("a", encoding="utf-8") as fh:
                if needs_break:
                    fh.write("\n")
                fh.write(line + "\n")
            self._mem[key] = response

    def lookup_or_call(self, key: str, request: dict, fetch):
        """Cached response when present, else fetch, store, and return.

        Returns (response, was_hit). The fetch call happens outside the lock
        so slow endpoints do not serialize unrelated cache traffic.
        """
        cached = self.get(key)
        if cached is not None:
            return cached, True
        response = fetch()
        self.put(key, request, response)
        return response, False
