"""Content-addressed on-disk cache for deterministic sweep results.

A record lives at ``<root>/<sha256 of canonical key>.json`` and stores its own
key and the tool version; a lookup succeeds only when both match exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__

CACHE_ENV = "NNI_VALIDITY_CACHE"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


@dataclass(frozen=True)
class CacheRecord:
    key: dict
    payload: Any
    tool_version: str = __version__

    @property
    def digest(self) -> str:
        return key_digest(self.key, self.tool_version)


def key_digest(key: dict, tool_version: str = __version__) -> str:
    blob = canonical_json({"key": key, "tool_version": tool_version})
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class ResultCache:
    root: Path
    tool_version: str = __version__
    hits: int = field(default=0, init=False)
    misses: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    @classmethod
    def from_env(cls, explicit: str | os.PathLike | None = None) -> "ResultCache | None":
        location = explicit or os.environ.get(CACHE_ENV)
        return cls(Path(location)) if location else None

    def path_for(self, key: dict) -> Path:
        return self.root / f"{key_digest(key, self.tool_version)}.json"

    def get(self, key: dict) -> Any | None:
        path = self.path_for(key)
        try:
            with open(path, encoding="utf-8") as fh:
                stored = json.load(fh)
        except (FileNotFoundError, json.JSONDecodeError):
            self.misses += 1
            return None
        # guard against digest collisions and hand-edited files
        if stored.get("key") != json.loads(canonical_json(key)) or stored.get(
            "tool_version"
        ) != self.tool_version:
            self.misses += 1
            return None
        self.hits += 1
        return stored["payload"]

    def put(self, key: dict, payload: Any) -> Path:
        record = {"key": key, "tool_version": self.tool_version, "payload": payload}
        path = self.path_for(key)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".json", dir=self.root)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(canonical_json(record))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path
