"""Versioned binary caches for precomputed tables.

Every cache file starts with a fixed magic string, a format version and a
JSON header describing what the file holds (a `kind` tag plus a metadata
dict acting as the parameter fingerprint).  A mismatch in any of these is a
hard `CacheHeaderError`: stale or corrupt caches are refused, never silently
recomputed into the same file.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile

import numpy as np

MAGIC = b"DNLSCACH"
FORMAT_VERSION = 1

__all__ = ["CacheHeaderError", "write_blob", "read_blob", "fingerprint"]


class CacheHeaderError(RuntimeError):
    """Raised when a cache file's magic, version or parameters do not match."""


def write_blob(path, kind: str, meta: dict, arrays: dict) -> None:
    """Atomically write named arrays with a versioned header."""
    header = json.dumps(
        {"kind": kind, "meta": meta, "arrays": list(arrays)}, sort_keys=True
    ).encode()
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<II", FORMAT_VERSION, len(header)))
            f.write(header)
            for name in arrays:
                np.save(f, np.asarray(arrays[name]), allow_pickle=False)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_blob(path, kind: str, expected_meta: dict | None = None):
    """Read a cache written by `write_blob`; returns (meta, arrays).

    Raises CacheHeaderError if the magic, version, kind, or any entry of
    `expected_meta` does not match the stored header.
    """
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise CacheHeaderError(f"{path}: bad magic {magic!r}, not a cache file")
        raw = f.read(8)
        if len(raw) < 8:
            raise CacheHeaderError(f"{path}: truncated header")
        version, header_len = struct.unpack("<II", raw)
        if version != FORMAT_VERSION:
            raise CacheHeaderError(
                f"{path}: format version {version}, expected {FORMAT_VERSION}"
            )
        try:
            header = json.loads(f.read(header_len).decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CacheHeaderError(f"{path}: unreadable header ({exc})") from exc
        if header.get("kind") != kind:
            raise CacheHeaderError(
                f"{path}: cache kind {header.get('kind')!r}, expected {kind!r}"
            )
        meta = header.get("meta", {})
        if expected_meta is not None:
            for key, value in expected_meta.items():
                if meta.get(key) != value:
                    raise CacheHeaderError(
                        f"{path}: parameter mismatch for {key!r}: "
                        f"cached {meta.get(key)!r}, expected {value!r}"
                    )
        arrays = {}
        for name in header.get("arrays", []):
            arrays[name] = np.load(f, allow_pickle=False)
    return meta, arrays


def fingerprint(path) -> str:
    """Short content hash of a cache file, for report provenance."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()[:16]
