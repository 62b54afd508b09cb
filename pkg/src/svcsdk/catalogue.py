"""Local catalogue of previously validated descriptors and templates.

The catalogue is a plain directory tree, one YAML file per entry plus an
index listing digests, so it diffs and versions cleanly:

    <root>/<kind>/<name>/<version>.yaml
    <root>/index.json

Writes serialize through a lock file; reads re-verify the stored digest.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from svcsdk.descriptors import parse_vnf_descriptor, serialize_descriptor
from svcsdk.errors import CorruptEntry, DuplicateEntry, NotFound, RejectedUnvalidated
from svcsdk.model import ServiceDescriptor, VnfDescriptor

KINDS = ("NSD", "VNFD", "TEMPLATE")

_LOCK_TIMEOUT_S = 5.0


@dataclass(frozen=True)
class CatalogueEntry:
    kind: str  # NSD | VNFD | TEMPLATE
    name: str
    version: str
    sha256: str
    validated_at: str  # ISO-8601 UTC

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.kind, self.name, self.version)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _IndexLock:
    """Single-writer lock via exclusive creation of <root>/index.lock."""

    def __init__(self, root: Path):
        self.path = root / "index.lock"

    def __enter__(self):
        deadline = time.monotonic() + _LOCK_TIMEOUT_S
        while True:
            try:
                fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
                os.close(fd)
                return self
            except FileExistsError:
                if time.monotonic() > deadline:
                    raise TimeoutError(f"catalogue lock {self.path} held too long")
                time.sleep(0.02)

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


class Catalogue:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    def _load_index(self) -> list[CatalogueEntry]:
        if not self.index_path.is_file():
            return []
        raw = json.loads(self.index_path.read_text())
        return [CatalogueEntry(**e) for e in raw.get("entries", [])]

    def _save_index(self, entries: list[CatalogueEntry]):
        entries = sorted(entries, key=lambda e: e.key)
        doc = {"entries": [vars(e) for e in entries]}
        self.index_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def _entry_path(self, kind: str, name: str, version: str) -> Path:
        return self.root / kind / name / f"{version}.yaml"

    def entries(self) -> list[CatalogueEntry]:
        return self._load_index()

    def add_text(self, kind: str, name: str, version: str, text: str, report, now=None) -> CatalogueEntry:
        """Store a validated body. Idempotent for identical bytes; a different
        body under an existing (kind, name, version) is rejected."""
        if kind not in KINDS:
            raise ValueError(f"unknown catalogue kind {kind!r}")
        if report is None or not report.passed:
            raise RejectedUnvalidated(f"{kind} {name} {version}: validation report did not pass")
        digest = _digest(text)
        stamp = (now or datetime.now(timezone.utc)).isoformat(timespec="seconds")
        with _IndexLock(self.root):
            entries = self._load_index()
            for e in entries:
                if e.key == (kind, name, version):
                    if e.sha256 == digest:
                        return e
                    raise DuplicateEntry(
                        f"{kind} {name} {version} already stored with digest {e.sha256[:12]}..."
                    )
            path = self._entry_path(kind, name, version)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            entry = CatalogueEntry(kind=kind, name=name, version=version, sha256=digest, validated_at=stamp)
            entries.append(entry)
            self._save_index(entries)
            return entry

    def add_entry(self, descriptor: ServiceDescriptor | VnfDescriptor, report, now=None) -> CatalogueEntry:
        """Store a descriptor model in canonical form, gated on its report."""
        kind = "VNFD" if isinstance(descriptor, VnfDescriptor) else "NSD"
        text = serialize_descriptor(descriptor)
        return self.add_text(kind, descriptor.name, descriptor.version, text, report, now=now)

    def lookup(self, kind: str, name: str, version: str) -> str:
        """Return the stored body, re-verifying its digest on the way out."""
        for e in self._load_index():
            if e.key == (kind, name, version):
                path = self._entry_path(kind, name, version)
                if not path.is_file():
                    raise CorruptEntry(f"{kind} {name} {version}: entry file missing")
                text = path.read_text()
                if _digest(text) != e.sha256:
                    raise CorruptEntry(f"{kind} {name} {version}: digest mismatch on disk")
                return text
        raise NotFound(f"{kind} {name} {version} not in catalogue")

    def vnfd_lookup(self):
        """Resolution callback for `resolve_references`, backed by this store."""

        def lookup(name: str, version: str) -> VnfDescriptor | None:
            try:
                return parse_vnf_descriptor(self.lookup("VNFD", name, version))
            except NotFound:
                return None

        return lookup


def directory_lookup(*dirs: Path | str):
    """Resolution callback over loose ``vnfd-*.yaml`` files in directories.

    Used to resolve an NSD against its sibling VNFD files before anything is
    catalogued. Later directories take precedence over earlier ones only when
    earlier ones miss.
    """
    parsed: dict[tuple[str, str], VnfDescriptor] = {}
    for d in dirs:
        d = Path(d)
        if not d.is_dir():
            continue
        for path in sorted(d.glob("vnfd-*.yaml")):
            vnfd = parse_vnf_descriptor(path.read_text())
            parsed.setdefault((vnfd.name, vnfd.version), vnfd)

    def lookup(name: str, version: str) -> VnfDescriptor | None:
        return parsed.get((name, version))

    return lookup


def chain_lookups(*lookups):
    def lookup(name: str, version: str):
        for lk in lookups:
            found = lk(name, version)
            if found is not None:
                return found
        return None

    return lookup
