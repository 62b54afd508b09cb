"""Signed service packages (.svcpkg).

A package is a gzip-compressed tar with deterministic bytes: entries sorted
lexicographically, fixed metadata, pinned timestamps and a canonical gzip
wrapper. It contains `manifest.json` at the root, the descriptors and plugin
artifacts, and a detached Ed25519 signature over the canonical manifest bytes
as the last entry (`signature.bin`, 64 raw bytes).

Verification is strict about the whole byte stream: after decompressing, the
archive is recompressed canonically and compared, so a flip of any single
byte fails even in regions a decompressor would ignore (gzip header fields).
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import os
import tarfile
import tempfile
import zlib
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from svcsdk.catalogue import chain_lookups
from svcsdk.descriptors import parse_service_descriptor, parse_vnf_descriptor, serialize_descriptor
from svcsdk.errors import (
    MalformedArchive,
    ParseError,
    PathTraversal,
    SchemaError,
    SigningError,
    ValidationGate,
)
from svcsdk.model import ResolvedService, resolve_references
from svcsdk.validation import (
    SEVERITY_ERROR,
    Issue,
    UNRESOLVED_REFERENCE,
    ValidationReport,
    validate_all,
)

PACKAGE_SUFFIX = ".svcpkg"
MANIFEST_NAME = "manifest.json"
SIGNATURE_NAME = "signature.bin"

BAD_SIGNATURE = "BAD_SIGNATURE"
UNKNOWN_SIGNER = "UNKNOWN_SIGNER"
DIGEST_MISMATCH = "DIGEST_MISMATCH"
MALFORMED_ARCHIVE = "MALFORMED_ARCHIVE"


@dataclass(frozen=True)
class ManifestFile:
    path: str
    sha256: str
    size: int


@dataclass(frozen=True)
class PackageManifest:
    package_name: str
    package_version: str
    created_at: str  # ISO-8601 UTC
    files: tuple[ManifestFile, ...]
    signer_key_id: str

    def to_bytes(self) -> bytes:
        doc = {
            "package_name": self.package_name,
            "package_version": self.package_version,
            "created_at": self.created_at,
            "files": [vars(f) for f in self.files],
            "signer_key_id": self.signer_key_id,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes) -> PackageManifest:
        try:
            doc = json.loads(data.decode("utf-8"))
            files = tuple(ManifestFile(**f) for f in doc["files"])
            return cls(
                package_name=doc["package_name"],
                package_version=doc["package_version"],
                created_at=doc["created_at"],
                files=files,
                signer_key_id=doc["signer_key_id"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedArchive(f"manifest unreadable: {exc}") from exc


def key_id(public_key: Ed25519PublicKey) -> str:
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    raw = public_key.public_bytes(Encoding.Raw, PublicFormat.Raw)
    return hashlib.sha256(raw).hexdigest()


def generate_keypair(stem: Path | str) -> tuple[Path, Path]:
    """Write `<stem>.key` (32 raw private bytes) and `<stem>.pub`."""
    from cryptography.hazmat.primitives.serialization import (
        Encoding,
        NoEncryption,
        PrivateFormat,
        PublicFormat,
    )

    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    private = Ed25519PrivateKey.generate()
    key_path = stem.with_suffix(".key")
    pub_path = stem.with_suffix(".pub")
    key_path.write_bytes(private.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption()))
    key_path.chmod(0o600)
    pub_path.write_bytes(private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw))
    return key_path, pub_path


def load_signing_key(path: Path | str) -> Ed25519PrivateKey:
    raw = Path(path).read_bytes()
    if len(raw) != 32:
        raise SigningError(f"{path}: expected 32 raw private key bytes, got {len(raw)}")
    return Ed25519PrivateKey.from_private_bytes(raw)


def load_public_key(path: Path | str) -> Ed25519PublicKey:
    raw = Path(path).read_bytes()
    if len(raw) != 32:
        raise SigningError(f"{path}: expected 32 raw public key bytes, got {len(raw)}")
    return Ed25519PublicKey.from_public_bytes(raw)


def load_trust_dir(path: Path | str) -> list[Ed25519PublicKey]:
    return [load_public_key(p) for p in sorted(Path(path).glob("*.pub"))]


def _gzip_canonical(data: bytes) -> bytes:
    buf = io.BytesIO()
    with gzip.GzipFile(fileobj=buf, mode="wb", compresslevel=9, mtime=0) as gz:
        gz.write(data)
    return buf.getvalue()


def _tar_bytes(files: dict[str, bytes], executables: set[str], mtime: int) -> bytes:
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w", format=tarfile.USTAR_FORMAT) as tar:
        names = sorted(n for n in files if n != SIGNATURE_NAME)
        if SIGNATURE_NAME in files:
            names.append(SIGNATURE_NAME)
        for name in names:
            info = tarfile.TarInfo(name=name)
            info.size = len(files[name])
            info.mode = 0o755 if name in executables else 0o644
            info.mtime = mtime
            info.uid = info.gid = 0
            info.uname = info.gname = ""
            tar.addfile(info, io.BytesIO(files[name]))
    return buf.getvalue()


def _collect_plugins(plugin_root: Path | str | None) -> tuple[dict[str, bytes], set[str]]:
    files: dict[str, bytes] = {}
    executables: set[str] = set()
    if plugin_root is None:
        return files, executables
    plugins = Path(plugin_root) / "plugins"
    if not plugins.is_dir():
        return files, executables
    for path in sorted(plugins.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(Path(plugin_root)).as_posix()
        files[rel] = path.read_bytes()
        if os.access(path, os.X_OK):
            executables.add(rel)
    return files, executables


def build_package(
    r: ResolvedService,
    plugin_root: Path | str | None,
    signing_key: Ed25519PrivateKey,
    *,
    created_at: datetime | None = None,
    out_path: Path | str | None = None,
) -> bytes:
    """Compile a validated service into one signed archive.

    Refuses unvalidated input: the full validation suite must pass first.
    Identical inputs plus a pinned `created_at` produce identical bytes.
    """
    report = validate_all(r, plugin_root)
    if not report.passed:
        raise ValidationGate(report)

    files: dict[str, bytes] = {}
    executables: set[str] = set()
    files["descriptors/nsd.yaml"] = serialize_descriptor(r.service).encode("utf-8")
    for (name, _version), vnfd in sorted(r.vnfds.items()):
        files[f"descriptors/vnfd-{name}.yaml"] = serialize_descriptor(vnfd).encode("utf-8")
    plugin_files, plugin_exec = _collect_plugins(plugin_root)
    files.update(plugin_files)
    executables.update(plugin_exec)

    stamp = (created_at or datetime.now(timezone.utc)).astimezone(timezone.utc)
    manifest = PackageManifest(
        package_name=r.service.name,
        package_version=r.service.version,
        created_at=stamp.isoformat(timespec="seconds"),
        files=tuple(
            ManifestFile(path=p, sha256=hashlib.sha256(b).hexdigest(), size=len(b))
            for p, b in sorted(files.items())
        ),
        signer_key_id=key_id(signing_key.public_key()),
    )
    manifest_bytes = manifest.to_bytes()
    try:
        signature = signing_key.sign(manifest_bytes)
    except Exception as exc:  # pragma: no cover - cryptography raises rarely here
        raise SigningError(str(exc)) from exc

    archive_files = dict(files)
    archive_files[MANIFEST_NAME] = manifest_bytes
    archive_files[SIGNATURE_NAME] = signature
    tar = _tar_bytes(archive_files, executables, mtime=int(stamp.timestamp()))
    data = _gzip_canonical(tar)
    if out_path is not None:
        Path(out_path).write_bytes(data)
    return data


def _read_archive(data: bytes) -> tuple[dict[str, bytes], dict[str, int]]:
    """Decompress and check canonical form; returns member bytes and modes."""
    try:
        tar_bytes = gzip.decompress(data)
    except (OSError, EOFError, zlib.error) as exc:
        raise MalformedArchive(f"gzip stream unreadable: {exc}") from exc
    if _gzip_canonical(tar_bytes) != data:
        raise MalformedArchive("archive is not in canonical form (bytes altered)")
    members: dict[str, bytes] = {}
    modes: dict[str, int] = {}
    try:
        with tarfile.open(fileobj=io.BytesIO(tar_bytes), mode="r") as tar:
            for info in tar:
                name = info.name
                if name.startswith("/") or ".." in Path(name).parts:
                    raise PathTraversal(f"archive entry {name!r} escapes the extraction root")
                if not info.isreg():
                    raise MalformedArchive(f"archive entry {name!r} is not a regular file")
                fh = tar.extractfile(info)
                members[name] = fh.read() if fh else b""
                modes[name] = info.mode
    except tarfile.TarError as exc:
        raise MalformedArchive(f"tar unreadable: {exc}") from exc
    return members, modes


def unpack(data: bytes, dest: Path | str) -> PackageManifest:
    """Extract a package under `dest`, refusing entries that escape it."""
    members, modes = _read_archive(data)
    if MANIFEST_NAME not in members:
        raise MalformedArchive("manifest.json missing from archive")
    manifest = PackageManifest.from_bytes(members[MANIFEST_NAME])
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for name, blob in members.items():
        target = dest / name
        if not target.resolve().is_relative_to(dest.resolve()):
            raise PathTraversal(f"archive entry {name!r} escapes {dest}")
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(blob)
        target.chmod(modes.get(name, 0o644) & 0o777)
    return manifest


def _resolve_from_dir(root: Path) -> ResolvedService:
    nsd = parse_service_descriptor((root / "descriptors" / "nsd.yaml").read_text())
    vnfds = {}
    for path in sorted((root / "descriptors").glob("vnfd-*.yaml")):
        vnfd = parse_vnf_descriptor(path.read_text())
        vnfds[(vnfd.name, vnfd.version)] = vnfd
    return resolve_references(nsd, chain_lookups(lambda n, v: vnfds.get((n, v))))


def verify_package(data: bytes, trusted_keys: list[Ed25519PublicKey]) -> ValidationReport:
    """Full ingest check: archive integrity, per-file digests, manifest
    signature against the trusted key set, then the formal validation suite
    over the unpacked contents. All failures are error-severity issues."""
    issues: list[Issue] = []
    try:
        members, _modes = _read_archive(data)
    except (MalformedArchive, PathTraversal) as exc:
        return ValidationReport.of([Issue(MALFORMED_ARCHIVE, SEVERITY_ERROR, "/", str(exc))])

    if MANIFEST_NAME not in members:
        return ValidationReport.of(
            [Issue(MALFORMED_ARCHIVE, SEVERITY_ERROR, MANIFEST_NAME, "manifest.json missing")]
        )
    try:
        manifest = PackageManifest.from_bytes(members[MANIFEST_NAME])
    except MalformedArchive as exc:
        return ValidationReport.of([Issue(MALFORMED_ARCHIVE, SEVERITY_ERROR, MANIFEST_NAME, str(exc))])

    listed = {f.path: f for f in manifest.files}
    present = set(members) - {MANIFEST_NAME, SIGNATURE_NAME}
    for path in sorted(present - set(listed)):
        issues.append(Issue(DIGEST_MISMATCH, SEVERITY_ERROR, path, "file present but not listed in manifest"))
    for path in sorted(set(listed) - present):
        issues.append(Issue(DIGEST_MISMATCH, SEVERITY_ERROR, path, "file listed in manifest but missing"))
    for path in sorted(present & set(listed)):
        digest = hashlib.sha256(members[path]).hexdigest()
        if digest != listed[path].sha256:
            issues.append(Issue(DIGEST_MISMATCH, SEVERITY_ERROR, path, "content digest differs from manifest"))

    by_id = {key_id(k): k for k in trusted_keys}
    signer = by_id.get(manifest.signer_key_id)
    if signer is None:
        issues.append(
            Issue(UNKNOWN_SIGNER, SEVERITY_ERROR, MANIFEST_NAME, f"signer {manifest.signer_key_id[:16]}... is not trusted")
        )
    elif SIGNATURE_NAME not in members:
        issues.append(Issue(BAD_SIGNATURE, SEVERITY_ERROR, SIGNATURE_NAME, "signature missing"))
    else:
        try:
            signer.verify(members[SIGNATURE_NAME], members[MANIFEST_NAME])
        except InvalidSignature:
            issues.append(Issue(BAD_SIGNATURE, SEVERITY_ERROR, SIGNATURE_NAME, "signature does not match manifest"))

    report = ValidationReport.of(issues)
    if not report.passed:
        return report

    with tempfile.TemporaryDirectory(prefix="svcpkg-verify-") as tmp:
        root = Path(tmp)
        unpack(data, root)
        try:
            resolved = _resolve_from_dir(root)
        except (ParseError, SchemaError) as exc:
            return report.merged(
                ValidationReport.of([Issue("SCHEMA", SEVERITY_ERROR, "descriptors/", str(exc))])
            )
        except Exception as exc:
            return report.merged(
                ValidationReport.of([Issue(UNRESOLVED_REFERENCE, SEVERITY_ERROR, "descriptors/", str(exc))])
            )
        return report.merged(validate_all(resolved, pkg_root=root))
