"""Exception hierarchy shared across the SDK."""

from __future__ import annotations


class SdkError(Exception):
    """Base class for all SDK errors."""


class ParseError(SdkError):
    """Input text is not well-formed (YAML/CSV); carries the position if known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SchemaError(SdkError):
    """A field is missing, mistyped or violates a constraint; `path` is a JSON pointer."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnresolvedReference(SdkError):
    """One or more VNFD references could not be resolved."""

    def __init__(self, missing: list[tuple[str, str]]):
        self.missing = sorted(missing)
        pairs = ", ".join(f"{n} {v}" for n, v in self.missing)
        super().__init__(f"unresolved VNFD references: {pairs}")


class FlavorMismatch(SdkError):
    """A service entry selects a flavor the referenced VNFD does not declare."""

    def __init__(self, vnf_id: str, flavor: str, vnfd_name: str):
        self.vnf_id = vnf_id
        self.flavor = flavor
        super().__init__(f"vnf {vnf_id!r} selects flavor {flavor!r} not declared by VNFD {vnfd_name!r}")


class CatalogueError(SdkError):
    pass


class NotFound(CatalogueError):
    pass


class DuplicateEntry(CatalogueError):
    pass


class RejectedUnvalidated(CatalogueError):
    pass


class CorruptEntry(CatalogueError):
    pass


class TemplateError(SdkError):
    pass


class UnknownTemplate(TemplateError):
    pass


class TargetNotFound(TemplateError):
    pass


class PackageError(SdkError):
    pass


class ValidationGate(PackageError):
    """Refused to package a service that does not pass validation."""

    def __init__(self, report):
        self.report = report
        super().__init__("refusing to package: validation failed")


class SigningError(PackageError):
    pass


class MalformedArchive(PackageError):
    pass


class PathTraversal(PackageError):
    pass


class NoFeasiblePlacement(SdkError):
    pass


class PluginError(SdkError):
    """A control-function plugin misbehaved (timeout, crash, malformed response)."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class RangeError(SdkError):
    """A metric value lies outside its legal range."""


class InsufficientData(SdkError):
    pass


class Infeasible(SdkError):
    """A capacity target cannot be met; carries the maximum achievable rate."""

    def __init__(self, message: str, max_achievable_mbps: float):
        self.max_achievable_mbps = max_achievable_mbps
        super().__init__(message)
