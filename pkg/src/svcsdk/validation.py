"""Formal pre-deployment checks: schema, service graph, bandwidth and
control-function artifacts.

All checks report findings as `Issue` records instead of raising, so one run
collects everything wrong with a package. Reports are deterministic: issues
are sorted by (code, location, message).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from svcsdk.descriptors import parse_service_descriptor, parse_vnf_descriptor
from svcsdk.errors import FlavorMismatch, ParseError, SchemaError, UnresolvedReference
from svcsdk.model import (
    TRAFFIC_STEERING,
    ControlFunctionRefs,
    CpRef,
    PluginRef,
    ResolvedService,
)

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

# Issue codes emitted by this module. The packager and placement checker add
# their own codes on top of these.
INVALID_CONNECTION_POINT = "INVALID_CONNECTION_POINT"
UNRESOLVED_REFERENCE = "UNRESOLVED_REFERENCE"
CYCLE = "CYCLE"
STEERED_CYCLE = "STEERED_CYCLE"
REPEATED_PATH = "REPEATED_PATH"
DISCONNECTED_VNF = "DISCONNECTED_VNF"
LINK_BOTTLENECK = "LINK_BOTTLENECK"
VNF_BOTTLENECK = "VNF_BOTTLENECK"
PLUGIN_ENTRYPOINT_MISSING = "PLUGIN_ENTRYPOINT_MISSING"
PLUGIN_PROTOCOL_MISMATCH = "PLUGIN_PROTOCOL_MISMATCH"
PLUGIN_BOUNDS_MISSING = "PLUGIN_BOUNDS_MISSING"
SCHEMA = "SCHEMA"

#: Upper bound on reported cycles per service; pathological graphs have
#: exponentially many elementary cycles and must not hang the CLI.
CYCLE_REPORT_CAP = 1000

#: Required version declared by plugin manifests.
PLUGIN_MANIFEST_PROTOCOL = "1"


@dataclass(frozen=True)
class Issue:
    code: str
    severity: str  # error | warning
    location: str
    message: str

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "location": self.location,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @classmethod
    def of(cls, issues) -> ValidationReport:
        ordered = sorted(issues, key=lambda i: (i.code, i.location, i.message))
        return cls(issues=tuple(ordered))

    @property
    def passed(self) -> bool:
        return not any(i.severity == SEVERITY_ERROR for i in self.issues)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == SEVERITY_ERROR]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == SEVERITY_WARNING]

    def codes(self) -> set[str]:
        return {i.code for i in self.issues}

    def merged(self, *others: ValidationReport) -> ValidationReport:
        issues = list(self.issues)
        for other in others:
            issues.extend(other.issues)
        return ValidationReport.of(issues)

    def to_json(self) -> str:
        return json.dumps([i.to_dict() for i in self.issues], indent=2)


def _error(code: str, location: str, message: str) -> Issue:
    return Issue(code, SEVERITY_ERROR, location, message)


def _warning(code: str, location: str, message: str) -> Issue:
    return Issue(code, SEVERITY_WARNING, location, message)


def validate_schema(text: str, kind: str) -> ValidationReport:
    """Schema-check a descriptor document of the given kind ("NSD" or "VNFD").

    Never raises: parse and schema failures become SCHEMA issues. A passing
    report implies the document parses.
    """
    parser = parse_service_descriptor if kind == "NSD" else parse_vnf_descriptor
    try:
        parser(text)
    except ParseError as exc:
        return ValidationReport.of([_error(SCHEMA, "/", str(exc))])
    except SchemaError as exc:
        return ValidationReport.of([_error(SCHEMA, exc.path, str(exc.args[0]).split(": ", 1)[-1])])
    return ValidationReport.of([])


def _declared(r: ResolvedService, ref: CpRef) -> bool:
    if ref.is_service:
        return r.service.service_cp(ref.cp) is not None
    vnf = r.service.vnf(ref.scope)
    if vnf is None:
        return False
    return r.vnfds[(vnf.vnfd_name, vnf.vnfd_version)].cp(ref.cp) is not None


def elementary_cycles(nodes, edges, cap: int = CYCLE_REPORT_CAP) -> list[tuple[str, ...]]:
    """Enumerate elementary cycles of a digraph, each rotated to start at its
    smallest node, in sorted order. Stops after `cap` cycles."""
    order = sorted(set(nodes))
    adj: dict[str, list[str]] = {n: [] for n in order}
    for u, v in edges:
        if u in adj and v in adj:
            adj[u].append(v)
    for n in order:
        adj[n] = sorted(set(adj[n]))

    cycles: list[tuple[str, ...]] = []

    def search(start: str, node: str, path: list[str], on_path: set[str]):
        if len(cycles) >= cap:
            return
        for nxt in adj[node]:
            if nxt == start:
                cycles.append(tuple(path))
                if len(cycles) >= cap:
                    return
            elif nxt > start and nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                search(start, nxt, path, on_path)
                on_path.remove(nxt)
                path.pop()

    for start in order:
        search(start, start, [start], {start})
        if len(cycles) >= cap:
            break
    return sorted(cycles)


def analyze_graph(r: ResolvedService) -> ValidationReport:
    """Service-graph analysis: connection-point validity, forwarding cycles,
    repeated edges within one path and VNFs outside every path.

    Cycle detection runs on the VNF-only subgraph: a walk closed only through
    a service endpoint leaves the service and is not a forwarding loop.
    """
    issues: list[Issue] = []
    service = r.service

    for i, link in enumerate(service.virtual_links):
        for j, ref in enumerate(link.endpoints):
            if not _declared(r, ref):
                issues.append(
                    _error(
                        INVALID_CONNECTION_POINT,
                        f"/virtual_links/{i}/endpoints/{j}",
                        f"{ref} names an undeclared connection point",
                    )
                )

    for i, fg in enumerate(service.forwarding_graphs):
        for j, ref in enumerate(fg.path):
            if not _declared(r, ref):
                issues.append(
                    _error(
                        INVALID_CONNECTION_POINT,
                        f"/forwarding_graphs/{i}/path/{j}",
                        f"{ref} names an undeclared connection point",
                    )
                )
        for j, (a, b) in enumerate(zip(fg.path, fg.path[1:])):
            if a.node != b.node and service.link_between(a, b) is None:
                issues.append(
                    _error(
                        INVALID_CONNECTION_POINT,
                        f"/forwarding_graphs/{i}/path/{j}",
                        f"no virtual link joins {a} and {b}",
                    )
                )

    vnf_ids = set(r.vnf_nodes())
    vnf_edges = [(u, v) for u, v in r.adjacency if u in vnf_ids and v in vnf_ids]
    for cycle in elementary_cycles(vnf_ids, vnf_edges):
        loop = "->".join((*cycle, cycle[0]))
        steering = [
            n for n in cycle if TRAFFIC_STEERING in r.vnfd_for(n).capabilities
        ]
        if steering:
            issues.append(
                _warning(
                    STEERED_CYCLE,
                    loop,
                    f"forwarding loop through {', '.join(cycle)}; "
                    f"{', '.join(steering)} can steer traffic out of it",
                )
            )
        else:
            issues.append(
                _error(CYCLE, loop, f"forwarding loop through {', '.join(cycle)}")
            )

    for i, fg in enumerate(service.forwarding_graphs):
        seen_edges: set[tuple[str, str]] = set()
        reported: set[tuple[str, str]] = set()
        for a, b in fg.hops():
            edge = (a.node, b.node)
            if edge in seen_edges and edge not in reported:
                reported.add(edge)
                issues.append(
                    _warning(
                        REPEATED_PATH,
                        f"/forwarding_graphs/{i}",
                        f"path {fg.id!r} traverses edge {edge[0]}->{edge[1]} more than once",
                    )
                )
            seen_edges.add(edge)

    used = {node for fg in service.forwarding_graphs for node in fg.nodes()}
    for i, vnf in enumerate(service.vnfs):
        if vnf.vnf_id not in used:
            issues.append(
                _warning(
                    DISCONNECTED_VNF,
                    f"/vnfs/{i}",
                    f"vnf {vnf.vnf_id!r} appears in no forwarding path",
                )
            )

    return ValidationReport.of(issues)


def _first_link(r: ResolvedService, fg):
    for a, b in fg.hops():
        link = r.service.link_between(a, b)
        if link is not None:
            return link
    return None


def _path_demands(r: ResolvedService) -> dict[str, float]:
    """Provisioned rate per forwarding path, keyed by fg id.

    Paths entering at the same service endpoint split that endpoint's total
    ingress provision (the distinct first links' bandwidth sum) equally, the
    way the emulator's dispatcher does; otherwise clone paths fanning out
    behind a shared ingress link would each be charged the full rate. A path
    without an external source is charged its first link's bandwidth.
    """
    by_source: dict[str, list] = {}
    demands: dict[str, float] = {}
    for fg in r.service.forwarding_graphs:
        nodes = fg.nodes()
        if nodes and nodes[0].startswith("ns:"):
            by_source.setdefault(nodes[0], []).append(fg)
        else:
            link = _first_link(r, fg)
            demands[fg.id] = link.bandwidth_mbps if link else 0.0
    for _source, fgs in by_source.items():
        first_links = {}
        for fg in fgs:
            link = _first_link(r, fg)
            if link is not None:
                first_links[link.id] = link.bandwidth_mbps
        share = sum(first_links.values()) / len(fgs) if fgs else 0.0
        for fg in fgs:
            demands[fg.id] = share
    return demands


def analyze_bandwidth(r: ResolvedService) -> ValidationReport:
    """Congestion pre-checks from declared link bandwidths and VNF caps.

    A VNF bottleneck compares the bandwidth sum over links attached to its
    ingress-carrying connection points against the declared throughput cap of
    its selected flavor. A link bottleneck compares, for links shared by more
    than one forwarding path, the sum of the sharing paths' ingress-link
    bandwidths against the link's own. Both use strict inequality: sizing a
    link or VNF exactly to its demand is a choice, not a defect. VNFs without
    a declared cap are skipped.
    """
    issues: list[Issue] = []
    service = r.service

    for i, vnf in enumerate(service.vnfs):
        vnfd = r.vnfds[(vnf.vnfd_name, vnf.vnfd_version)]
        flavor = r.flavor_for(vnf.vnf_id)
        cap = vnfd.performance_cap(flavor.name)
        if cap is None:
            continue
        demand = 0.0
        for cp in vnfd.connection_points:
            if not cp.carries_ingress:
                continue
            for link in service.links_at(CpRef(vnf.vnf_id, cp.id)):
                demand += link.bandwidth_mbps
        if demand > cap:
            issues.append(
                _warning(
                    VNF_BOTTLENECK,
                    f"/vnfs/{i}",
                    f"ingress demand {demand:g} Mbit/s exceeds capacity {cap:g} Mbit/s "
                    f"of {vnf.vnf_id!r} ({flavor.name})",
                )
            )

    demands = _path_demands(r)
    link_users: dict[str, list] = {}
    for fg in service.forwarding_graphs:
        seen: set[str] = set()
        for a, b in fg.hops():
            link = service.link_between(a, b)
            if link is not None and link.id not in seen:
                seen.add(link.id)
                link_users.setdefault(link.id, []).append(fg)
    for i, link in enumerate(service.virtual_links):
        users = link_users.get(link.id, [])
        if len(users) <= 1:
            continue
        demand = sum(demands.get(fg.id, 0.0) for fg in users)
        if demand > link.bandwidth_mbps:
            issues.append(
                _warning(
                    LINK_BOTTLENECK,
                    f"/virtual_links/{i}",
                    f"link {link.id!r} carries {len(users)} paths demanding {demand:g} Mbit/s "
                    f"over {link.bandwidth_mbps:g} Mbit/s",
                )
            )

    return ValidationReport.of(issues)


def load_plugin_manifest(plugin_dir: Path) -> dict | None:
    manifest = plugin_dir / "plugin.yaml"
    if not manifest.is_file():
        return None
    try:
        doc = yaml.safe_load(manifest.read_text())
    except yaml.YAMLError:
        return None
    return doc if isinstance(doc, dict) else None


def check_control_functions(pkg_root: Path | str, refs: ControlFunctionRefs) -> ValidationReport:
    """Static checks of control-function artifacts under `pkg_root`.

    Per artifact reference: the entry point named by the plugin manifest must
    exist and be executable; the manifest must speak protocol version "1" and
    declare the run-time bounds (max_instances, max_total_cpu_cores) that the
    emulator enforces. No code inspection happens here.
    """
    root = Path(pkg_root)
    issues: list[Issue] = []
    for ref in refs.plugin_refs():
        plugin_dir = root / ref.path
        location = f"{ref.path}/plugin.yaml"
        manifest = load_plugin_manifest(plugin_dir)
        if manifest is None:
            issues.append(
                _error(PLUGIN_ENTRYPOINT_MISSING, location, "plugin manifest missing or unreadable")
            )
            continue
        entry_name = manifest.get("entry", ref.entry)
        entry = plugin_dir / str(entry_name)
        if not entry.is_file():
            issues.append(
                _error(PLUGIN_ENTRYPOINT_MISSING, location, f"entry point {entry_name!r} not found")
            )
        elif not os.access(entry, os.X_OK):
            issues.append(
                _error(PLUGIN_ENTRYPOINT_MISSING, location, f"entry point {entry_name!r} not executable")
            )
        if str(manifest.get("protocol_version")) != PLUGIN_MANIFEST_PROTOCOL:
            issues.append(
                _error(
                    PLUGIN_PROTOCOL_MISMATCH,
                    location,
                    f"manifest declares protocol_version {manifest.get('protocol_version')!r}, "
                    f"this SDK supports {PLUGIN_MANIFEST_PROTOCOL!r}",
                )
            )
        for bound in ("max_instances", "max_total_cpu_cores"):
            if not isinstance(manifest.get(bound), int):
                issues.append(
                    _error(PLUGIN_BOUNDS_MISSING, location, f"manifest must declare integer {bound}")
                )
    return ValidationReport.of(issues)


def validate_all(r: ResolvedService, pkg_root: Path | str | None = None) -> ValidationReport:
    """Run every analysis over a resolved service; schema validity is implied
    by r having been parsed. Control functions are checked when a package root
    is supplied."""
    report = analyze_graph(r).merged(analyze_bandwidth(r))
    if pkg_root is not None:
        report = report.merged(check_control_functions(pkg_root, r.service.control_functions))
    return report


def validate_source(nsd_text: str, lookup, pkg_root: Path | str | None = None) -> ValidationReport:
    """Full validation pipeline over descriptor text: schema, resolution and
    all analyses. Resolution failures surface as UNRESOLVED_REFERENCE issues."""
    report = validate_schema(nsd_text, "NSD")
    if not report.passed:
        return report
    from svcsdk.model import resolve_references

    service = parse_service_descriptor(nsd_text)
    try:
        resolved = resolve_references(service, lookup)
    except UnresolvedReference as exc:
        return ValidationReport.of(
            [
                _error(UNRESOLVED_REFERENCE, "/vnfs", f"no VNFD {name!r} version {version!r}")
                for name, version in exc.missing
            ]
        )
    except FlavorMismatch as exc:
        return ValidationReport.of([_error(UNRESOLVED_REFERENCE, "/vnfs", str(exc))])
    return validate_all(resolved, pkg_root)
