"""In-memory model of network services: VNFs, links, forwarding graphs.

Descriptors are parsed from YAML (see `svcsdk.descriptors`), cross-referenced
into a `ResolvedService` and analysed, packaged or deployed from there. Model
objects are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from svcsdk.errors import FlavorMismatch, UnresolvedReference

NS_SCOPE = "ns"

DIRECTIONS = ("ingress", "egress", "bidirectional")
METRICS = ("throughput_mbps", "packet_loss_ratio", "cpu_utilization")
COMPARATORS = (">", "<")

#: Capability tag with defined semantics: the VNF can steer traffic out of a
#: forwarding loop, which downgrades cycle findings to warnings.
TRAFFIC_STEERING = "traffic-steering"

#: Capability tag prefix used as a placement hint, e.g. ``zone:core``.
ZONE_HINT_PREFIX = "zone:"

#: Protocol version spoken by this SDK on the plugin wire.
PLUGIN_PROTOCOL_VERSION = "1"


@dataclass(frozen=True, order=True)
class CpRef:
    """A connection-point reference: ``ns:<cp>`` (service-level) or ``<vnf_id>:<cp>``."""

    scope: str  # NS_SCOPE or a vnf_id
    cp: str

    @classmethod
    def parse(cls, text: str) -> CpRef:
        scope, sep, cp = text.partition(":")
        if not sep or not scope or not cp:
            raise ValueError(f"connection point reference {text!r} is not '<scope>:<cp_id>'")
        return cls(scope, cp)

    @property
    def is_service(self) -> bool:
        return self.scope == NS_SCOPE

    @property
    def node(self) -> str:
        """Graph node this reference belongs to: the vnf_id, or ``ns:<cp>`` for endpoints."""
        return f"{NS_SCOPE}:{self.cp}" if self.is_service else self.scope

    def __str__(self) -> str:
        return f"{self.scope}:{self.cp}"


@dataclass(frozen=True)
class ConnectionPointDecl:
    id: str
    direction: str = "bidirectional"  # ingress | egress | bidirectional

    @property
    def carries_ingress(self) -> bool:
        return self.direction in ("ingress", "bidirectional")

    @property
    def carries_egress(self) -> bool:
        return self.direction in ("egress", "bidirectional")


@dataclass(frozen=True)
class ResourceFlavor:
    name: str
    cpu_cores: int
    memory_mb: int
    storage_gb: int


@dataclass(frozen=True)
class VnfImage:
    uri: str
    sha256: str


@dataclass(frozen=True)
class PerformanceCap:
    """Declared saturation throughput of one resource flavor."""

    flavor: str
    max_throughput_mbps: float


@dataclass(frozen=True)
class VnfDescriptor:
    name: str
    vendor: str
    version: str
    image: VnfImage
    connection_points: tuple[ConnectionPointDecl, ...]
    resource_flavors: tuple[ResourceFlavor, ...]
    capabilities: frozenset[str] = frozenset()
    performance: tuple[PerformanceCap, ...] = ()

    def flavor(self, name: str) -> ResourceFlavor | None:
        for f in self.resource_flavors:
            if f.name == name:
                return f
        return None

    @property
    def default_flavor(self) -> ResourceFlavor:
        return self.resource_flavors[0]

    def cp(self, cp_id: str) -> ConnectionPointDecl | None:
        for c in self.connection_points:
            if c.id == cp_id:
                return c
        return None

    def performance_cap(self, flavor_name: str) -> float | None:
        for p in self.performance:
            if p.flavor == flavor_name:
                return p.max_throughput_mbps
        return None

    @property
    def zone_hint(self) -> str | None:
        for tag in sorted(self.capabilities):
            if tag.startswith(ZONE_HINT_PREFIX):
                return tag[len(ZONE_HINT_PREFIX):]
        return None


@dataclass(frozen=True)
class VnfRef:
    """One VNF entry of a service: a local id bound to a VNFD and a flavor choice."""

    vnf_id: str
    vnfd_name: str
    vnfd_version: str
    flavor: str | None = None  # None selects the VNFD's first declared flavor


@dataclass(frozen=True)
class VirtualLink:
    id: str
    endpoints: tuple[CpRef, CpRef]
    bandwidth_mbps: float
    max_latency_ms: float | None = None

    def joins(self, a: CpRef, b: CpRef) -> bool:
        return {self.endpoints[0], self.endpoints[1]} == {a, b}

    def other_end(self, ref: CpRef) -> CpRef:
        return self.endpoints[1] if self.endpoints[0] == ref else self.endpoints[0]


@dataclass(frozen=True)
class ForwardingGraph:
    """An ordered walk over connection points; consecutive steps either cross a
    virtual link or traverse the interior of a single VNF."""

    id: str
    path: tuple[CpRef, ...]

    def hops(self) -> list[tuple[CpRef, CpRef]]:
        """Inter-node steps of the path (VNF-internal steps skipped)."""
        return [(a, b) for a, b in zip(self.path, self.path[1:]) if a.node != b.node]

    def nodes(self) -> list[str]:
        """Node sequence visited by the path, with internal steps collapsed."""
        out: list[str] = []
        for ref in self.path:
            if not out or out[-1] != ref.node:
                out.append(ref.node)
        return out


@dataclass(frozen=True)
class BuiltinPolicy:
    """A named control policy provided by the SDK, with its parameter block."""

    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PluginRef:
    """An external control-function artifact shipped inside the package."""

    path: str  # directory inside the package, e.g. plugins/scaler
    entry: str  # entry-point file inside that directory
    protocol_version: str = PLUGIN_PROTOCOL_VERSION


ControlFunction = BuiltinPolicy | PluginRef


@dataclass(frozen=True)
class ControlFunctionRefs:
    nfvo: ControlFunction = field(default_factory=lambda: BuiltinPolicy("first-fit"))
    vnfm: dict[str, ControlFunction] = field(default_factory=dict)

    def vnfm_for(self, vnf_id: str) -> ControlFunction:
        return self.vnfm.get(vnf_id, BuiltinPolicy("none"))

    def plugin_refs(self) -> list[PluginRef]:
        refs = [cf for cf in [self.nfvo, *self.vnfm.values()] if isinstance(cf, PluginRef)]
        return sorted(refs, key=lambda r: (r.path, r.entry))


@dataclass(frozen=True)
class AlarmSpec:
    comparator: str  # > | <
    threshold: float
    duration_s: int

    def violated(self, value: float) -> bool:
        return value > self.threshold if self.comparator == ">" else value < self.threshold


@dataclass(frozen=True)
class MonitoringSpec:
    metric: str  # throughput_mbps | packet_loss_ratio | cpu_utilization
    vnf_id: str
    alarm: AlarmSpec | None = None


@dataclass(frozen=True)
class ServiceDescriptor:
    name: str
    vendor: str
    version: str
    vnfs: tuple[VnfRef, ...]
    service_connection_points: tuple[ConnectionPointDecl, ...] = ()
    virtual_links: tuple[VirtualLink, ...] = ()
    forwarding_graphs: tuple[ForwardingGraph, ...] = ()
    control_functions: ControlFunctionRefs = field(default_factory=ControlFunctionRefs)
    monitoring: tuple[MonitoringSpec, ...] = ()

    def vnf(self, vnf_id: str) -> VnfRef | None:
        for v in self.vnfs:
            if v.vnf_id == vnf_id:
                return v
        return None

    def service_cp(self, cp_id: str) -> ConnectionPointDecl | None:
        for c in self.service_connection_points:
            if c.id == cp_id:
                return c
        return None

    def link_between(self, a: CpRef, b: CpRef) -> VirtualLink | None:
        for link in self.virtual_links:
            if link.joins(a, b):
                return link
        return None

    def links_at(self, ref: CpRef) -> list[VirtualLink]:
        return [l for l in self.virtual_links if ref in l.endpoints]


def derived_adjacency(service: ServiceDescriptor) -> tuple[tuple[str, str], ...]:
    """Directed node adjacency induced by forwarding-graph hops.

    An edge u -> v is added whenever some path step leaves a connection point
    of u and enters one of v. Service endpoints appear as ``ns:<cp>`` nodes.
    """
    edges: set[tuple[str, str]] = set()
    for fg in service.forwarding_graphs:
        for a, b in fg.hops():
            edges.add((a.node, b.node))
    return tuple(sorted(edges))


@dataclass(frozen=True)
class ResolvedService:
    """A service descriptor with every VNFD reference resolved and the node
    adjacency graph derived from its forwarding paths."""

    service: ServiceDescriptor
    vnfds: dict[tuple[str, str], VnfDescriptor]
    adjacency: tuple[tuple[str, str], ...]

    def vnfd_for(self, vnf_id: str) -> VnfDescriptor:
        ref = self.service.vnf(vnf_id)
        if ref is None:
            raise KeyError(vnf_id)
        return self.vnfds[(ref.vnfd_name, ref.vnfd_version)]

    def flavor_for(self, vnf_id: str) -> ResourceFlavor:
        """Selected flavor of a VNF entry, falling back to the VNFD default."""
        ref = self.service.vnf(vnf_id)
        if ref is None:
            raise KeyError(vnf_id)
        vnfd = self.vnfds[(ref.vnfd_name, ref.vnfd_version)]
        if ref.flavor is None:
            return vnfd.default_flavor
        flavor = vnfd.flavor(ref.flavor)
        if flavor is None:
            raise FlavorMismatch(vnf_id, ref.flavor, vnfd.name)
        return flavor

    def vnf_nodes(self) -> list[str]:
        return [v.vnf_id for v in self.service.vnfs]


def resolve_references(service: ServiceDescriptor, lookup) -> ResolvedService:
    """Resolve every VNFD reference through `lookup(name, version)`.

    Resolution is total: either every reference resolves and every explicitly
    selected flavor exists, or this raises. `lookup` returns a VnfDescriptor
    or None.
    """
    vnfds: dict[tuple[str, str], VnfDescriptor] = {}
    missing: list[tuple[str, str]] = []
    for ref in service.vnfs:
        key = (ref.vnfd_name, ref.vnfd_version)
        if key in vnfds:
            continue
        vnfd = lookup(*key)
        if vnfd is None:
            missing.append(key)
        else:
            vnfds[key] = vnfd
    if missing:
        raise UnresolvedReference(sorted(set(missing)))
    for ref in service.vnfs:
        vnfd = vnfds[(ref.vnfd_name, ref.vnfd_version)]
        if ref.flavor is not None and vnfd.flavor(ref.flavor) is None:
            raise FlavorMismatch(ref.vnf_id, ref.flavor, vnfd.name)
    return ResolvedService(service=service, vnfds=vnfds, adjacency=derived_adjacency(service))
