"""YAML parsing and canonical serialization of service and VNF descriptors.

The on-disk format is UTF-8 YAML with a fixed top-level key set per descriptor
kind and `descriptor_version: "1.0"`. Parsing is strict about structure (types,
counts, uniqueness within one document) and reports violations as `SchemaError`
with a JSON-pointer path; cross-document referential checks (VNFD resolution,
connection-point validity) belong to `resolve_references` and the validator.
"""

from __future__ import annotations

import re

import yaml

from svcsdk.errors import ParseError, SchemaError
from svcsdk.model import (
    COMPARATORS,
    DIRECTIONS,
    METRICS,
    PLUGIN_PROTOCOL_VERSION,
    AlarmSpec,
    BuiltinPolicy,
    ConnectionPointDecl,
    ControlFunctionRefs,
    CpRef,
    ForwardingGraph,
    MonitoringSpec,
    PerformanceCap,
    PluginRef,
    ResourceFlavor,
    ServiceDescriptor,
    VirtualLink,
    VnfDescriptor,
    VnfImage,
    VnfRef,
)

DESCRIPTOR_VERSION = "1.0"

NSD_KEYS = (
    "descriptor_version",
    "name",
    "vendor",
    "version",
    "vnfs",
    "service_connection_points",
    "virtual_links",
    "forwarding_graphs",
    "control_functions",
    "monitoring",
)

VNFD_KEYS = (
    "descriptor_version",
    "name",
    "vendor",
    "version",
    "image",
    "connection_points",
    "resource_flavors",
    "capabilities",
    "performance",
)

_IDENT_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")
_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


def _load_yaml(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = mark.line + 1 if mark else None
        column = mark.column + 1 if mark else None
        raise ParseError(f"malformed YAML: {exc.problem or exc}", line, column) from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("/", "document must be a mapping")
    return doc


def _fail(path: str, message: str):
    raise SchemaError(path, message)


def _check_keys(doc: dict, allowed: tuple[str, ...], path: str):
    unknown = sorted(k for k in doc if k not in allowed)
    if unknown:
        _fail(f"{path}/{unknown[0]}", "unknown key")


def _get(doc: dict, key: str, path: str):
    if key not in doc:
        _fail(f"{path}/{key}", "required key missing")
    return doc[key]


def _str(value, path: str) -> str:
    if not isinstance(value, str) or not value:
        _fail(path, f"expected non-empty string, got {type(value).__name__}")
    return value


def _ident(value, path: str) -> str:
    s = _str(value, path)
    if not _IDENT_RE.match(s):
        _fail(path, f"{s!r} is not a valid identifier")
    return s


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected number, got {type(value).__name__}")
    return float(value)


def _int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be >= {minimum}")
    return value


def _list(value, path: str) -> list:
    if not isinstance(value, list):
        _fail(path, f"expected list, got {type(value).__name__}")
    return value


def _map(value, path: str) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected mapping, got {type(value).__name__}")
    return value


def _enum(value, options: tuple[str, ...], path: str) -> str:
    s = _str(value, path)
    if s not in options:
        _fail(path, f"must be one of {', '.join(options)}")
    return s


def _cp_ref(value, path: str) -> CpRef:
    s = _str(value, path)
    try:
        return CpRef.parse(s)
    except ValueError as exc:
        _fail(path, str(exc))


def _header(doc: dict, path: str = "") -> tuple[str, str, str]:
    version = _str(_get(doc, "descriptor_version", path), f"{path}/descriptor_version")
    if version != DESCRIPTOR_VERSION:
        _fail(f"{path}/descriptor_version", f"must equal {DESCRIPTOR_VERSION!r}")
    name = _ident(_get(doc, "name", path), f"{path}/name")
    vendor = _ident(_get(doc, "vendor", path), f"{path}/vendor")
    ver = _str(_get(doc, "version", path), f"{path}/version")
    return name, vendor, ver


def _connection_points(value, path: str) -> tuple[ConnectionPointDecl, ...]:
    out: list[ConnectionPointDecl] = []
    seen: set[str] = set()
    for i, item in enumerate(_list(value, path)):
        ipath = f"{path}/{i}"
        item = _map(item, ipath)
        _check_keys(item, ("id", "direction"), ipath)
        cp_id = _ident(_get(item, "id", ipath), f"{ipath}/id")
        if cp_id in seen:
            _fail(f"{ipath}/id", f"duplicate connection point id {cp_id!r}")
        seen.add(cp_id)
        direction = "bidirectional"
        if "direction" in item:
            direction = _enum(item["direction"], DIRECTIONS, f"{ipath}/direction")
        out.append(ConnectionPointDecl(id=cp_id, direction=direction))
    return tuple(out)


def parse_vnf_descriptor(text: str) -> VnfDescriptor:
    """Parse a VNFD document; raises ParseError or SchemaError."""
    doc = _load_yaml(text)
    _check_keys(doc, VNFD_KEYS, "")
    name, vendor, version = _header(doc)

    image = _map(_get(doc, "image", ""), "/image")
    _check_keys(image, ("uri", "sha256"), "/image")
    uri = _str(_get(image, "uri", "/image"), "/image/uri")
    sha = _str(_get(image, "sha256", "/image"), "/image/sha256")
    if not _SHA256_RE.match(sha):
        _fail("/image/sha256", "must be a 64-character lowercase hex digest")

    cps = _connection_points(_get(doc, "connection_points", ""), "/connection_points")

    flavors: list[ResourceFlavor] = []
    seen_flavors: set[str] = set()
    raw_flavors = _list(_get(doc, "resource_flavors", ""), "/resource_flavors")
    if not raw_flavors:
        _fail("/resource_flavors", "at least one flavor is required")
    for i, item in enumerate(raw_flavors):
        fpath = f"/resource_flavors/{i}"
        item = _map(item, fpath)
        _check_keys(item, ("name", "cpu_cores", "memory_mb", "storage_gb"), fpath)
        fname = _ident(_get(item, "name", fpath), f"{fpath}/name")
        if fname in seen_flavors:
            _fail(f"{fpath}/name", f"duplicate flavor name {fname!r}")
        seen_flavors.add(fname)
        flavors.append(
            ResourceFlavor(
                name=fname,
                cpu_cores=_int(_get(item, "cpu_cores", fpath), f"{fpath}/cpu_cores", minimum=1),
                memory_mb=_int(_get(item, "memory_mb", fpath), f"{fpath}/memory_mb", minimum=1),
                storage_gb=_int(_get(item, "storage_gb", fpath), f"{fpath}/storage_gb", minimum=0),
            )
        )

    capabilities: frozenset[str] = frozenset()
    if "capabilities" in doc:
        tags = [_str(t, f"/capabilities/{i}") for i, t in enumerate(_list(doc["capabilities"], "/capabilities"))]
        capabilities = frozenset(tags)

    performance: list[PerformanceCap] = []
    if "performance" in doc:
        for i, item in enumerate(_list(doc["performance"], "/performance")):
            ppath = f"/performance/{i}"
            item = _map(item, ppath)
            _check_keys(item, ("flavor", "max_throughput_mbps"), ppath)
            flavor = _ident(_get(item, "flavor", ppath), f"{ppath}/flavor")
            if flavor not in seen_flavors:
                _fail(f"{ppath}/flavor", f"references undeclared flavor {flavor!r}")
            cap = _number(_get(item, "max_throughput_mbps", ppath), f"{ppath}/max_throughput_mbps")
            if cap < 0:
                _fail(f"{ppath}/max_throughput_mbps", "must be >= 0")
            performance.append(PerformanceCap(flavor=flavor, max_throughput_mbps=cap))

    return VnfDescriptor(
        name=name,
        vendor=vendor,
        version=version,
        image=VnfImage(uri=uri, sha256=sha),
        connection_points=cps,
        resource_flavors=tuple(flavors),
        capabilities=capabilities,
        performance=tuple(performance),
    )


def _control_function(value, path: str) -> BuiltinPolicy | PluginRef:
    item = _map(value, path)
    has_builtin = "builtin" in item
    has_artifact = "artifact" in item
    if has_builtin == has_artifact:
        _fail(path, "exactly one of 'builtin' or 'artifact' is required")
    if has_builtin:
        _check_keys(item, ("builtin", "params"), path)
        name = _ident(item["builtin"], f"{path}/builtin")
        params = dict(_map(item["params"], f"{path}/params")) if "params" in item else {}
        return BuiltinPolicy(name=name, params=params)
    apath = f"{path}/artifact"
    art = _map(item["artifact"], apath)
    _check_keys(art, ("path", "entry", "protocol_version"), apath)
    ref = PluginRef(
        path=_str(_get(art, "path", apath), f"{apath}/path"),
        entry=_str(_get(art, "entry", apath), f"{apath}/entry"),
        protocol_version=_str(_get(art, "protocol_version", apath), f"{apath}/protocol_version"),
    )
    if ref.protocol_version != PLUGIN_PROTOCOL_VERSION:
        _fail(f"{apath}/protocol_version", f"this SDK supports protocol version {PLUGIN_PROTOCOL_VERSION!r}")
    return ref


def parse_service_descriptor(text: str) -> ServiceDescriptor:
    """Parse an NSD document; raises ParseError or SchemaError."""
    doc = _load_yaml(text)
    _check_keys(doc, NSD_KEYS, "")
    name, vendor, version = _header(doc)

    vnfs: list[VnfRef] = []
    seen_ids: set[str] = set()
    for i, item in enumerate(_list(_get(doc, "vnfs", ""), "/vnfs")):
        vpath = f"/vnfs/{i}"
        item = _map(item, vpath)
        _check_keys(item, ("vnf_id", "vnfd", "flavor"), vpath)
        vnf_id = _ident(_get(item, "vnf_id", vpath), f"{vpath}/vnf_id")
        if vnf_id in seen_ids:
            _fail(f"{vpath}/vnf_id", f"duplicate vnf_id {vnf_id!r}")
        seen_ids.add(vnf_id)
        ref = _map(_get(item, "vnfd", vpath), f"{vpath}/vnfd")
        _check_keys(ref, ("name", "version"), f"{vpath}/vnfd")
        flavor = None
        if "flavor" in item:
            flavor = _ident(item["flavor"], f"{vpath}/flavor")
        vnfs.append(
            VnfRef(
                vnf_id=vnf_id,
                vnfd_name=_ident(_get(ref, "name", f"{vpath}/vnfd"), f"{vpath}/vnfd/name"),
                vnfd_version=_str(_get(ref, "version", f"{vpath}/vnfd"), f"{vpath}/vnfd/version"),
                flavor=flavor,
            )
        )

    service_cps: tuple[ConnectionPointDecl, ...] = ()
    if "service_connection_points" in doc:
        service_cps = _connection_points(doc["service_connection_points"], "/service_connection_points")

    links: list[VirtualLink] = []
    seen_links: set[str] = set()
    if "virtual_links" in doc:
        for i, item in enumerate(_list(doc["virtual_links"], "/virtual_links")):
            lpath = f"/virtual_links/{i}"
            item = _map(item, lpath)
            _check_keys(item, ("id", "endpoints", "bandwidth_mbps", "max_latency_ms"), lpath)
            link_id = _ident(_get(item, "id", lpath), f"{lpath}/id")
            if link_id in seen_links:
                _fail(f"{lpath}/id", f"duplicate link id {link_id!r}")
            seen_links.add(link_id)
            raw_eps = _list(_get(item, "endpoints", lpath), f"{lpath}/endpoints")
            if len(raw_eps) != 2:
                _fail(f"{lpath}/endpoints", "exactly two endpoints are required")
            eps = tuple(_cp_ref(e, f"{lpath}/endpoints/{j}") for j, e in enumerate(raw_eps))
            if eps[0] == eps[1]:
                _fail(f"{lpath}/endpoints", "endpoints must be distinct")
            bw = _number(_get(item, "bandwidth_mbps", lpath), f"{lpath}/bandwidth_mbps")
            if bw <= 0:
                _fail(f"{lpath}/bandwidth_mbps", "must be > 0")
            latency = None
            if "max_latency_ms" in item and item["max_latency_ms"] is not None:
                latency = _number(item["max_latency_ms"], f"{lpath}/max_latency_ms")
                if latency <= 0:
                    _fail(f"{lpath}/max_latency_ms", "must be > 0")
            links.append(VirtualLink(id=link_id, endpoints=eps, bandwidth_mbps=bw, max_latency_ms=latency))

    fgs: list[ForwardingGraph] = []
    seen_fgs: set[str] = set()
    if "forwarding_graphs" in doc:
        for i, item in enumerate(_list(doc["forwarding_graphs"], "/forwarding_graphs")):
            fpath = f"/forwarding_graphs/{i}"
            item = _map(item, fpath)
            _check_keys(item, ("id", "path"), fpath)
            fg_id = _ident(_get(item, "id", fpath), f"{fpath}/id")
            if fg_id in seen_fgs:
                _fail(f"{fpath}/id", f"duplicate forwarding graph id {fg_id!r}")
            seen_fgs.add(fg_id)
            raw_path = _list(_get(item, "path", fpath), f"{fpath}/path")
            if len(raw_path) < 2:
                _fail(f"{fpath}/path", "path needs at least two steps")
            path = tuple(_cp_ref(p, f"{fpath}/path/{j}") for j, p in enumerate(raw_path))
            fgs.append(ForwardingGraph(id=fg_id, path=path))

    control = ControlFunctionRefs()
    if "control_functions" in doc:
        cf = _map(doc["control_functions"], "/control_functions")
        _check_keys(cf, ("nfvo", "vnfm"), "/control_functions")
        nfvo = _control_function(cf["nfvo"], "/control_functions/nfvo") if "nfvo" in cf else BuiltinPolicy("first-fit")
        vnfm: dict[str, BuiltinPolicy | PluginRef] = {}
        if "vnfm" in cf:
            for vnf_id, value in _map(cf["vnfm"], "/control_functions/vnfm").items():
                vpath = f"/control_functions/vnfm/{vnf_id}"
                if vnf_id not in seen_ids:
                    _fail(vpath, f"references undeclared vnf_id {vnf_id!r}")
                vnfm[vnf_id] = _control_function(value, vpath)
        control = ControlFunctionRefs(nfvo=nfvo, vnfm=vnfm)

    monitoring: list[MonitoringSpec] = []
    if "monitoring" in doc:
        for i, item in enumerate(_list(doc["monitoring"], "/monitoring")):
            mpath = f"/monitoring/{i}"
            item = _map(item, mpath)
            _check_keys(item, ("metric", "vnf_id", "alarm"), mpath)
            metric = _enum(_get(item, "metric", mpath), METRICS, f"{mpath}/metric")
            vnf_id = _ident(_get(item, "vnf_id", mpath), f"{mpath}/vnf_id")
            if vnf_id not in seen_ids:
                _fail(f"{mpath}/vnf_id", f"references undeclared vnf_id {vnf_id!r}")
            alarm = None
            if "alarm" in item and item["alarm"] is not None:
                apath = f"{mpath}/alarm"
                raw = _map(item["alarm"], apath)
                _check_keys(raw, ("comparator", "threshold", "duration_s"), apath)
                alarm = AlarmSpec(
                    comparator=_enum(_get(raw, "comparator", apath), COMPARATORS, f"{apath}/comparator"),
                    threshold=_number(_get(raw, "threshold", apath), f"{apath}/threshold"),
                    duration_s=_int(_get(raw, "duration_s", apath), f"{apath}/duration_s", minimum=1),
                )
            monitoring.append(MonitoringSpec(metric=metric, vnf_id=vnf_id, alarm=alarm))

    return ServiceDescriptor(
        name=name,
        vendor=vendor,
        version=version,
        vnfs=tuple(vnfs),
        service_connection_points=service_cps,
        virtual_links=tuple(links),
        forwarding_graphs=tuple(fgs),
        control_functions=control,
        monitoring=tuple(monitoring),
    )


def _cp_decl_doc(cp: ConnectionPointDecl) -> dict:
    return {"id": cp.id, "direction": cp.direction}


def _control_function_doc(cf: BuiltinPolicy | PluginRef) -> dict:
    if isinstance(cf, BuiltinPolicy):
        doc: dict = {"builtin": cf.name}
        if cf.params:
            doc["params"] = {k: cf.params[k] for k in sorted(cf.params)}
        return doc
    return {
        "artifact": {"path": cf.path, "entry": cf.entry, "protocol_version": cf.protocol_version}
    }


def _service_doc(d: ServiceDescriptor) -> dict:
    doc: dict = {
        "descriptor_version": DESCRIPTOR_VERSION,
        "name": d.name,
        "vendor": d.vendor,
        "version": d.version,
        "vnfs": [],
        "service_connection_points": [_cp_decl_doc(c) for c in d.service_connection_points],
        "virtual_links": [],
        "forwarding_graphs": [],
        "control_functions": {
            "nfvo": _control_function_doc(d.control_functions.nfvo),
            "vnfm": {
                k: _control_function_doc(v) for k, v in sorted(d.control_functions.vnfm.items())
            },
        },
        "monitoring": [],
    }
    for v in d.vnfs:
        entry = {"vnf_id": v.vnf_id, "vnfd": {"name": v.vnfd_name, "version": v.vnfd_version}}
        if v.flavor is not None:
            entry["flavor"] = v.flavor
        doc["vnfs"].append(entry)
    for l in d.virtual_links:
        entry = {
            "id": l.id,
            "endpoints": [str(e) for e in l.endpoints],
            "bandwidth_mbps": l.bandwidth_mbps,
        }
        if l.max_latency_ms is not None:
            entry["max_latency_ms"] = l.max_latency_ms
        doc["virtual_links"].append(entry)
    for f in d.forwarding_graphs:
        doc["forwarding_graphs"].append({"id": f.id, "path": [str(p) for p in f.path]})
    for m in d.monitoring:
        entry = {"metric": m.metric, "vnf_id": m.vnf_id}
        if m.alarm is not None:
            entry["alarm"] = {
                "comparator": m.alarm.comparator,
                "threshold": m.alarm.threshold,
                "duration_s": m.alarm.duration_s,
            }
        doc["monitoring"].append(entry)
    return doc


def _vnfd_doc(d: VnfDescriptor) -> dict:
    return {
        "descriptor_version": DESCRIPTOR_VERSION,
        "name": d.name,
        "vendor": d.vendor,
        "version": d.version,
        "image": {"uri": d.image.uri, "sha256": d.image.sha256},
        "connection_points": [_cp_decl_doc(c) for c in d.connection_points],
        "resource_flavors": [
            {
                "name": f.name,
                "cpu_cores": f.cpu_cores,
                "memory_mb": f.memory_mb,
                "storage_gb": f.storage_gb,
            }
            for f in d.resource_flavors
        ],
        "capabilities": sorted(d.capabilities),
        "performance": [
            {"flavor": p.flavor, "max_throughput_mbps": p.max_throughput_mbps}
            for p in d.performance
        ],
    }


def serialize_descriptor(d: ServiceDescriptor | VnfDescriptor) -> str:
    """Canonical YAML form: schema key order, lists in input order, stable bytes."""
    doc = _vnfd_doc(d) if isinstance(d, VnfDescriptor) else _service_doc(d)
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False, width=120)


def parse_descriptor(text: str):
    """Parse either descriptor kind, sniffing by top-level keys."""
    doc = _load_yaml(text)
    return parse_vnf_descriptor(text) if "image" in doc else parse_service_descriptor(text)
