"""Scaling-topology templates: load-balancer, hub-and-spoke, full-mesh.

A template takes one VNF of a resolved service and expands it into a scaled
subgraph with deterministic clone ids ``<vnf_id>-<k>``. The expanded service
is a normal `ResolvedService`: it can be re-analysed, exported back to
descriptor form, packaged or fed to the emulator as-is.
"""

from __future__ import annotations

from dataclasses import dataclass

from svcsdk.errors import TargetNotFound, UnknownTemplate
from svcsdk.model import (
    BuiltinPolicy,
    ControlFunctionRefs,
    CpRef,
    ForwardingGraph,
    MonitoringSpec,
    ResolvedService,
    ServiceDescriptor,
    VirtualLink,
    VnfDescriptor,
    VnfRef,
    resolve_references,
)

TEMPLATE_NAMES = ("load-balancer", "hub-and-spoke", "full-mesh")


@dataclass(frozen=True)
class ScalingTemplate:
    name: str  # load-balancer | hub-and-spoke | full-mesh
    target_vnf: str
    instances: int
    balancer: VnfDescriptor | None = None  # required for load-balancer
    hub_vnf: str | None = None  # required for hub-and-spoke


def _first_cp(vnfd: VnfDescriptor, ingress: bool) -> str:
    for cp in vnfd.connection_points:
        if (cp.carries_ingress if ingress else cp.carries_egress):
            return cp.id
    return vnfd.connection_points[0].id


def _classify_links(r: ResolvedService, target: str) -> tuple[list[VirtualLink], list[VirtualLink]]:
    """Split target-incident links into (ingress, egress) by the direction the
    forwarding paths use them in; unused links fall back to the CP direction."""
    in_edges = {u for u, v in r.adjacency if v == target}
    out_edges = {v for u, v in r.adjacency if u == target}
    vnfd = r.vnfd_for(target)
    ingress: list[VirtualLink] = []
    egress: list[VirtualLink] = []
    for link in r.service.virtual_links:
        ends = [e for e in link.endpoints if e.node == target]
        if not ends:
            continue
        other = link.other_end(ends[0])
        if other.node in in_edges:
            ingress.append(link)
        elif other.node in out_edges:
            egress.append(link)
        else:
            cp = vnfd.cp(ends[0].cp)
            (ingress if cp is not None and cp.carries_ingress else egress).append(link)
    return ingress, egress


def _repoint(link: VirtualLink, old: str, new_ref: CpRef, new_id: str | None = None) -> VirtualLink:
    endpoints = tuple(new_ref if e.node == old else e for e in link.endpoints)
    return VirtualLink(
        id=new_id or link.id,
        endpoints=endpoints,  # type: ignore[arg-type]
        bandwidth_mbps=link.bandwidth_mbps,
        max_latency_ms=link.max_latency_ms,
    )


def _target_runs(path: tuple[CpRef, ...], target: str) -> list[tuple[int, int]]:
    """Maximal index ranges [i, j) of consecutive path refs on the target."""
    runs = []
    i = 0
    while i < len(path):
        if path[i].node == target:
            j = i
            while j < len(path) and path[j].node == target:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def _rename_control(service: ServiceDescriptor, target: str, clone_ids: list[str]) -> tuple[ControlFunctionRefs, tuple[MonitoringSpec, ...]]:
    vnfm = {}
    for vnf_id, cf in service.control_functions.vnfm.items():
        if vnf_id == target:
            for cid in clone_ids:
                vnfm[cid] = cf
        else:
            vnfm[vnf_id] = cf
    control = ControlFunctionRefs(nfvo=service.control_functions.nfvo, vnfm=vnfm)
    monitoring = []
    for m in service.monitoring:
        if m.vnf_id == target:
            monitoring.extend(MonitoringSpec(m.metric, cid, m.alarm) for cid in clone_ids)
        else:
            monitoring.append(m)
    return control, tuple(monitoring)


def _rebuild(r: ResolvedService, service: ServiceDescriptor, extra_vnfds: dict) -> ResolvedService:
    catalogue = dict(r.vnfds)
    catalogue.update(extra_vnfds)
    return resolve_references(service, lambda n, v: catalogue.get((n, v)))


def _expand_load_balancer(t: ScalingTemplate, r: ResolvedService) -> ResolvedService:
    if t.balancer is None:
        raise UnknownTemplate("load-balancer template needs a balancer VNFD")
    service = r.service
    target = t.target_vnf
    n = t.instances
    target_ref = service.vnf(target)
    vnfd = r.vnfd_for(target)
    lb_id = f"{target}-lb"
    clone_ids = [f"{target}-{k}" for k in range(1, n + 1)]

    lb_in = CpRef(lb_id, _first_cp(t.balancer, ingress=True))
    lb_out = CpRef(lb_id, _first_cp(t.balancer, ingress=False))
    clone_entry_cp = _first_cp(vnfd, ingress=True)

    vnfs: list[VnfRef] = []
    for v in service.vnfs:
        if v.vnf_id != target:
            vnfs.append(v)
            continue
        vnfs.append(VnfRef(lb_id, t.balancer.name, t.balancer.version, t.balancer.default_flavor.name))
        vnfs.extend(VnfRef(cid, v.vnfd_name, v.vnfd_version, v.flavor) for cid in clone_ids)

    ingress_links, egress_links = _classify_links(r, target)
    total_ingress = sum(l.bandwidth_mbps for l in ingress_links)
    per_clone_bw = total_ingress / n if total_ingress > 0 else 1000.0

    links: list[VirtualLink] = []
    for link in service.virtual_links:
        if link in ingress_links:
            links.append(_repoint(link, target, lb_in))
        elif link in egress_links:
            for k, cid in enumerate(clone_ids, start=1):
                old_ref = next(e for e in link.endpoints if e.node == target)
                links.append(_repoint(link, target, CpRef(cid, old_ref.cp), new_id=f"{link.id}-{k}"))
        else:
            links.append(link)
    for k, cid in enumerate(clone_ids, start=1):
        links.append(
            VirtualLink(
                id=f"{lb_id}-{k}",
                endpoints=(lb_out, CpRef(cid, clone_entry_cp)),
                bandwidth_mbps=per_clone_bw,
            )
        )

    fgs: list[ForwardingGraph] = []
    for fg in service.forwarding_graphs:
        runs = _target_runs(fg.path, target)
        if not runs:
            fgs.append(fg)
            continue
        for k, cid in enumerate(clone_ids, start=1):
            path: list[CpRef] = []
            i = 0
            for start, end in runs:
                path.extend(fg.path[i:start])
                entry = fg.path[start]
                exit_ref = fg.path[end - 1]
                if start == 0:
                    # Path originates inside the target: no balancer on the way in.
                    path.extend(CpRef(cid, ref.cp) for ref in fg.path[start:end])
                else:
                    path.extend([lb_in, lb_out, CpRef(cid, clone_entry_cp)])
                    if end < len(fg.path) and exit_ref.cp != clone_entry_cp:
                        path.append(CpRef(cid, exit_ref.cp))
                i = end
            path.extend(fg.path[i:])
            fgs.append(ForwardingGraph(id=f"{fg.id}-{k}", path=tuple(path)))

    control, monitoring = _rename_control(service, target, clone_ids)
    expanded = ServiceDescriptor(
        name=service.name,
        vendor=service.vendor,
        version=service.version,
        vnfs=tuple(vnfs),
        service_connection_points=service.service_connection_points,
        virtual_links=tuple(links),
        forwarding_graphs=tuple(fgs),
        control_functions=control,
        monitoring=monitoring,
    )
    assert target_ref is not None
    return _rebuild(r, expanded, {(t.balancer.name, t.balancer.version): t.balancer})


def _expand_clones(t: ScalingTemplate, r: ResolvedService) -> ResolvedService:
    """Shared machinery for hub-and-spoke and full-mesh: replace the target
    with n clones, replicating its links and paths per clone, then add the
    template's interconnect links."""
    service = r.service
    target = t.target_vnf
    n = t.instances
    vnfd = r.vnfd_for(target)

    if t.name == "full-mesh" and n == 1:
        return r  # a 1-mesh is the original node

    clone_ids = [target] if n == 1 else [f"{target}-{k}" for k in range(1, n + 1)]
    renamed = n > 1

    vnfs: list[VnfRef] = []
    for v in service.vnfs:
        if v.vnf_id != target or not renamed:
            vnfs.append(v)
        else:
            vnfs.extend(VnfRef(cid, v.vnfd_name, v.vnfd_version, v.flavor) for cid in clone_ids)

    ingress_links, _ = _classify_links(r, target)
    total_ingress = sum(l.bandwidth_mbps for l in ingress_links)
    interconnect_bw = total_ingress / n if total_ingress > 0 else 1000.0

    links: list[VirtualLink] = []
    for link in service.virtual_links:
        if renamed and any(e.node == target for e in link.endpoints):
            old_ref = next(e for e in link.endpoints if e.node == target)
            for k, cid in enumerate(clone_ids, start=1):
                links.append(_repoint(link, target, CpRef(cid, old_ref.cp), new_id=f"{link.id}-{k}"))
        else:
            links.append(link)

    entry_cp = _first_cp(vnfd, ingress=True)
    exit_cp = _first_cp(vnfd, ingress=False)
    if t.name == "hub-and-spoke":
        if t.hub_vnf is None or service.vnf(t.hub_vnf) is None:
            raise TargetNotFound(f"hub vnf {t.hub_vnf!r} not in service")
        hub_vnfd = r.vnfd_for(t.hub_vnf)
        hub_out = CpRef(t.hub_vnf, _first_cp(hub_vnfd, ingress=False))
        for k, cid in enumerate(clone_ids, start=1):
            links.append(
                VirtualLink(
                    id=f"{target}-hub-{k}",
                    endpoints=(hub_out, CpRef(cid, entry_cp)),
                    bandwidth_mbps=interconnect_bw,
                )
            )
    else:  # full-mesh
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                links.append(
                    VirtualLink(
                        id=f"{target}-mesh-{i}-{j}",
                        endpoints=(CpRef(clone_ids[i - 1], exit_cp), CpRef(clone_ids[j - 1], entry_cp)),
                        bandwidth_mbps=interconnect_bw,
                    )
                )

    fgs: list[ForwardingGraph] = []
    for fg in service.forwarding_graphs:
        if not renamed or not any(ref.node == target for ref in fg.path):
            fgs.append(fg)
            continue
        for k, cid in enumerate(clone_ids, start=1):
            path = tuple(CpRef(cid, ref.cp) if ref.node == target else ref for ref in fg.path)
            fgs.append(ForwardingGraph(id=f"{fg.id}-{k}", path=path))

    control, monitoring = _rename_control(service, target, clone_ids) if renamed else (
        service.control_functions,
        service.monitoring,
    )
    expanded = ServiceDescriptor(
        name=service.name,
        vendor=service.vendor,
        version=service.version,
        vnfs=tuple(vnfs),
        service_connection_points=service.service_connection_points,
        virtual_links=tuple(links),
        forwarding_graphs=tuple(fgs),
        control_functions=control,
        monitoring=monitoring,
    )
    return _rebuild(r, expanded, {})


def instantiate_template(t: ScalingTemplate, target: ResolvedService) -> ResolvedService:
    """Expand one VNF of `target` per the template; deterministic for fixed
    parameters (stable clone and link naming)."""
    if t.name not in TEMPLATE_NAMES:
        raise UnknownTemplate(f"unknown template {t.name!r}")
    if t.instances < 1:
        raise ValueError("instance count must be >= 1")
    if target.service.vnf(t.target_vnf) is None:
        raise TargetNotFound(f"vnf {t.target_vnf!r} not in service")
    if t.name == "load-balancer":
        return _expand_load_balancer(t, target)
    return _expand_clones(t, target)
