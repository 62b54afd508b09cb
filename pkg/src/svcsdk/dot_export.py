"""Graphviz DOT export of service graphs and deployed topologies.

Output is byte-stable for identical inputs: nodes and edges are emitted in
sorted order.
"""

from __future__ import annotations

from svcsdk.model import ResolvedService


def _quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def service_to_dot(r: ResolvedService) -> str:
    """VNFs as boxes labelled name+flavor, service endpoints as ellipses,
    virtual links as edges labelled with their bandwidth."""
    lines = ["digraph service {", "  rankdir=LR;", "  node [shape=box];"]
    for cp in sorted(r.service.service_connection_points, key=lambda c: c.id):
        lines.append(f"  {_quote('ns:' + cp.id)} [shape=ellipse, label={_quote(cp.id)}];")
    for vnf in sorted(r.service.vnfs, key=lambda v: v.vnf_id):
        flavor = r.flavor_for(vnf.vnf_id)
        label = f"{vnf.vnf_id}\\n({vnf.vnfd_name} {flavor.name})"
        lines.append(f"  {_quote(vnf.vnf_id)} [label={_quote(label)}];")
    adjacency = set(r.adjacency)
    for link in sorted(r.service.virtual_links, key=lambda l: l.id):
        a, b = link.endpoints
        directed = (a.node, b.node) in adjacency
        if not directed and (b.node, a.node) in adjacency:
            a, b = b, a
            directed = True
        attrs = f"label={_quote(f'{link.bandwidth_mbps:g} Mbit/s')}"
        if not directed:
            attrs += ", dir=none"
        lines.append(f"  {_quote(a.node)} -> {_quote(b.node)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _final_deployment(records: list[dict]) -> tuple[dict[str, dict], dict[str, str]]:
    """Replay a run's records into (vnf -> {instance ids, flavor}, instance -> pop)."""
    instances: dict[str, dict] = {}
    placement: dict[str, str] = {}
    for record in records:
        kind = record.get("event")
        if kind == "deploy":
            placement = dict(record["placement"])
            for vnf_id, ids in record["instances"].items():
                instances[vnf_id] = {"ids": list(ids), "flavor": None}
        elif kind == "tick":
            for vnf_id, st in record["vnfs"].items():
                instances.setdefault(vnf_id, {"ids": [], "flavor": None})
                instances[vnf_id]["ids"] = sorted(st["instances"])
                instances[vnf_id]["flavor"] = st["flavor"]
        elif kind == "scale_applied":
            entry = instances.setdefault(record["vnf_id"], {"ids": [], "flavor": None})
            entry["ids"] = list(record["instances"])
            entry["flavor"] = record.get("flavor")
        elif kind == "placement_update":
            placement = dict(record["assignments"])
    return instances, placement


def deployment_to_dot(records: list[dict]) -> str:
    """Deployed topology from an event log: PoPs as clusters, instances as
    nodes, dispatch edges between instance sets of adjacent VNFs."""
    instances, placement = _final_deployment(records)
    live = {iid for entry in instances.values() for iid in entry["ids"]}
    pops: dict[str, list[str]] = {}
    for iid in sorted(live):
        pops.setdefault(placement.get(iid, "unplaced"), []).append(iid)

    flavor_of = {}
    vnf_of = {}
    for vnf_id, entry in instances.items():
        for iid in entry["ids"]:
            flavor_of[iid] = entry["flavor"]
            vnf_of[iid] = vnf_id

    lines = ["digraph deployment {", "  rankdir=LR;", "  node [shape=box];"]
    for pop_id in sorted(pops):
        lines.append(f"  subgraph {_quote('cluster_' + pop_id)} {{")
        lines.append(f"    label={_quote(pop_id)};")
        for iid in pops[pop_id]:
            label = iid if not flavor_of.get(iid) else f"{iid}\\n({flavor_of[iid]})"
            lines.append(f"    {_quote(iid)} [label={_quote(label)}];")
        lines.append("  }")

    # adjacency between VNFs, drawn instance set to instance set
    adjacency: set[tuple[str, str]] = set()
    for record in records:
        if record.get("event") == "deploy" and "adjacency" in record:
            adjacency = {tuple(e) for e in record["adjacency"]}
    edges: set[tuple[str, str]] = set()
    for u, v in adjacency:
        for iu in instances.get(u, {}).get("ids", []):
            for iv in instances.get(v, {}).get("ids", []):
                edges.add((iu, iv))
    for iu, iv in sorted(edges):
        lines.append(f"  {_quote(iu)} -> {_quote(iv)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
