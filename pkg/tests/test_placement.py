"""Builtin first-fit placement and the placement checker."""

from __future__ import annotations

import pytest
import yaml

from svcsdk.catalogue import directory_lookup
from svcsdk.descriptors import parse_service_descriptor
from svcsdk.errors import NoFeasiblePlacement
from svcsdk.infrastructure import load_infrastructure
from svcsdk.model import resolve_references
from svcsdk.placement import (
    PLACEMENT_CAPACITY,
    PLACEMENT_LATENCY,
    PLACEMENT_MISSING,
    Instance,
    check_placement,
    place,
)

from tests.conftest import vnfd_from_spec


def _instances(resolved):
    return [
        Instance(f"{v.vnf_id}-1", v.vnf_id, resolved.flavor_for(v.vnf_id))
        for v in resolved.service.vnfs
    ]


def test_cdn_first_fit_hand_walk(cdn_resolved, infra_4pop):
    # Hand-execution over the fixture capacities: each 3-core edge takes one
    # 2-core DPI plus one 1-core cache; the 2-core router overflows both edges
    # and lands on the core PoP.
    assignments = place(cdn_resolved, infra_4pop, _instances(cdn_resolved))
    assert assignments == {
        "dpi-a-1": "edge-a",
        "dpi-b-1": "edge-b",
        "cache-a-1": "edge-a",
        "cache-b-1": "edge-b",
        "router-1": "core-1",
    }


def test_builtin_placement_passes_the_checker(cdn_resolved, infra_4pop):
    instances = _instances(cdn_resolved)
    assignments = place(cdn_resolved, infra_4pop, instances)
    assert check_placement(assignments, cdn_resolved, infra_4pop, instances).passed


def test_oversized_demand_is_infeasible(cdn_dir, infra_4pop):
    doc = yaml.safe_load((cdn_dir / "vnfd-router.yaml").read_text())
    doc["resource_flavors"].append({"name": "huge", "cpu_cores": 999, "memory_mb": 1024, "storage_gb": 1})
    huge_router = yaml.safe_dump(doc)
    nsd_text = (cdn_dir / "nsd.yaml").read_text().replace("flavor: medium", "flavor: huge")
    tmp_vnfds = {("router", "1.0")}

    from svcsdk.descriptors import parse_vnf_descriptor

    router = parse_vnf_descriptor(huge_router)
    base_lookup = directory_lookup(cdn_dir)

    def lookup(name, version):
        if (name, version) in tmp_vnfds:
            return router
        return base_lookup(name, version)

    resolved = resolve_references(parse_service_descriptor(nsd_text), lookup)
    with pytest.raises(NoFeasiblePlacement):
        place(resolved, infra_4pop, _instances(resolved))


def test_checker_flags_capacity_overflow(cdn_resolved, infra_4pop):
    instances = _instances(cdn_resolved)
    everything_on_edge_a = {i.id: "edge-a" for i in instances}
    report = check_placement(everything_on_edge_a, cdn_resolved, infra_4pop, instances)
    assert not report.passed
    capacity = [i for i in report.issues if i.code == PLACEMENT_CAPACITY]
    assert capacity
    assert any("demand 8" in i.message and "capacity 3" in i.message for i in capacity)


def test_checker_flags_latency_violation(cdn_dir, infra_4pop):
    text = (cdn_dir / "nsd.yaml").read_text().replace(
        '{id: l-dpi-a-router, endpoints: ["dpi-a:output", "router:in-a"], bandwidth_mbps: 2000}',
        '{id: l-dpi-a-router, endpoints: ["dpi-a:output", "router:in-a"], bandwidth_mbps: 2000, max_latency_ms: 1}',
    )
    resolved = resolve_references(parse_service_descriptor(text), directory_lookup(cdn_dir))
    instances = _instances(resolved)
    assignments = place(resolved, infra_4pop, instances)  # dpi-a on edge-a, router on core: 5 ms
    report = check_placement(assignments, resolved, infra_4pop, instances)
    assert PLACEMENT_LATENCY in report.codes()


def test_checker_flags_unplaced_instances(cdn_resolved, infra_4pop):
    instances = _instances(cdn_resolved)
    partial = {i.id: "cloud-1" for i in instances[:-1]}
    report = check_placement(partial, cdn_resolved, infra_4pop, instances)
    assert PLACEMENT_MISSING in report.codes()


def test_zone_hint_steers_first_fit(infra_4pop):
    from svcsdk.model import ForwardingGraph, CpRef, ServiceDescriptor, VirtualLink, VnfRef
    from svcsdk.model import resolve_references as resolve

    hinted = vnfd_from_spec("pinned", [("in", "ingress"), ("out", "egress")])
    hinted = type(hinted)(
        name=hinted.name,
        vendor=hinted.vendor,
        version=hinted.version,
        image=hinted.image,
        connection_points=hinted.connection_points,
        resource_flavors=hinted.resource_flavors,
        capabilities=frozenset({"zone:cloud"}),
        performance=hinted.performance,
    )
    service = ServiceDescriptor(
        name="s",
        vendor="t",
        version="1.0",
        vnfs=(VnfRef("pinned", "pinned", "1.0", "tiny"),),
    )
    resolved = resolve(service, lambda n, v: hinted)
    instances = [Instance("pinned-1", "pinned", resolved.flavor_for("pinned"))]
    assignments = place(resolved, infra_4pop, instances)
    assert assignments == {"pinned-1": "cloud-1"}
