"""Scaling-template expansion: clone naming, link surgery, graph validity."""

from __future__ import annotations

import pytest

from svcsdk.errors import TargetNotFound, UnknownTemplate
from svcsdk.templates import ScalingTemplate, instantiate_template
from svcsdk.validation import analyze_graph


def _vnf_ids(resolved):
    return [v.vnf_id for v in resolved.service.vnfs]


def test_load_balancer_n1_is_original_plus_passthrough(cdn_resolved, balancer_vnfd):
    expanded = instantiate_template(
        ScalingTemplate("load-balancer", "router", 1, balancer=balancer_vnfd), cdn_resolved
    )
    assert _vnf_ids(expanded) == ["dpi-a", "dpi-b", "cache-a", "cache-b", "router-lb", "router-1"]
    assert not analyze_graph(expanded).errors
    # the single clone keeps the full original ingress bandwidth
    lb_links = [l for l in expanded.service.virtual_links if l.id.startswith("router-lb-")]
    assert len(lb_links) == 1 and lb_links[0].bandwidth_mbps == pytest.approx(4000.0)


def test_load_balancer_n3_on_cdn(cdn_resolved, balancer_vnfd):
    expanded = instantiate_template(
        ScalingTemplate("load-balancer", "router", 3, balancer=balancer_vnfd), cdn_resolved
    )
    assert [v for v in _vnf_ids(expanded) if v.startswith("router")] == [
        "router-lb",
        "router-1",
        "router-2",
        "router-3",
    ]
    lb_links = [l for l in expanded.service.virtual_links if l.id.startswith("router-lb-")]
    assert len(lb_links) == 3
    for link in lb_links:
        assert link.bandwidth_mbps == pytest.approx(4000.0 / 3)
    # clone egress links preserved per clone
    egress = sorted(l.id for l in expanded.service.virtual_links if l.id.startswith("l-router-cloud"))
    assert egress == ["l-router-cloud-1", "l-router-cloud-2", "l-router-cloud-3"]
    # the original ingress links now terminate at the balancer
    ingress = [l for l in expanded.service.virtual_links if l.id in ("l-dpi-a-router", "l-dpi-b-router")]
    assert all(any(e.node == "router-lb" for e in l.endpoints) for l in ingress)
    assert not analyze_graph(expanded).errors


def test_full_mesh_pairwise_links(cdn_resolved):
    expanded = instantiate_template(ScalingTemplate("full-mesh", "cache-a", 3), cdn_resolved)
    mesh = sorted(l.id for l in expanded.service.virtual_links if "mesh" in l.id)
    assert mesh == ["cache-a-mesh-1-2", "cache-a-mesh-1-3", "cache-a-mesh-2-3"]  # C(3,2)
    assert not analyze_graph(expanded).errors


def test_full_mesh_n1_is_identity(cdn_resolved):
    expanded = instantiate_template(ScalingTemplate("full-mesh", "cache-a", 1), cdn_resolved)
    assert expanded.service == cdn_resolved.service


def test_hub_and_spoke_links_every_clone_to_the_hub(cdn_resolved):
    expanded = instantiate_template(
        ScalingTemplate("hub-and-spoke", "cache-a", 3, hub_vnf="router"), cdn_resolved
    )
    hub_links = [l for l in expanded.service.virtual_links if "hub" in l.id]
    assert len(hub_links) == 3
    for link in hub_links:
        assert any(e.node == "router" for e in link.endpoints)
    assert not analyze_graph(expanded).errors


def test_unknown_template_and_missing_target(cdn_resolved, balancer_vnfd):
    with pytest.raises(UnknownTemplate):
        instantiate_template(ScalingTemplate("fan-out", "router", 2), cdn_resolved)
    with pytest.raises(TargetNotFound):
        instantiate_template(
            ScalingTemplate("load-balancer", "nonesuch", 2, balancer=balancer_vnfd), cdn_resolved
        )


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("template", ["load-balancer", "hub-and-spoke", "full-mesh"])
def test_every_expansion_passes_graph_analysis(cdn_resolved, balancer_vnfd, template, n):
    spec = ScalingTemplate(
        template,
        "router" if template == "load-balancer" else "cache-b",
        n,
        balancer=balancer_vnfd,
        hub_vnf="router" if template == "hub-and-spoke" else None,
    )
    expanded = instantiate_template(spec, cdn_resolved)
    assert not analyze_graph(expanded).errors


def test_expansion_is_deterministic(cdn_resolved, balancer_vnfd):
    spec = ScalingTemplate("load-balancer", "router", 4, balancer=balancer_vnfd)
    a = instantiate_template(spec, cdn_resolved)
    b = instantiate_template(spec, cdn_resolved)
    assert a.service == b.service
    assert a.adjacency == b.adjacency


def test_vnfm_policy_and_monitoring_follow_the_clones(elastic_resolved, balancer_vnfd):
    expanded = instantiate_template(
        ScalingTemplate("load-balancer", "router", 2, balancer=balancer_vnfd), elastic_resolved
    )
    vnfm = expanded.service.control_functions.vnfm
    assert set(vnfm) == {"router-1", "router-2"}
    monitored = {m.vnf_id for m in expanded.service.monitoring}
    assert monitored == {"router-1", "router-2"}
