"""Reference resolution and the derived adjacency graph."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcsdk.catalogue import directory_lookup
from svcsdk.descriptors import parse_service_descriptor
from svcsdk.errors import FlavorMismatch, UnresolvedReference
from svcsdk.model import ServiceDescriptor, derived_adjacency, resolve_references

from tests.conftest import service_from_edges

CDN_ADJACENCY = {
    ("cache-a", "ns:client"),
    ("cache-b", "ns:client"),
    ("dpi-a", "router"),
    ("dpi-b", "router"),
    ("ns:client", "dpi-a"),
    ("ns:client", "dpi-b"),
    ("ns:cloud", "cache-a"),
    ("ns:cloud", "cache-b"),
    ("router", "ns:cloud"),
}


def test_cdn_adjacency_matches_hand_walk(cdn_resolved):
    # Walking the four fixture paths by hand: two upstream chains through the
    # DPIs into the router and out to the cloud endpoint, two downstream
    # chains from the cloud endpoint through the caches back to the client.
    assert set(cdn_resolved.adjacency) == CDN_ADJACENCY


def test_missing_vnfd_lists_the_pair(cdn_dir, tmp_path):
    nsd = parse_service_descriptor((cdn_dir / "nsd.yaml").read_text())
    for name in ("dpi", "cache", "balancer"):
        (tmp_path / f"vnfd-{name}.yaml").write_text((cdn_dir / f"vnfd-{name}.yaml").read_text())
    with pytest.raises(UnresolvedReference) as err:
        resolve_references(nsd, directory_lookup(tmp_path))
    assert err.value.missing == [("router", "1.0")]


def test_empty_service_resolves_with_empty_adjacency():
    service = ServiceDescriptor(name="empty", vendor="t", version="1.0", vnfs=())
    resolved = resolve_references(service, lambda n, v: None)
    assert resolved.adjacency == ()


def test_flavor_mismatch_raises(cdn_dir):
    text = (cdn_dir / "nsd.yaml").read_text().replace("flavor: medium", "flavor: gigantic")
    nsd = parse_service_descriptor(text)
    with pytest.raises(FlavorMismatch):
        resolve_references(nsd, directory_lookup(cdn_dir))


def test_default_flavor_falls_back_to_first_declared(cdn_dir):
    text = (cdn_dir / "nsd.yaml").read_text().replace("    flavor: medium\n", "")
    nsd = parse_service_descriptor(text)
    resolved = resolve_references(nsd, directory_lookup(cdn_dir))
    assert resolved.flavor_for("router").name == "small"


def test_resolution_is_total(cdn_resolved):
    for vnf in cdn_resolved.service.vnfs:
        assert cdn_resolved.vnfd_for(vnf.vnf_id) is not None
        assert cdn_resolved.flavor_for(vnf.vnf_id) is not None


_node = st.sampled_from(list("abcdefgh"))
_edges = st.sets(st.tuples(_node, _node).filter(lambda e: e[0] != e[1]), min_size=1, max_size=14)


@given(_edges)
@settings(max_examples=60, deadline=None)
def test_adjacency_edges_regenerate_from_paths(edges):
    resolved = service_from_edges(sorted(edges))
    regenerated = set()
    for fg in resolved.service.forwarding_graphs:
        for a, b in fg.hops():
            regenerated.add((a.node, b.node))
    assert set(resolved.adjacency) == regenerated == set(edges)
    assert derived_adjacency(resolved.service) == resolved.adjacency
