"""Graphviz DOT export of services and deployments."""

from __future__ import annotations

import re

from svcsdk.dot_export import deployment_to_dot, service_to_dot
from svcsdk.emulator import EmulationConfig, run_emulation
from svcsdk.model import ServiceDescriptor, resolve_references
from svcsdk.traffic import constant_trace


def test_cdn_dot_has_five_vnf_nodes_and_two_endpoints(cdn_resolved):
    dot = service_to_dot(cdn_resolved)
    endpoints = re.findall(r"shape=ellipse", dot)
    assert len(endpoints) == 2
    for vnf in ("dpi-a", "dpi-b", "cache-a", "cache-b", "router"):
        assert f'"{vnf}" [label=' in dot
    assert dot.count(" -> ") == len(cdn_resolved.service.virtual_links)
    assert "5000 Mbit/s" in dot


def test_dot_is_byte_stable(cdn_resolved):
    assert service_to_dot(cdn_resolved) == service_to_dot(cdn_resolved)


def test_empty_service_is_valid_dot():
    service = ServiceDescriptor(name="empty", vendor="t", version="1.0", vnfs=())
    resolved = resolve_references(service, lambda n, v: None)
    dot = service_to_dot(resolved)
    assert dot.startswith("digraph service {")
    assert dot.rstrip().endswith("}")
    assert " -> " not in dot


def test_deployment_dot_clusters_scaled_instances_by_pop(cdn_resolved, infra_4pop):
    trace = constant_trace("client", 12000.0, 40)  # drives the router to 3 instances
    log, _ = run_emulation(cdn_resolved, infra_4pop, trace, EmulationConfig())
    dot = deployment_to_dot(log.records)
    cluster = re.search(r'subgraph "cluster_core-1" \{(.*?)\}', dot, re.S)
    assert cluster is not None
    for instance in ("router-1", "router-2", "router-3"):
        assert instance in cluster.group(1)
    assert deployment_to_dot(log.records) == dot  # stable
