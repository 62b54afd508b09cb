from __future__ import annotations

from pathlib import Path

import pytest

from svcsdk.catalogue import directory_lookup
from svcsdk.descriptors import parse_service_descriptor, parse_vnf_descriptor
from svcsdk.infrastructure import load_infrastructure
from svcsdk.model import (
    ConnectionPointDecl,
    CpRef,
    ForwardingGraph,
    PerformanceCap,
    ResolvedService,
    ResourceFlavor,
    ServiceDescriptor,
    VirtualLink,
    VnfDescriptor,
    VnfImage,
    VnfRef,
    resolve_references,
)
from svcsdk.packaging import generate_keypair, load_public_key, load_signing_key
from svcsdk.traffic import load_trace

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def cdn_dir() -> Path:
    return FIXTURES / "cdn"


@pytest.fixture(scope="session")
def elastic_dir() -> Path:
    return FIXTURES / "elastic"


@pytest.fixture(scope="session")
def cdn_resolved(cdn_dir) -> ResolvedService:
    nsd = parse_service_descriptor((cdn_dir / "nsd.yaml").read_text())
    return resolve_references(nsd, directory_lookup(cdn_dir))


@pytest.fixture(scope="session")
def elastic_resolved(elastic_dir) -> ResolvedService:
    nsd = parse_service_descriptor((elastic_dir / "nsd.yaml").read_text())
    return resolve_references(nsd, directory_lookup(elastic_dir))


@pytest.fixture(scope="session")
def balancer_vnfd(cdn_dir) -> VnfDescriptor:
    return parse_vnf_descriptor((cdn_dir / "vnfd-balancer.yaml").read_text())


@pytest.fixture(scope="session")
def infra_4pop():
    return load_infrastructure((FIXTURES / "infra" / "4pop.yaml").read_text())


@pytest.fixture(scope="session")
def step_trace():
    return load_trace((FIXTURES / "traces" / "step.csv").read_text())


@pytest.fixture(scope="session")
def sine_trace():
    return load_trace((FIXTURES / "traces" / "sine.csv").read_text())


@pytest.fixture(scope="session")
def overload_trace():
    return load_trace((FIXTURES / "traces" / "overload.csv").read_text())


@pytest.fixture(scope="session")
def keypair(tmp_path_factory):
    stem = tmp_path_factory.mktemp("keys") / "dev"
    key_path, pub_path = generate_keypair(stem)
    return {
        "key_path": key_path,
        "pub_path": pub_path,
        "key": load_signing_key(key_path),
        "pub": load_public_key(pub_path),
    }


_DIGEST = "0" * 63 + "1"


def vnfd_from_spec(name: str, cps: list[tuple[str, str]], capabilities=(), cap_mbps: float | None = None) -> VnfDescriptor:
    """Minimal VNFD for synthetic graph tests: one 1-core flavor."""
    performance = (PerformanceCap("tiny", cap_mbps),) if cap_mbps is not None else ()
    return VnfDescriptor(
        name=name,
        vendor="test",
        version="1.0",
        image=VnfImage(uri=f"docker://test/{name}", sha256=_DIGEST),
        connection_points=tuple(ConnectionPointDecl(cp, d) for cp, d in cps),
        resource_flavors=(ResourceFlavor("tiny", 1, 128, 1),),
        capabilities=frozenset(capabilities),
        performance=performance,
    )


def service_from_edges(edges: list[tuple[str, str]], steering: set[str] = frozenset()) -> ResolvedService:
    """Synthesize a resolved service whose derived adjacency equals `edges`:
    one VNF per node (in/out connection points), one link and one two-step
    forwarding path per edge."""
    nodes = sorted({n for e in edges for n in e})
    vnfds = {
        node: vnfd_from_spec(
            node,
            [("in", "ingress"), ("out", "egress")],
            capabilities=("traffic-steering",) if node in steering else (),
        )
        for node in nodes
    }
    links = []
    fgs = []
    for i, (u, v) in enumerate(sorted(edges)):
        a, b = CpRef(u, "out"), CpRef(v, "in")
        links.append(VirtualLink(id=f"l{i}", endpoints=(a, b), bandwidth_mbps=100.0))
        fgs.append(ForwardingGraph(id=f"fg{i}", path=(a, b)))
    service = ServiceDescriptor(
        name="synthetic",
        vendor="test",
        version="1.0",
        vnfs=tuple(VnfRef(n, n, "1.0", "tiny") for n in nodes),
        virtual_links=tuple(links),
        forwarding_graphs=tuple(fgs),
    )
    return resolve_references(service, lambda n, v: vnfds.get(n))


def brute_force_cycles(nodes, edges) -> set[tuple[str, ...]]:
    """Independent elementary-cycle oracle: extend every simple path and keep
    walks that close on their first node; canonicalized by smallest-first
    rotation. Exponential, fine for <= 8 nodes."""
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set())
    found: set[tuple[str, ...]] = set()

    def extend(path: list[str]):
        for nxt in adj[path[-1]]:
            if nxt == path[0]:
                rotation = min(range(len(path)), key=lambda i: path[i])
                found.add(tuple(path[rotation:] + path[:rotation]))
            elif nxt not in path:
                extend(path + [nxt])

    for node in adj:
        extend([node])
    return found
