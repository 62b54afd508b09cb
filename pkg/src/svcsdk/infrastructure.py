"""Multi-PoP infrastructure model for the sandbox MANO."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import yaml

from svcsdk.errors import ParseError, SchemaError

ZONES = ("edge", "core", "cloud")


@dataclass(frozen=True)
class PoP:
    id: str
    zone: str  # edge | core | cloud
    cpu_cores: int
    memory_mb: int
    storage_gb: int


@dataclass(frozen=True)
class InterPopLink:
    a: str
    b: str
    bandwidth_mbps: float
    latency_ms: float


@dataclass(frozen=True)
class InfrastructureModel:
    pops: tuple[PoP, ...]
    inter_pop_links: tuple[InterPopLink, ...]

    def pop(self, pop_id: str) -> PoP | None:
        for p in self.pops:
            if p.id == pop_id:
                return p
        return None

    def route(self, src: str, dst: str, min_bandwidth_mbps: float) -> float | None:
        """Lowest-latency route between PoPs over links with enough bandwidth;
        returns the total latency in ms, or None when unroutable. Links are
        bidirectional; a PoP reaches itself at zero latency."""
        if src == dst:
            return 0.0
        neighbors: dict[str, list[tuple[str, float]]] = {p.id: [] for p in self.pops}
        for link in self.inter_pop_links:
            if link.bandwidth_mbps >= min_bandwidth_mbps:
                neighbors[link.a].append((link.b, link.latency_ms))
                neighbors[link.b].append((link.a, link.latency_ms))
        best: dict[str, float] = {src: 0.0}
        queue: list[tuple[float, str]] = [(0.0, src)]
        while queue:
            cost, node = heapq.heappop(queue)
            if node == dst:
                return cost
            if cost > best.get(node, float("inf")):
                continue
            for nxt, latency in neighbors.get(node, []):
                alt = cost + latency
                if alt < best.get(nxt, float("inf")):
                    best[nxt] = alt
                    heapq.heappush(queue, (alt, nxt))
        return None

    def to_doc(self) -> dict:
        return {
            "pops": [vars(p) for p in self.pops],
            "inter_pop_links": [vars(l) for l in self.inter_pop_links],
        }


def load_infrastructure(text: str) -> InfrastructureModel:
    """Parse and validate an infrastructure YAML document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(
            f"malformed YAML: {exc.problem or exc}",
            mark.line + 1 if mark else None,
            mark.column + 1 if mark else None,
        ) from exc
    if not isinstance(doc, dict):
        raise SchemaError("/", "document must be a mapping")
    unknown = sorted(k for k in doc if k not in ("pops", "inter_pop_links"))
    if unknown:
        raise SchemaError(f"/{unknown[0]}", "unknown key")
    raw_pops = doc.get("pops")
    if not isinstance(raw_pops, list) or not raw_pops:
        raise SchemaError("/pops", "at least one PoP is required")

    pops: list[PoP] = []
    seen: set[str] = set()
    for i, item in enumerate(raw_pops):
        path = f"/pops/{i}"
        if not isinstance(item, dict):
            raise SchemaError(path, "expected mapping")
        for key in ("id", "zone", "cpu_cores", "memory_mb", "storage_gb"):
            if key not in item:
                raise SchemaError(f"{path}/{key}", "required key missing")
        if item["zone"] not in ZONES:
            raise SchemaError(f"{path}/zone", f"must be one of {', '.join(ZONES)}")
        if item["id"] in seen:
            raise SchemaError(f"{path}/id", f"duplicate pop id {item['id']!r}")
        seen.add(item["id"])
        for key in ("cpu_cores", "memory_mb", "storage_gb"):
            if not isinstance(item[key], int) or isinstance(item[key], bool) or item[key] <= 0:
                raise SchemaError(f"{path}/{key}", "must be a positive integer")
        pops.append(
            PoP(
                id=str(item["id"]),
                zone=item["zone"],
                cpu_cores=item["cpu_cores"],
                memory_mb=item["memory_mb"],
                storage_gb=item["storage_gb"],
            )
        )

    links: list[InterPopLink] = []
    for i, item in enumerate(doc.get("inter_pop_links") or []):
        path = f"/inter_pop_links/{i}"
        if not isinstance(item, dict):
            raise SchemaError(path, "expected mapping")
        for key in ("a", "b", "bandwidth_mbps", "latency_ms"):
            if key not in item:
                raise SchemaError(f"{path}/{key}", "required key missing")
        for end in ("a", "b"):
            if item[end] not in seen:
                raise SchemaError(f"{path}/{end}", f"references unknown pop {item[end]!r}")
        bw = item["bandwidth_mbps"]
        latency = item["latency_ms"]
        if not isinstance(bw, (int, float)) or isinstance(bw, bool) or bw <= 0:
            raise SchemaError(f"{path}/bandwidth_mbps", "must be a positive number")
        if not isinstance(latency, (int, float)) or isinstance(latency, bool) or latency < 0:
            raise SchemaError(f"{path}/latency_ms", "must be a non-negative number")
        links.append(InterPopLink(a=item["a"], b=item["b"], bandwidth_mbps=float(bw), latency_ms=float(latency)))

    return InfrastructureModel(pops=tuple(pops), inter_pop_links=tuple(links))
