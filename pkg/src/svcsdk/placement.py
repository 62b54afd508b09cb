"""NFVO placement: the builtin greedy first-fit and the output checker.

The checker is the verification gate for custom placement plugins: any
assignment adopted from a plugin must pass `check_placement` before the
emulator uses it (the same tooling works standalone for design-time review).
"""

from __future__ import annotations

from dataclasses import dataclass

from svcsdk.errors import NoFeasiblePlacement
from svcsdk.infrastructure import ZONES, InfrastructureModel
from svcsdk.model import ResolvedService, ResourceFlavor
from svcsdk.validation import SEVERITY_ERROR, Issue, ValidationReport

PLACEMENT_CAPACITY = "PLACEMENT_CAPACITY"
PLACEMENT_UNROUTABLE = "PLACEMENT_UNROUTABLE"
PLACEMENT_LATENCY = "PLACEMENT_LATENCY"
PLACEMENT_MISSING = "PLACEMENT_MISSING"
PLACEMENT_INVALID_POP = "PLACEMENT_INVALID_POP"


@dataclass(frozen=True)
class Instance:
    """One running copy of a VNF; ids follow ``<vnf_id>-<k>`` with k >= 1."""

    id: str
    vnf_id: str
    flavor: ResourceFlavor


def _zone_preference(hint: str | None) -> tuple[str, ...]:
    if hint in ZONES:
        return (hint, *(z for z in ZONES if z != hint))
    return ZONES


class CapacityLedger:
    """Remaining per-PoP resources as instances come and go."""

    def __init__(self, infra: InfrastructureModel):
        self.infra = infra
        self.used: dict[str, list[int]] = {p.id: [0, 0, 0] for p in infra.pops}

    def fits(self, pop_id: str, flavor: ResourceFlavor) -> bool:
        pop = self.infra.pop(pop_id)
        if pop is None:
            return False
        used = self.used[pop_id]
        return (
            used[0] + flavor.cpu_cores <= pop.cpu_cores
            and used[1] + flavor.memory_mb <= pop.memory_mb
            and used[2] + flavor.storage_gb <= pop.storage_gb
        )

    def take(self, pop_id: str, flavor: ResourceFlavor):
        used = self.used[pop_id]
        used[0] += flavor.cpu_cores
        used[1] += flavor.memory_mb
        used[2] += flavor.storage_gb
        pop = self.infra.pop(pop_id)
        assert pop is not None
        assert used[0] <= pop.cpu_cores and used[1] <= pop.memory_mb and used[2] <= pop.storage_gb

    def release(self, pop_id: str, flavor: ResourceFlavor):
        used = self.used[pop_id]
        used[0] -= flavor.cpu_cores
        used[1] -= flavor.memory_mb
        used[2] -= flavor.storage_gb

    def overflows(self) -> list[tuple[str, str, int, int]]:
        """(pop, resource, demand, capacity) for every exceeded dimension."""
        out = []
        for pop in self.infra.pops:
            used = self.used[pop.id]
            for idx, (name, cap) in enumerate(
                (("cpu_cores", pop.cpu_cores), ("memory_mb", pop.memory_mb), ("storage_gb", pop.storage_gb))
            ):
                if used[idx] > cap:
                    out.append((pop.id, name, used[idx], cap))
        return out


def first_fit_assign(
    r: ResolvedService,
    infra: InfrastructureModel,
    instances: list[Instance],
    ledger: CapacityLedger,
) -> dict[str, str]:
    """Greedy first-fit: instances in given order, PoPs in zone-preference
    order (VNFD zone hint first, else edge, core, cloud), declaration order
    within a zone. Mutates the ledger. Raises when a PoP cannot be found."""
    assignments: dict[str, str] = {}
    for inst in instances:
        hint = r.vnfd_for(inst.vnf_id).zone_hint
        placed = False
        for zone in _zone_preference(hint):
            for pop in infra.pops:
                if pop.zone != zone:
                    continue
                if ledger.fits(pop.id, inst.flavor):
                    ledger.take(pop.id, inst.flavor)
                    assignments[inst.id] = pop.id
                    placed = True
                    break
            if placed:
                break
        if not placed:
            raise NoFeasiblePlacement(
                f"no PoP can host {inst.id} "
                f"({inst.flavor.cpu_cores} cores, {inst.flavor.memory_mb} MiB, {inst.flavor.storage_gb} GiB)"
            )
    return assignments


def place(
    r: ResolvedService,
    infra: InfrastructureModel,
    instances: list[Instance],
) -> dict[str, str]:
    """Builtin NFVO placement of the given instances on empty infrastructure."""
    return first_fit_assign(r, infra, instances, CapacityLedger(infra))


def check_placement(
    assignments: dict[str, str],
    r: ResolvedService,
    infra: InfrastructureModel,
    instances: list[Instance],
) -> ValidationReport:
    """Verify a placement (typically a custom NFVO's output): per-PoP capacity,
    routability and latency of cross-PoP virtual links, and completeness."""
    issues: list[Issue] = []
    by_id = {i.id: i for i in instances}

    for iid in sorted(assignments):
        if iid not in by_id:
            issues.append(
                Issue(PLACEMENT_MISSING, SEVERITY_ERROR, iid, f"assignment for unknown instance {iid!r}")
            )
        elif infra.pop(assignments[iid]) is None:
            issues.append(
                Issue(
                    PLACEMENT_INVALID_POP,
                    SEVERITY_ERROR,
                    iid,
                    f"{iid!r} assigned to unknown pop {assignments[iid]!r}",
                )
            )
    for inst in instances:
        if inst.id not in assignments:
            issues.append(Issue(PLACEMENT_MISSING, SEVERITY_ERROR, inst.id, f"instance {inst.id!r} unplaced"))
    if issues:
        return ValidationReport.of(issues)

    ledger = CapacityLedger(infra)
    for inst in instances:
        used = ledger.used[assignments[inst.id]]
        used[0] += inst.flavor.cpu_cores
        used[1] += inst.flavor.memory_mb
        used[2] += inst.flavor.storage_gb
    for pop_id, resource, demand, capacity in ledger.overflows():
        issues.append(
            Issue(
                PLACEMENT_CAPACITY,
                SEVERITY_ERROR,
                pop_id,
                f"{resource} demand {demand} exceeds capacity {capacity} on {pop_id!r}",
            )
        )

    pops_of: dict[str, list[str]] = {}
    for inst in instances:
        pops_of.setdefault(inst.vnf_id, []).append(assignments[inst.id])
    for link in r.service.virtual_links:
        ends = link.endpoints
        if ends[0].is_service or ends[1].is_service:
            continue  # the external side of a service endpoint is not placed
        for pop_a in sorted(set(pops_of.get(ends[0].node, []))):
            for pop_b in sorted(set(pops_of.get(ends[1].node, []))):
                latency = infra.route(pop_a, pop_b, link.bandwidth_mbps)
                if latency is None:
                    issues.append(
                        Issue(
                            PLACEMENT_UNROUTABLE,
                            SEVERITY_ERROR,
                            link.id,
                            f"link {link.id!r} ({link.bandwidth_mbps:g} Mbit/s) has no route "
                            f"between {pop_a!r} and {pop_b!r}",
                        )
                    )
                elif link.max_latency_ms is not None and latency > link.max_latency_ms:
                    issues.append(
                        Issue(
                            PLACEMENT_LATENCY,
                            SEVERITY_ERROR,
                            link.id,
                            f"link {link.id!r} needs <= {link.max_latency_ms:g} ms, "
                            f"route {pop_a!r}->{pop_b!r} takes {latency:g} ms",
                        )
                    )
    return ValidationReport.of(issues)
