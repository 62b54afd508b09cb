"""Deterministic discrete-time emulation of a service under a minimal MANO.

One run owns its state and advances tick by tick (1 simulated second each):
read offered load, propagate it along the forwarding paths against instance
capacities, record metrics, consult each VNF's manager every decision
interval, apply scheduled scaling actions after their instantiation delay,
enforce plugin bounds and runaway detection, and evaluate alarms. Two runs
with identical inputs produce byte-identical event logs.

Scaled-in instances are removed instantaneously at the effective tick; there
is no drain phase. Virtual-link bandwidth constrains placement, not the
per-tick flow model (only VNF capacities cap traffic).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from svcsdk.errors import NoFeasiblePlacement, PluginError
from svcsdk.infrastructure import InfrastructureModel
from svcsdk.model import BuiltinPolicy, PluginRef, ResolvedService
from svcsdk.placement import CapacityLedger, Instance, check_placement, first_fit_assign
from svcsdk.plugins import PluginHandle
from svcsdk.traffic import TrafficTrace

ABORT_RUNAWAY = "RUNAWAY_SCALING"
ABORT_EXHAUSTED = "RESOURCE_EXHAUSTED"
ABORT_PLACEMENT_REJECTED = "PLACEMENT_REJECTED"

#: Metric entries handed to a plugin VNFM per scale request.
PLUGIN_METRICS_WINDOW = 3


@dataclass
class EmulationConfig:
    decision_interval: int = 5
    instantiation_delay: int = 3  # ticks between a scale request and its effect
    growth_factor: float = 2.0
    growth_streak: int = 3
    strict: bool = False  # abort when a scale-out cannot be placed
    seed: int = 0
    max_ticks: int | None = None
    plugin_root: Path | str | None = None
    plugin_timeout_s: float = 5.0
    policy_override: str | None = None  # "none" disables every VNFM
    vnfm_params: dict[str, dict] = field(default_factory=dict)
    flavor_override: dict[str, str] = field(default_factory=dict)
    profiles: dict[str, object] = field(default_factory=dict)  # vnfd name -> PerformanceProfile

    def __post_init__(self):
        if self.instantiation_delay < 1:
            raise ValueError("instantiation_delay must be >= 1")
        if self.decision_interval < 1:
            raise ValueError("decision_interval must be >= 1")


@dataclass(frozen=True)
class ScalingAction:
    issued_tick: int
    vnf_id: str
    kind: str  # horizontal | vertical
    effective_tick: int
    target_instances: int | None = None
    template: str | None = None
    target_flavor: str | None = None


@dataclass(frozen=True)
class ScaleDecision:
    """One requested scaling decision, as runaway detection sees it."""

    vnf_id: str
    prior_instances: int
    target_instances: int
    requested_cpu_cores: int
    max_instances: int | None = None  # plugin-declared bounds; None for builtins
    max_total_cpu_cores: int | None = None


def detect_runaway(
    history: list[ScaleDecision],
    growth_factor: float = 2.0,
    streak: int = 3,
) -> str | None:
    """Check the latest decision in `history` against the runaway rules:
    (a) instance count above the plugin-declared max_instances, (b) requested
    cores above max_total_cpu_cores, (c) growth by >= `growth_factor` for
    `streak` consecutive decisions of the same VNF."""
    if not history:
        return None
    last = history[-1]
    if last.max_instances is not None and last.target_instances > last.max_instances:
        return (
            f"{last.vnf_id}: requested {last.target_instances} instances, "
            f"plugin bound max_instances={last.max_instances}"
        )
    if last.max_total_cpu_cores is not None and last.requested_cpu_cores > last.max_total_cpu_cores:
        return (
            f"{last.vnf_id}: requested {last.requested_cpu_cores} cpu cores, "
            f"plugin bound max_total_cpu_cores={last.max_total_cpu_cores}"
        )
    chain: list[ScaleDecision] = []
    for decision in reversed(history):
        if decision.vnf_id != last.vnf_id:
            continue
        if decision.prior_instances > 0 and (
            decision.target_instances / decision.prior_instances >= growth_factor
        ):
            chain.append(decision)
            if len(chain) == streak:
                break
        else:
            break
    if len(chain) >= streak:
        # Require compounding growth over the window, so a policy retrying one
        # and the same failed scale-out does not look like an explosion.
        oldest = chain[-1]
        if last.target_instances / oldest.prior_instances >= growth_factor**streak:
            return (
                f"{last.vnf_id}: instance count grew by factor >= {growth_factor:g} "
                f"for {streak} consecutive decisions"
            )
    return None


class EventLog:
    """Append-only run journal; serializes to JSON lines, one record each."""

    def __init__(self):
        self.records: list[dict] = []
        self._seq = 0

    def append(self, tick: int, event: str, **fields) -> dict:
        record = {"event": event, "tick": tick, "seq": self._seq}
        record.update(fields)
        self._seq += 1
        self.records.append(record)
        return record

    def of_kind(self, event: str) -> list[dict]:
        return [r for r in self.records if r["event"] == event]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str) -> EventLog:
        log = cls()
        for line in text.splitlines():
            if line.strip():
                log.records.append(json.loads(line))
        log._seq = len(log.records)
        return log


@dataclass
class VnfTickStats:
    vnf_id: str
    flavor: str
    cpu_cores: int
    instance_ids: list[str]
    capacity_per_instance: float | None  # None = uncapped
    offered_mbps: float = 0.0
    forwarded_mbps: float = 0.0

    @property
    def dropped_mbps(self) -> float:
        return self.offered_mbps - self.forwarded_mbps

    @property
    def packet_loss_ratio(self) -> float:
        return self.dropped_mbps / self.offered_mbps if self.offered_mbps > 0 else 0.0

    @property
    def cpu_utilization(self) -> float:
        if self.capacity_per_instance is None or not self.instance_ids:
            return 0.0
        total = self.capacity_per_instance * len(self.instance_ids)
        return self.forwarded_mbps / total if total > 0 else 0.0

    @property
    def metric_values(self) -> dict[str, float]:
        return {
            "throughput_mbps": self.forwarded_mbps,
            "packet_loss_ratio": self.packet_loss_ratio,
            "cpu_utilization": self.cpu_utilization,
        }


@dataclass
class DeploymentState:
    resolved: ResolvedService
    infra: InfrastructureModel
    config: EmulationConfig
    instances: dict[str, list[Instance]]
    placement: dict[str, str]
    ledger: CapacityLedger
    log: EventLog
    history: list[dict[str, VnfTickStats]] = field(default_factory=list)
    decisions: list[ScaleDecision] = field(default_factory=list)
    abort_reason: str | None = None

    def instance_count(self, vnf_id: str) -> int:
        return len(self.instances[vnf_id])


class _ThresholdPolicy:
    """Builtin VNFM: scale out when mean utilization over the window stays at
    or above `hi` for `decisions` consecutive decision points, in when it
    stays at or below `lo`; one step at a time, never below one instance."""

    def __init__(self, params: dict):
        self.hi = float(params.get("hi", 0.8))
        self.lo = float(params.get("lo", 0.4))
        self.window = int(params.get("window", 3))
        self.decisions = int(params.get("decisions", 1))
        self.template = str(params.get("template", "load-balancer"))
        self.hi_streak = 0
        self.lo_streak = 0

    def decide(self, state: DeploymentState, vnf_id: str) -> dict | None:
        window = [h[vnf_id].cpu_utilization for h in state.history[-self.window:] if vnf_id in h]
        if not window:
            return None
        mean = sum(window) / len(window)
        n = state.instance_count(vnf_id)
        if mean >= self.hi:
            self.hi_streak += 1
            self.lo_streak = 0
            if self.hi_streak >= self.decisions:
                self.hi_streak = 0
                return {"target_instances": n + 1, "template": self.template}
        elif mean <= self.lo:
            self.lo_streak += 1
            self.hi_streak = 0
            if self.lo_streak >= self.decisions and n > 1:
                self.lo_streak = 0
                return {"target_instances": n - 1, "template": self.template}
        else:
            self.hi_streak = 0
            self.lo_streak = 0
        return None


def _capacity_per_instance(r: ResolvedService, config: EmulationConfig, vnf_id: str, flavor) -> float | None:
    vnfd = r.vnfd_for(vnf_id)
    profile = config.profiles.get(vnfd.name)
    if profile is not None:
        return float(profile.sat(flavor.cpu_cores))  # type: ignore[attr-defined]
    return vnfd.performance_cap(flavor.name)


def _service_doc(r: ResolvedService, state_instances: dict[str, list[Instance]]) -> dict:
    vnfs = []
    for vnf in r.service.vnfs:
        flavor = state_instances[vnf.vnf_id][0].flavor if state_instances.get(vnf.vnf_id) else None
        entry = {
            "vnf_id": vnf.vnf_id,
            "vnfd": vnf.vnfd_name,
            "version": vnf.vnfd_version,
            "flavor": flavor.name if flavor else None,
            "cpu_cores": flavor.cpu_cores if flavor else None,
            "memory_mb": flavor.memory_mb if flavor else None,
            "storage_gb": flavor.storage_gb if flavor else None,
            "instances": [i.id for i in state_instances.get(vnf.vnf_id, [])],
        }
        vnfs.append(entry)
    links = [
        {"id": l.id, "endpoints": [str(e) for e in l.endpoints], "bandwidth_mbps": l.bandwidth_mbps}
        for l in r.service.virtual_links
    ]
    return {"name": r.service.name, "vnfs": vnfs, "virtual_links": links}


class _Mano:
    """Bundles the NFVO and per-VNF VNFM controls for one run."""

    def __init__(self, r: ResolvedService, config: EmulationConfig):
        self.r = r
        self.config = config
        self.handles: dict[str, PluginHandle] = {}
        refs = r.service.control_functions
        self.nfvo = refs.nfvo
        self.policies: dict[str, object | None] = {}
        for vnf in r.service.vnfs:
            cf = refs.vnfm_for(vnf.vnf_id)
            if config.policy_override == "none":
                self.policies[vnf.vnf_id] = None
                continue
            if isinstance(cf, BuiltinPolicy):
                params = dict(cf.params)
                params.update(config.vnfm_params.get(vnf.vnf_id, {}))
                if cf.name == "threshold":
                    self.policies[vnf.vnf_id] = _ThresholdPolicy(params)
                elif cf.name == "none":
                    self.policies[vnf.vnf_id] = None
                else:
                    raise PluginError(f"unknown builtin VNFM policy {cf.name!r}")
            else:
                self.policies[vnf.vnf_id] = self._handle(cf)

    def _handle(self, ref: PluginRef) -> PluginHandle:
        if self.config.plugin_root is None:
            raise PluginError(f"plugin {ref.path!r} referenced but no plugin root configured")
        if ref.path not in self.handles:
            self.handles[ref.path] = PluginHandle(
                self.config.plugin_root, ref, timeout_s=self.config.plugin_timeout_s
            )
        return self.handles[ref.path]

    def bounds_for(self, vnf_id: str) -> tuple[int | None, int | None]:
        policy = self.policies.get(vnf_id)
        if isinstance(policy, PluginHandle):
            return policy.max_instances, policy.max_total_cpu_cores
        return None, None

    def close(self):
        for handle in self.handles.values():
            handle.close()


def _paths(r: ResolvedService) -> list[tuple[str, list[str]]]:
    """(fg_id, collapsed node sequence) per forwarding graph, declared order."""
    return [(fg.id, fg.nodes()) for fg in r.service.forwarding_graphs]


def _propagate(
    r: ResolvedService,
    config: EmulationConfig,
    instances: dict[str, list[Instance]],
    loads: dict[str, float],
) -> dict[str, VnfTickStats]:
    stats: dict[str, VnfTickStats] = {}
    pool: dict[str, float] = {}
    for vnf in r.service.vnfs:
        insts = instances[vnf.vnf_id]
        flavor = insts[0].flavor
        cap = _capacity_per_instance(r, config, vnf.vnf_id, flavor)
        stats[vnf.vnf_id] = VnfTickStats(
            vnf_id=vnf.vnf_id,
            flavor=flavor.name,
            cpu_cores=flavor.cpu_cores,
            instance_ids=[i.id for i in insts],
            capacity_per_instance=cap,
        )
        pool[vnf.vnf_id] = math.inf if cap is None else cap * len(insts)

    paths = _paths(r)
    sources: dict[str, int] = {}
    for _fg_id, nodes in paths:
        if nodes and nodes[0].startswith("ns:"):
            sources[nodes[0]] = sources.get(nodes[0], 0) + 1

    for _fg_id, nodes in paths:
        if not nodes or not nodes[0].startswith("ns:"):
            continue  # a path without an external source injects nothing
        cp = nodes[0][len("ns:"):]
        carry = loads.get(cp, 0.0) / sources[nodes[0]]
        for node in nodes[1:]:
            if node.startswith("ns:"):
                continue  # delivery at a service endpoint
            st = stats[node]
            st.offered_mbps += carry
            absorbed = min(carry, pool[node])
            pool[node] -= absorbed
            st.forwarded_mbps += absorbed
            carry = absorbed
    return stats


def _tick_record(stats: dict[str, VnfTickStats], loads: dict[str, float]) -> dict:
    vnfs = {}
    for vnf_id in sorted(stats):
        st = stats[vnf_id]
        n = len(st.instance_ids)
        share = st.forwarded_mbps / n if n else 0.0
        util = st.cpu_utilization
        vnfs[vnf_id] = {
            "flavor": st.flavor,
            "cpu_cores": st.cpu_cores,
            "instance_count": n,
            "offered_mbps": st.offered_mbps,
            "forwarded_mbps": st.forwarded_mbps,
            "dropped_mbps": st.dropped_mbps,
            "packet_loss_ratio": st.packet_loss_ratio,
            "cpu_utilization": util,
            "instances": {iid: {"throughput_mbps": share, "cpu_utilization": util} for iid in st.instance_ids},
        }
    return {"cps": {cp: loads[cp] for cp in sorted(loads)}, "vnfs": vnfs}


def run_emulation(
    r: ResolvedService,
    infra: InfrastructureModel,
    trace: TrafficTrace,
    config: EmulationConfig | None = None,
) -> tuple[EventLog, DeploymentState]:
    """Run the full emulation; returns the event log and final state.

    Aborts (runaway scaling, resource exhaustion under strict mode, plugin
    placement rejected) terminate the run and leave `state.abort_reason` set;
    they are recoverable outcomes, not exceptions. Genuine precondition
    failures (infeasible initial placement, plugin protocol errors) raise.
    """
    config = config or EmulationConfig()
    log = EventLog()
    mano = _Mano(r, config)

    instances: dict[str, list[Instance]] = {}
    for vnf in r.service.vnfs:
        flavor_name = config.flavor_override.get(vnf.vnf_id)
        if flavor_name is None:
            flavor = r.flavor_for(vnf.vnf_id)
        else:
            flavor = r.vnfd_for(vnf.vnf_id).flavor(flavor_name)
            if flavor is None:
                raise NoFeasiblePlacement(f"flavor override {flavor_name!r} unknown for {vnf.vnf_id!r}")
        instances[vnf.vnf_id] = [Instance(id=f"{vnf.vnf_id}-1", vnf_id=vnf.vnf_id, flavor=flavor)]

    ledger = CapacityLedger(infra)
    all_instances = [i for vnf in r.service.vnfs for i in instances[vnf.vnf_id]]
    try:
        if isinstance(mano.nfvo, PluginRef):
            handle = mano._handle(mano.nfvo)
            assignments = handle.place(_service_doc(r, instances), infra.to_doc())
            gate = check_placement(assignments, r, infra, all_instances)
            if not gate.passed:
                log.append(
                    0,
                    "abort",
                    reason=ABORT_PLACEMENT_REJECTED,
                    detail="; ".join(i.message for i in gate.errors),
                )
                state = DeploymentState(
                    resolved=r,
                    infra=infra,
                    config=config,
                    instances=instances,
                    placement={},
                    ledger=ledger,
                    log=log,
                    abort_reason=ABORT_PLACEMENT_REJECTED,
                )
                return log, state
            for inst in all_instances:
                ledger.take(assignments[inst.id], inst.flavor)
            placement = assignments
        else:
            placement = first_fit_assign(r, infra, all_instances, ledger)

        state = DeploymentState(
            resolved=r,
            infra=infra,
            config=config,
            instances=instances,
            placement=placement,
            ledger=ledger,
            log=log,
        )
        log.append(
            0,
            "deploy",
            service=r.service.name,
            seed=config.seed,
            instances={v: [i.id for i in instances[v]] for v in sorted(instances)},
            placement={k: placement[k] for k in sorted(placement)},
            adjacency=[list(edge) for edge in r.adjacency],
        )
        _run_loop(state, mano, trace)
        return log, state
    finally:
        mano.close()


def _run_loop(state: DeploymentState, mano: _Mano, trace: TrafficTrace):
    r, config, log = state.resolved, state.config, state.log
    pending: dict[str, ScalingAction] = {}
    alarm_streaks: dict[int, int] = {}
    ticks = trace.duration if config.max_ticks is None else min(trace.duration, config.max_ticks)

    for tick in range(ticks):
        loads = {cp.id: trace.offered(cp.id, tick) for cp in r.service.service_connection_points}
        stats = _propagate(r, config, state.instances, loads)
        state.history.append(stats)
        log.append(tick, "tick", **_tick_record(stats, loads))

        if tick > 0 and tick % config.decision_interval == 0:
            for vnf in r.service.vnfs:
                if vnf.vnf_id in pending:
                    continue
                action = _decide(state, mano, vnf.vnf_id, tick)
                if action is None:
                    continue
                reason = _register_decision(state, mano, action)
                log.append(
                    tick,
                    "scale_request",
                    vnf_id=action.vnf_id,
                    kind=action.kind,
                    current_instances=state.instance_count(action.vnf_id),
                    target_instances=action.target_instances,
                    target_flavor=action.target_flavor,
                    template=action.template,
                    effective_tick=action.effective_tick,
                )
                if reason is not None:
                    log.append(tick, "abort", reason=ABORT_RUNAWAY, detail=reason)
                    state.abort_reason = ABORT_RUNAWAY
                    return
                pending[action.vnf_id] = action

        due = [a for a in pending.values() if a.effective_tick == tick]
        for action in sorted(due, key=lambda a: a.vnf_id):
            del pending[action.vnf_id]
            if not _apply_action(state, mano, action, tick):
                return

        for idx, spec in enumerate(r.service.monitoring):
            if spec.alarm is None or spec.vnf_id not in stats:
                continue
            value = stats[spec.vnf_id].metric_values[spec.metric]
            if spec.alarm.violated(value):
                alarm_streaks[idx] = alarm_streaks.get(idx, 0) + 1
                if alarm_streaks[idx] == spec.alarm.duration_s:
                    log.append(
                        tick,
                        "alarm",
                        vnf_id=spec.vnf_id,
                        metric=spec.metric,
                        comparator=spec.alarm.comparator,
                        threshold=spec.alarm.threshold,
                        duration_s=spec.alarm.duration_s,
                    )
            else:
                alarm_streaks[idx] = 0


def _decide(state: DeploymentState, mano: _Mano, vnf_id: str, tick: int) -> ScalingAction | None:
    policy = mano.policies.get(vnf_id)
    if policy is None:
        return None
    config = state.config
    n = state.instance_count(vnf_id)
    flavor = state.instances[vnf_id][0].flavor

    if isinstance(policy, PluginHandle):
        window = [
            {"tick": len(state.history) - len(state.history[-3:]) + i, **h[vnf_id].metric_values}
            for i, h in enumerate(state.history[-3:])
        ]
        response = policy.scale(vnf_id, n, flavor.name, window)
        if response.get("type") == "no_op":
            return None
        if "target_instances" in response:
            target = int(response["target_instances"])
            if target < 1:
                raise PluginError(f"plugin for {vnf_id!r} requested target_instances={target}")
            if target == n:
                return None
            return ScalingAction(
                issued_tick=tick,
                vnf_id=vnf_id,
                kind="horizontal",
                effective_tick=tick + config.instantiation_delay,
                target_instances=target,
                template=str(response.get("template", "load-balancer")),
            )
        target_flavor = str(response["target_flavor"])
        if state.resolved.vnfd_for(vnf_id).flavor(target_flavor) is None:
            raise PluginError(f"plugin for {vnf_id!r} requested unknown flavor {target_flavor!r}")
        if target_flavor == flavor.name:
            return None
        return ScalingAction(
            issued_tick=tick,
            vnf_id=vnf_id,
            kind="vertical",
            effective_tick=tick + config.instantiation_delay,
            target_flavor=target_flavor,
        )

    decision = policy.decide(state, vnf_id)
    if decision is None:
        return None
    return ScalingAction(
        issued_tick=tick,
        vnf_id=vnf_id,
        kind="horizontal",
        effective_tick=tick + config.instantiation_delay,
        target_instances=decision["target_instances"],
        template=decision["template"],
    )


def _register_decision(state: DeploymentState, mano: _Mano, action: ScalingAction) -> str | None:
    """Record the request for runaway detection; returns an abort reason."""
    if action.kind != "horizontal":
        return None
    n = state.instance_count(action.vnf_id)
    flavor = state.instances[action.vnf_id][0].flavor
    max_inst, max_cores = mano.bounds_for(action.vnf_id)
    assert action.target_instances is not None
    state.decisions.append(
        ScaleDecision(
            vnf_id=action.vnf_id,
            prior_instances=n,
            target_instances=action.target_instances,
            requested_cpu_cores=action.target_instances * flavor.cpu_cores,
            max_instances=max_inst,
            max_total_cpu_cores=max_cores,
        )
    )
    return detect_runaway(state.decisions, state.config.growth_factor, state.config.growth_streak)


def _place_new(state: DeploymentState, mano: _Mano, new: list[Instance]) -> dict[str, str] | None:
    """Place scale-out instances via the NFVO; None when they do not fit."""
    r, infra = state.resolved, state.infra
    if isinstance(mano.nfvo, PluginRef):
        handle = mano._handle(mano.nfvo)
        proposal = dict(state.instances)
        proposal[new[0].vnf_id] = proposal[new[0].vnf_id] + new
        assignments = handle.place(_service_doc(r, proposal), infra.to_doc())
        combined = dict(state.placement)
        for inst in new:
            if inst.id not in assignments:
                raise PluginError(f"plugin placement misses new instance {inst.id!r}")
            combined[inst.id] = assignments[inst.id]
        all_instances = [i for v in r.service.vnfs for i in proposal[v.vnf_id]]
        gate = check_placement(combined, r, infra, all_instances)
        if not gate.passed:
            return None
        for inst in new:
            state.ledger.take(combined[inst.id], inst.flavor)
        return {inst.id: combined[inst.id] for inst in new}
    try:
        return first_fit_assign(r, infra, new, state.ledger)
    except NoFeasiblePlacement:
        return None


def _apply_action(state: DeploymentState, mano: _Mano, action: ScalingAction, tick: int) -> bool:
    """Apply a due action; False terminates the run (strict-mode abort)."""
    log, config = state.log, state.config
    vnf_id = action.vnf_id
    current = state.instances[vnf_id]

    if action.kind == "horizontal":
        assert action.target_instances is not None
        target = action.target_instances
        if target < len(current):
            for inst in current[target:]:
                state.ledger.release(state.placement[inst.id], inst.flavor)
                del state.placement[inst.id]
            state.instances[vnf_id] = current[:target]
        elif target > len(current):
            flavor = current[0].flavor
            new = [
                Instance(id=f"{vnf_id}-{k}", vnf_id=vnf_id, flavor=flavor)
                for k in range(len(current) + 1, target + 1)
            ]
            placed = _place_new(state, mano, new)
            if placed is None:
                if config.strict:
                    log.append(
                        tick,
                        "abort",
                        reason=ABORT_EXHAUSTED,
                        detail=f"cannot place {len(new)} new instance(s) of {vnf_id!r}",
                    )
                    state.abort_reason = ABORT_EXHAUSTED
                    return False
                log.append(
                    tick,
                    "placement_update",
                    assignments={k: state.placement[k] for k in sorted(state.placement)},
                )
                return True
            state.instances[vnf_id] = current + new
            state.placement.update(placed)
        log.append(
            tick,
            "scale_applied",
            vnf_id=vnf_id,
            kind="horizontal",
            instances=[i.id for i in state.instances[vnf_id]],
            flavor=state.instances[vnf_id][0].flavor.name,
        )
        log.append(
            tick,
            "placement_update",
            assignments={k: state.placement[k] for k in sorted(state.placement)},
        )
        return True

    # vertical: re-flavor every instance in place, respecting PoP capacity
    assert action.target_flavor is not None
    new_flavor = state.resolved.vnfd_for(vnf_id).flavor(action.target_flavor)
    assert new_flavor is not None
    old_flavor = current[0].flavor
    for inst in current:
        state.ledger.release(state.placement[inst.id], old_flavor)
    if all(state.ledger.fits(state.placement[inst.id], new_flavor) for inst in current):
        for inst in current:
            state.ledger.take(state.placement[inst.id], new_flavor)
        state.instances[vnf_id] = [Instance(id=i.id, vnf_id=vnf_id, flavor=new_flavor) for i in current]
        log.append(
            tick,
            "scale_applied",
            vnf_id=vnf_id,
            kind="vertical",
            instances=[i.id for i in state.instances[vnf_id]],
            flavor=new_flavor.name,
        )
        return True
    for inst in current:  # roll back
        state.ledger.take(state.placement[inst.id], old_flavor)
    if config.strict:
        log.append(
            tick,
            "abort",
            reason=ABORT_EXHAUSTED,
            detail=f"cannot grow {vnf_id!r} to flavor {action.target_flavor!r} in place",
        )
        state.abort_reason = ABORT_EXHAUSTED
        return False
    return True
