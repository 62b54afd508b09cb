"""Emulation loop: propagation, scaling, runaway detection, determinism."""

from __future__ import annotations

import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from svcsdk.catalogue import directory_lookup
from svcsdk.descriptors import parse_service_descriptor
from svcsdk.emulator import (
    ABORT_EXHAUSTED,
    ABORT_PLACEMENT_REJECTED,
    ABORT_RUNAWAY,
    EmulationConfig,
    ScaleDecision,
    detect_runaway,
    run_emulation,
)
from svcsdk.infrastructure import load_infrastructure
from svcsdk.model import resolve_references
from svcsdk.traffic import constant_trace, load_trace, step_trace

SMALL_INFRA = """
pops:
  - {id: only, zone: core, cpu_cores: 3, memory_mb: 4096, storage_gb: 50}
"""

BIG_POP = """
pops:
  - {id: big, zone: core, cpu_cores: 8, memory_mb: 32768, storage_gb: 500}
"""


def _router_stats(log):
    return [(r["tick"], r["vnfs"]["router"]) for r in log.of_kind("tick")]


def test_low_constant_load_never_scales_or_drops(elastic_resolved, infra_4pop):
    trace = constant_trace("client", 1000.0, 60)
    log, state = run_emulation(elastic_resolved, infra_4pop, trace, EmulationConfig())
    assert not log.of_kind("scale_request")
    assert all(st["packet_loss_ratio"] == 0.0 for _, st in _router_stats(log))
    assert state.abort_reason is None


def test_step_trace_scales_out_and_recovers(elastic_resolved, infra_4pop, step_trace):
    # Closed form: one 5000 Mbit/s instance saturates at the 9000 step; two
    # instances give 10000 >= 9000, so loss is confined to the reaction window.
    log, state = run_emulation(elastic_resolved, infra_4pop, step_trace, EmulationConfig())
    requests = log.of_kind("scale_request")
    assert requests and requests[0]["tick"] == 55  # first decision after the step
    assert requests[0]["target_instances"] == 2
    effective = requests[0]["effective_tick"]
    assert effective == 55 + 3
    lossy = {t for t, st in _router_stats(log) if st["packet_loss_ratio"] > 0}
    assert min(lossy) == 50
    assert max(lossy) == effective  # the new instance serves from the next tick
    assert all(st["packet_loss_ratio"] == 0.0 for t, st in _router_stats(log) if t > effective)
    assert all(
        st["packet_loss_ratio"] < 0.01 for t, st in _router_stats(log) if t >= effective + 5
    )
    assert state.abort_reason is None


def test_step_trace_raises_a_loss_alarm(elastic_resolved, infra_4pop, step_trace):
    log, _ = run_emulation(elastic_resolved, infra_4pop, step_trace, EmulationConfig())
    alarms = log.of_kind("alarm")
    assert len(alarms) == 1
    assert alarms[0]["vnf_id"] == "router"
    assert alarms[0]["tick"] == 54  # loss from tick 50 held for duration_s=5


def test_sine_trace_rises_and_falls_losslessly(elastic_resolved, infra_4pop, sine_trace):
    log, state = run_emulation(elastic_resolved, infra_4pop, sine_trace, EmulationConfig())
    counts = [r["vnfs"]["router"]["instance_count"] for r in log.of_kind("tick")]
    assert max(counts) >= 2 and counts[-1] == 1  # scaled out with load, back in after
    assert all(st["packet_loss_ratio"] < 0.01 for _, st in _router_stats(log))
    assert state.abort_reason is None


def test_flow_conservation_and_throughput_bound(elastic_resolved, infra_4pop, sine_trace):
    log, _ = run_emulation(elastic_resolved, infra_4pop, sine_trace, EmulationConfig())
    for record in log.of_kind("tick"):
        for st in record["vnfs"].values():
            offered, forwarded, dropped = st["offered_mbps"], st["forwarded_mbps"], st["dropped_mbps"]
            assert math.isclose(forwarded + dropped, offered, rel_tol=1e-9, abs_tol=1e-9)
            capacity = st["instance_count"] * 5000.0
            assert forwarded <= capacity + 1e-9


def test_per_pop_allocation_never_exceeds_capacity(elastic_resolved, infra_4pop, sine_trace):
    log, _ = run_emulation(elastic_resolved, infra_4pop, sine_trace, EmulationConfig())
    capacities = {p.id: p.cpu_cores for p in infra_4pop.pops}
    placement: dict[str, str] = {}
    cores_of: dict[str, int] = {}
    for record in log.records:
        if record["event"] == "deploy":
            placement = dict(record["placement"])
        elif record["event"] == "placement_update":
            placement = dict(record["assignments"])
        elif record["event"] == "tick":
            used: dict[str, int] = {}
            for vnf_id, st in record["vnfs"].items():
                cores_of[vnf_id] = st["cpu_cores"]
                for iid in st["instances"]:
                    used[placement[iid]] = used.get(placement[iid], 0) + st["cpu_cores"]
            for pop, cores in used.items():
                assert cores <= capacities[pop], f"tick {record['tick']}: {pop} over capacity"


def test_two_runs_are_byte_identical(elastic_resolved, infra_4pop, sine_trace):
    log1, _ = run_emulation(elastic_resolved, infra_4pop, sine_trace, EmulationConfig())
    log2, _ = run_emulation(elastic_resolved, infra_4pop, sine_trace, EmulationConfig())
    assert log1.to_jsonl() == log2.to_jsonl()


def test_policy_none_keeps_instances_constant(elastic_resolved, infra_4pop, step_trace):
    log, _ = run_emulation(
        elastic_resolved, infra_4pop, step_trace, EmulationConfig(policy_override="none")
    )
    counts = {r["vnfs"]["router"]["instance_count"] for r in log.of_kind("tick")}
    assert counts == {1}
    assert not log.of_kind("scale_request")


def test_doubling_plugin_is_aborted_by_the_third_decision(fixtures_dir, infra_4pop, step_trace, elastic_dir):
    nsd = parse_service_descriptor((elastic_dir / "nsd-doubling.yaml").read_text())
    resolved = resolve_references(nsd, directory_lookup(elastic_dir))
    log, state = run_emulation(
        resolved, infra_4pop, step_trace, EmulationConfig(plugin_root=fixtures_dir)
    )
    assert state.abort_reason == ABORT_RUNAWAY
    requests = log.of_kind("scale_request")
    assert [r["target_instances"] for r in requests] == [2, 4, 8]
    assert log.of_kind("abort")[0]["tick"] == requests[-1]["tick"]


def test_overcommitting_placement_plugin_is_rejected_before_any_tick(
    fixtures_dir, cdn_dir, infra_4pop, step_trace
):
    nsd = parse_service_descriptor((cdn_dir / "nsd-overcommit.yaml").read_text())
    resolved = resolve_references(nsd, directory_lookup(cdn_dir))
    log, state = run_emulation(
        resolved, infra_4pop, step_trace, EmulationConfig(plugin_root=fixtures_dir)
    )
    assert state.abort_reason == ABORT_PLACEMENT_REJECTED
    assert not log.of_kind("tick")
    assert not log.of_kind("deploy")


def test_valid_placement_plugin_runs_the_service(fixtures_dir, cdn_dir, infra_4pop):
    text = (cdn_dir / "nsd-overcommit.yaml").read_text().replace("plugins/overcommit", "plugins/allcloud")
    nsd = parse_service_descriptor(text)
    resolved = resolve_references(nsd, directory_lookup(cdn_dir))
    trace = constant_trace("client", 1000.0, 20)
    log, state = run_emulation(
        resolved, infra_4pop, trace, EmulationConfig(plugin_root=fixtures_dir)
    )
    assert state.abort_reason is None
    deploy = log.of_kind("deploy")[0]
    assert set(deploy["placement"].values()) == {"cloud-1"}


def test_vertical_scaling_plugin_grows_the_flavor(fixtures_dir, elastic_dir):
    text = (elastic_dir / "nsd-doubling.yaml").read_text().replace(
        "{path: plugins/doubling, entry: double.py, protocol_version: \"1\"}",
        "{path: plugins/vertical, entry: grow.py, protocol_version: \"1\"}",
    )
    resolved = resolve_references(parse_service_descriptor(text), directory_lookup(elastic_dir))
    infra = load_infrastructure(BIG_POP)
    trace = constant_trace("client", 1000.0, 20)
    log, state = run_emulation(resolved, infra, trace, EmulationConfig(plugin_root=fixtures_dir))
    applied = log.of_kind("scale_applied")
    assert applied and applied[0]["kind"] == "vertical" and applied[0]["flavor"] == "large"
    assert state.instances["router"][0].flavor.name == "large"
    flavors = [r["vnfs"]["router"]["flavor"] for r in log.of_kind("tick")]
    assert flavors[0] == "medium" and flavors[-1] == "large"


def test_strict_mode_aborts_when_scale_out_cannot_be_placed(elastic_resolved, step_trace):
    infra = load_infrastructure(SMALL_INFRA)  # one 3-core PoP: no room for a second router
    log, state = run_emulation(elastic_resolved, infra, step_trace, EmulationConfig(strict=True))
    assert state.abort_reason == ABORT_EXHAUSTED
    assert log.of_kind("abort")[0]["reason"] == ABORT_EXHAUSTED


def test_non_strict_mode_keeps_running_at_current_size(elastic_resolved, step_trace):
    infra = load_infrastructure(SMALL_INFRA)
    log, state = run_emulation(elastic_resolved, infra, step_trace, EmulationConfig(strict=False))
    assert state.abort_reason is None
    assert len(log.of_kind("tick")) == 120
    counts = {r["vnfs"]["router"]["instance_count"] for r in log.of_kind("tick")}
    assert counts == {1}


def test_detect_runaway_doubling_sequence():
    # Direct simulation of the doubling requests against the growth rule.
    history: list[ScaleDecision] = []
    aborted_at = None
    count = 1
    for decision in range(1, 6):
        history.append(
            ScaleDecision(
                vnf_id="r",
                prior_instances=count,
                target_instances=count * 2,
                requested_cpu_cores=count * 2,
                max_instances=64,
                max_total_cpu_cores=256,
            )
        )
        if detect_runaway(history) is not None:
            aborted_at = decision
            break
        count *= 2
    assert aborted_at == 3


def test_detect_runaway_max_instances_bound():
    history = [
        ScaleDecision(
            vnf_id="r",
            prior_instances=60,
            target_instances=65,
            requested_cpu_cores=65,
            max_instances=64,
            max_total_cpu_cores=None,
        )
    ]
    reason = detect_runaway(history)
    assert reason is not None and "max_instances" in reason


def test_detect_runaway_core_bound():
    history = [
        ScaleDecision(
            vnf_id="r",
            prior_instances=2,
            target_instances=3,
            requested_cpu_cores=300,
            max_instances=None,
            max_total_cpu_cores=256,
        )
    ]
    reason = detect_runaway(history)
    assert reason is not None and "max_total_cpu_cores" in reason


def test_detect_runaway_quiet_on_steady_state(elastic_resolved, infra_4pop):
    trace = constant_trace("client", 6000.0, 1000)  # steady two-instance service
    log, state = run_emulation(elastic_resolved, infra_4pop, trace, EmulationConfig())
    assert state.abort_reason is None
    counts = [r["vnfs"]["router"]["instance_count"] for r in log.of_kind("tick")]
    assert counts[-1] == 2
    assert counts[-400:] == [2] * 400


def test_additive_growth_never_trips_the_factor_rule():
    history = []
    for n in range(1, 30):
        history.append(
            ScaleDecision(
                vnf_id="r",
                prior_instances=n,
                target_instances=n + 1,
                requested_cpu_cores=(n + 1) * 2,
                max_instances=None,
                max_total_cpu_cores=None,
            )
        )
        assert detect_runaway(history) is None or n == 1  # only 1->2 doubles, streak never reaches 3


@given(st.floats(min_value=200.0, max_value=24000.0))
@settings(max_examples=25, deadline=None)
def test_threshold_policy_never_oscillates_on_constant_load(elastic_resolved, infra_4pop, load):
    # Hysteresis invariant: under constant load the instance count ramps in
    # one direction and settles; an out request is never followed by an in
    # request (and vice versa). Exact-boundary loads are excluded.
    for n in range(1, 8):
        assume(abs(load / (5000.0 * n) - 0.75) > 1e-6)
        assume(abs(load / (5000.0 * n) - 0.3) > 1e-6)
    trace = constant_trace("client", load, 150)
    log, _ = run_emulation(elastic_resolved, infra_4pop, trace, EmulationConfig())
    directions = []
    for request in log.of_kind("scale_request"):
        directions.append(request["target_instances"] - request["current_instances"])
    assert all(d > 0 for d in directions) or all(d < 0 for d in directions) or not directions
