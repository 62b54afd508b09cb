"""Metric ingestion, alarm evaluation and VNF performance profiling.

The profile model is saturating-linear: sat(c) = min(a*c + b, L) with a in
Mbit/s per core and an optional plateau L. Saturation per resource config is
taken from overload samples only (offered > achieved); below saturation the
achieved rate just tracks the offered rate and says nothing about capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from svcsdk.errors import Infeasible, InsufficientData, ParseError, RangeError

METRIC_CSV_HEADER = "tick,vnf_id,cpu_cores,offered_mbps,achieved_mbps,packet_loss_ratio,cpu_utilization"

#: Linear verdict threshold on the linear segment's coefficient of determination.
R_SQUARED_LINEAR = 0.95

#: Marginal-gain collapse ratio for the sublinear verdict: each successive
#: per-step gain must shrink by more than this fraction.
SUBLINEAR_DECAY = 0.10


@dataclass(frozen=True)
class MetricRecord:
    tick: int
    vnf_id: str
    cpu_cores: int
    offered_mbps: float
    achieved_mbps: float
    packet_loss_ratio: float
    cpu_utilization: float

    @property
    def overloaded(self) -> bool:
        return self.offered_mbps > self.achieved_mbps


@dataclass(frozen=True)
class MetricSeries:
    records: tuple[MetricRecord, ...]

    @classmethod
    def of(cls, records) -> MetricSeries:
        ordered = sorted(records, key=lambda r: (r.vnf_id, r.tick, r.cpu_cores))
        return cls(records=tuple(ordered))

    def vnf_ids(self) -> list[str]:
        return sorted({r.vnf_id for r in self.records})

    def for_vnf(self, vnf_id: str) -> list[MetricRecord]:
        return [r for r in self.records if r.vnf_id == vnf_id]

    def merged(self, other: MetricSeries) -> MetricSeries:
        return MetricSeries.of(self.records + other.records)


def _check_record(rec: MetricRecord, where: str):
    if not 0.0 <= rec.packet_loss_ratio <= 1.0:
        raise RangeError(f"{where}: packet_loss_ratio {rec.packet_loss_ratio} outside [0, 1]")
    if rec.achieved_mbps > rec.offered_mbps + 1e-9:
        raise RangeError(f"{where}: achieved_mbps {rec.achieved_mbps} exceeds offered {rec.offered_mbps}")


def ingest_metrics(text: str) -> MetricSeries:
    """Parse the metric CSV; rows come out sorted by (vnf_id, tick)."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != METRIC_CSV_HEADER:
        raise ParseError(f"metric header must be {METRIC_CSV_HEADER!r}", line=1, column=1)
    records: list[MetricRecord] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 7:
            raise ParseError("expected 7 comma-separated fields", line=lineno, column=1)
        try:
            rec = MetricRecord(
                tick=int(parts[0]),
                vnf_id=parts[1].strip(),
                cpu_cores=int(parts[2]),
                offered_mbps=float(parts[3]),
                achieved_mbps=float(parts[4]),
                packet_loss_ratio=float(parts[5]),
                cpu_utilization=float(parts[6]),
            )
        except ValueError as exc:
            raise ParseError(f"bad field: {exc}", line=lineno, column=1) from exc
        _check_record(rec, f"row {lineno}")
        records.append(rec)
    return MetricSeries.of(records)


def series_to_csv(series: MetricSeries) -> str:
    lines = [METRIC_CSV_HEADER]
    for r in series.records:
        lines.append(
            f"{r.tick},{r.vnf_id},{r.cpu_cores},{r.offered_mbps:g},{r.achieved_mbps:g},"
            f"{r.packet_loss_ratio:g},{r.cpu_utilization:g}"
        )
    return "\n".join(lines) + "\n"


def metrics_from_event_log(records: list[dict]) -> MetricSeries:
    """Convert emulator tick records into per-instance metric rows, keyed by
    the parent vnf_id so samples from different flavors aggregate per config."""
    rows: list[MetricRecord] = []
    for record in records:
        if record.get("event") != "tick":
            continue
        tick = record["tick"]
        for vnf_id, st in record["vnfs"].items():
            n = st["instance_count"]
            if n <= 0:
                continue
            offered_share = st["offered_mbps"] / n
            for _iid, inst in sorted(st["instances"].items()):
                rows.append(
                    MetricRecord(
                        tick=tick,
                        vnf_id=vnf_id,
                        cpu_cores=st["cpu_cores"],
                        offered_mbps=offered_share,
                        achieved_mbps=min(inst["throughput_mbps"], offered_share),
                        packet_loss_ratio=st["packet_loss_ratio"],
                        cpu_utilization=inst["cpu_utilization"],
                    )
                )
    return MetricSeries.of(rows)


@dataclass(frozen=True)
class SaturationPoint:
    cpu_cores: int
    throughput_mbps: float


@dataclass(frozen=True)
class PerformanceProfile:
    """Fitted saturating-linear capacity model of one VNF."""

    vnf: str
    slope_mbps_per_core: float  # a
    intercept_mbps: float  # b
    plateau_mbps: float | None  # L, absent when no plateau was observed
    points: tuple[SaturationPoint, ...]
    linear_points: int  # leading points fitted by the linear segment
    r_squared: float
    residual_stderr: float

    def sat(self, cpu_cores: float) -> float:
        linear = self.slope_mbps_per_core * cpu_cores + self.intercept_mbps
        return min(linear, self.plateau_mbps) if self.plateau_mbps is not None else linear

    @property
    def linear(self) -> bool:
        return self.r_squared >= R_SQUARED_LINEAR

    @property
    def max_observed_mbps(self) -> float:
        return max(p.throughput_mbps for p in self.points)

    def to_yaml(self) -> str:
        doc = {
            "vnf": self.vnf,
            "model": {
                "a": float(self.slope_mbps_per_core),
                "b": float(self.intercept_mbps),
                "L": None if self.plateau_mbps is None else float(self.plateau_mbps),
            },
            "diagnostics": {
                "r_squared": float(self.r_squared),
                "rse": float(self.residual_stderr),
                "verdict": check_linearity(self),
            },
            "points": [
                {"cpu_cores": p.cpu_cores, "throughput_mbps": float(p.throughput_mbps)}
                for p in self.points
            ],
            "linear_points": self.linear_points,
        }
        return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)

    @classmethod
    def from_yaml(cls, text: str) -> PerformanceProfile:
        doc = yaml.safe_load(text)
        points = tuple(SaturationPoint(p["cpu_cores"], p["throughput_mbps"]) for p in doc["points"])
        return cls(
            vnf=doc["vnf"],
            slope_mbps_per_core=doc["model"]["a"],
            intercept_mbps=doc["model"]["b"],
            plateau_mbps=doc["model"]["L"],
            points=points,
            linear_points=int(doc.get("linear_points", len(points))),
            r_squared=doc["diagnostics"]["r_squared"],
            residual_stderr=doc["diagnostics"]["rse"],
        )


def _ols(points: list[SaturationPoint]) -> tuple[float, float]:
    xs = np.array([p.cpu_cores for p in points], dtype=float)
    ys = np.array([p.throughput_mbps for p in points], dtype=float)
    a, b = np.polyfit(xs, ys, 1)
    if a < 0:
        # Decreasing capacity is not a model this family can express; the
        # anomaly surfaces through check_linearity instead.
        return 0.0, float(np.mean(ys))
    return float(a), float(b)


def _sse(points, predict) -> float:
    return sum((predict(p.cpu_cores) - p.throughput_mbps) ** 2 for p in points)


def fit_profile(series: MetricSeries, vnf_id: str) -> PerformanceProfile:
    """Fit the saturating-linear model from overload samples.

    Per config c the saturation s(c) is the best achieved rate under
    overload. The breakpoint is found by an exhaustive scan: every split into
    a leading linear segment (>= 2 points) and a trailing plateau (>= 2
    points, level = mean) competes with the plain linear fit on total squared
    error. A single trailing point cannot evidence a plateau level and stays
    on the linear side.
    """
    rows = series.for_vnf(vnf_id)
    if not rows:
        raise InsufficientData(f"no samples for vnf {vnf_id!r}")
    by_config: dict[int, list[MetricRecord]] = {}
    for r in rows:
        by_config.setdefault(r.cpu_cores, []).append(r)
    points: list[SaturationPoint] = []
    missing: list[str] = []
    for cores in sorted(by_config):
        overloaded = [r.achieved_mbps for r in by_config[cores] if r.overloaded]
        if overloaded:
            points.append(SaturationPoint(cpu_cores=cores, throughput_mbps=max(overloaded)))
        else:
            missing.append(f"{cores} cores: no overload sample (offered > achieved)")
    if len(points) < 2:
        detail = "; ".join(missing) if missing else "only one resource config sampled"
        raise InsufficientData(
            f"vnf {vnf_id!r} needs >= 2 resource configs with overload samples; {detail}"
        )

    m = len(points)
    candidates: list[tuple[float, int, float, float, float | None]] = []
    a, b = _ols(points)
    candidates.append((_sse(points, lambda c: a * c + b), m, a, b, None))
    for k in range(2, m - 1):
        seg, plateau = points[:k], points[k:]
        a_k, b_k = _ols(seg)
        level = sum(p.throughput_mbps for p in plateau) / len(plateau)
        if a_k * plateau[0].cpu_cores + b_k < level:
            continue  # linear trend never reaches this plateau: inconsistent split
        sse = _sse(seg, lambda c: a_k * c + b_k) + _sse(plateau, lambda _c: level)
        candidates.append((sse, k, a_k, b_k, level))

    sse, k, a, b, plateau_level = min(candidates, key=lambda c: (c[0], -c[1]))
    segment = points[:k]
    seg_sse = _sse(segment, lambda c: a * c + b)
    mean_y = sum(p.throughput_mbps for p in segment) / len(segment)
    sst = sum((p.throughput_mbps - mean_y) ** 2 for p in segment)
    if sst > 0:
        r_squared = 1.0 - seg_sse / sst
    else:
        r_squared = 1.0 if seg_sse == 0 else 0.0
    rse = math.sqrt(seg_sse / (len(segment) - 2)) if len(segment) > 2 else 0.0

    return PerformanceProfile(
        vnf=vnf_id,
        slope_mbps_per_core=a,
        intercept_mbps=b,
        plateau_mbps=plateau_level,
        points=tuple(points),
        linear_points=k,
        r_squared=r_squared,
        residual_stderr=rse,
    )


def check_linearity(p: PerformanceProfile) -> str:
    """Classify the scaling behavior below the plateau.

    anomalous: throughput drops when resources grow (the multi-threading
    defect signature). sublinear: every marginal gain shrinks by more than
    10% step over step, or the linear fit explains less than 95% of the
    variance. linear: otherwise.
    """
    if p.plateau_mbps is not None:
        scope = list(p.points[: p.linear_points + 1])
    else:
        scope = list(p.points)
    for prev, nxt in zip(scope, scope[1:]):
        if nxt.throughput_mbps < prev.throughput_mbps:
            return "anomalous"
    gains = [b.throughput_mbps - a.throughput_mbps for a, b in zip(scope, scope[1:])]
    if len(gains) >= 2 and all(g2 < (1.0 - SUBLINEAR_DECAY) * g1 for g1, g2 in zip(gains, gains[1:])):
        return "sublinear"
    return "linear" if p.linear else "sublinear"


@dataclass(frozen=True)
class CapacityPlan:
    target_mbps: float
    mode: str  # vertical | horizontal
    predicted_mbps: float
    headroom: float
    cpu_cores: int | None = None  # vertical recommendation
    instance_count: int | None = None  # horizontal recommendation


def estimate_capacity(
    p: PerformanceProfile,
    target_mbps: float,
    mode: str,
    per_instance_cores: int | None = None,
) -> CapacityPlan:
    """Plan resources for a target rate.

    vertical: smallest core count whose sat() meets the target (raises
    Infeasible past the plateau). horizontal: instance count at the given
    per-instance config, each instance contributing sat(cores).
    """
    if target_mbps <= 0:
        raise ValueError("target must be positive")
    if mode == "vertical":
        if p.plateau_mbps is not None and p.plateau_mbps < target_mbps:
            raise Infeasible(
                f"target {target_mbps:g} Mbit/s exceeds the plateau {p.plateau_mbps:g} Mbit/s",
                max_achievable_mbps=p.plateau_mbps,
            )
        if p.slope_mbps_per_core <= 0:
            if p.intercept_mbps >= target_mbps:
                cores = 1
            else:
                raise Infeasible(
                    f"flat profile cannot reach {target_mbps:g} Mbit/s",
                    max_achievable_mbps=p.sat(max(pt.cpu_cores for pt in p.points)),
                )
        else:
            cores = max(1, math.ceil((target_mbps - p.intercept_mbps) / p.slope_mbps_per_core))
            while p.sat(cores) < target_mbps:
                cores += 1
        predicted = p.sat(cores)
        return CapacityPlan(
            target_mbps=target_mbps,
            mode=mode,
            predicted_mbps=predicted,
            headroom=predicted / target_mbps,
            cpu_cores=cores,
        )
    if mode == "horizontal":
        if per_instance_cores is None:
            raise ValueError("horizontal mode needs per_instance_cores")
        per_instance = p.sat(per_instance_cores)
        if per_instance <= 0:
            raise Infeasible("per-instance capacity is zero", max_achievable_mbps=0.0)
        count = math.ceil(target_mbps / per_instance)
        predicted = count * per_instance
        return CapacityPlan(
            target_mbps=target_mbps,
            mode=mode,
            predicted_mbps=predicted,
            headroom=predicted / target_mbps,
            instance_count=count,
        )
    raise ValueError(f"unknown mode {mode!r}")


def horizontal_plan(target_mbps: float, per_instance_mbps: float) -> CapacityPlan:
    """Shortcut when the per-instance saturation rate is already known."""
    if per_instance_mbps <= 0:
        raise Infeasible("per-instance capacity is zero", max_achievable_mbps=0.0)
    count = math.ceil(target_mbps / per_instance_mbps)
    predicted = count * per_instance_mbps
    return CapacityPlan(
        target_mbps=target_mbps,
        mode="horizontal",
        predicted_mbps=predicted,
        headroom=predicted / target_mbps,
        instance_count=count,
    )


def predict_scaled_topology(
    p: PerformanceProfile,
    template: str,
    n: int,
    cpu_cores: int,
    front_cap_mbps: float | None = None,
) -> float:
    """Aggregate throughput of a scaled topology before deploying it.

    `front_cap_mbps` caps the dispatcher: the balancer for load-balancer
    topologies, the hub for hub-and-spoke. Full mesh has no dispatcher.
    """
    per_instance = p.sat(cpu_cores)
    aggregate = n * per_instance
    if template in ("load-balancer", "hub-and-spoke") and front_cap_mbps is not None:
        return min(aggregate, front_cap_mbps)
    if template not in ("load-balancer", "hub-and-spoke", "full-mesh"):
        raise ValueError(f"unknown template {template!r}")
    return aggregate


@dataclass(frozen=True)
class AlarmRule:
    metric: str
    vnf_id: str
    comparator: str  # > | <
    threshold: float
    duration_s: int

    def violated(self, value: float) -> bool:
        return value > self.threshold if self.comparator == ">" else value < self.threshold


@dataclass(frozen=True)
class AlarmEvent:
    rule: AlarmRule
    start_tick: int
    duration_s: int


def evaluate_alarms(series: MetricSeries, rules: list[AlarmRule]) -> list[AlarmEvent]:
    """One event per maximal window where a rule's comparator holds on every
    consecutive tick for at least the rule's duration. Ticks are one second;
    a gap in the tick sequence breaks the window."""
    events: list[AlarmEvent] = []
    for rule in rules:
        rows = [r for r in series.for_vnf(rule.vnf_id)]
        values: dict[int, float] = {}
        for r in rows:
            value = getattr(r, rule.metric)
            values[r.tick] = max(values.get(r.tick, value), value) if rule.comparator == ">" else min(
                values.get(r.tick, value), value
            )
        start: int | None = None
        length = 0
        previous: int | None = None
        for tick in sorted(values):
            contiguous = previous is not None and tick == previous + 1
            if rule.violated(values[tick]):
                if start is not None and contiguous:
                    length += 1
                else:
                    if start is not None and length >= rule.duration_s:
                        events.append(AlarmEvent(rule=rule, start_tick=start, duration_s=length))
                    start, length = tick, 1
            else:
                if start is not None and length >= rule.duration_s:
                    events.append(AlarmEvent(rule=rule, start_tick=start, duration_s=length))
                start, length = None, 0
            previous = tick
        if start is not None and length >= rule.duration_s:
            events.append(AlarmEvent(rule=rule, start_tick=start, duration_s=length))
    events.sort(key=lambda e: (e.rule.vnf_id, e.rule.metric, e.start_tick))
    return events
