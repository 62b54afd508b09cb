"""Traffic traces: offered load per service endpoint over simulated time.

CSV format (bit-exact header): ``tick,cp,offered_mbps``. Ticks must be
strictly increasing per connection point; a value holds until the next
sample, so sparse traces are fine.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from svcsdk.errors import ParseError, SchemaError

TRACE_HEADER = "tick,cp,offered_mbps"


@dataclass(frozen=True)
class TrafficTrace:
    samples: dict[str, tuple[tuple[int, float], ...]]  # cp -> ((tick, mbps), ...)

    @property
    def duration(self) -> int:
        """Number of ticks covered: one past the last sampled tick."""
        last = -1
        for series in self.samples.values():
            if series:
                last = max(last, series[-1][0])
        return last + 1

    def offered(self, cp: str, tick: int) -> float:
        series = self.samples.get(cp, ())
        ticks = [t for t, _ in series]
        idx = bisect.bisect_right(ticks, tick) - 1
        return series[idx][1] if idx >= 0 else 0.0

    def connection_points(self) -> list[str]:
        return sorted(self.samples)


def load_trace(text: str) -> TrafficTrace:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TRACE_HEADER:
        raise ParseError(f"trace header must be {TRACE_HEADER!r}", line=1, column=1)
    samples: dict[str, list[tuple[int, float]]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 3:
            raise ParseError("expected 3 comma-separated fields", line=lineno, column=1)
        try:
            tick = int(parts[0])
            mbps = float(parts[2])
        except ValueError as exc:
            raise ParseError(f"bad number: {exc}", line=lineno, column=1) from exc
        cp = parts[1].strip()
        if not cp:
            raise ParseError("empty connection point", line=lineno, column=2)
        if mbps < 0:
            raise SchemaError(f"/{lineno}", "offered_mbps must be >= 0")
        series = samples.setdefault(cp, [])
        if series and tick <= series[-1][0]:
            raise SchemaError(f"/{lineno}", f"tick {tick} not strictly increasing for {cp!r}")
        series.append((tick, mbps))
    return TrafficTrace(samples={cp: tuple(s) for cp, s in samples.items()})


def constant_trace(cp: str, mbps: float, ticks: int) -> TrafficTrace:
    return TrafficTrace(samples={cp: tuple((t, mbps) for t in range(ticks))})


def step_trace(cp: str, before: float, after: float, step_tick: int, ticks: int) -> TrafficTrace:
    values = tuple((t, before if t < step_tick else after) for t in range(ticks))
    return TrafficTrace(samples={cp: values})
