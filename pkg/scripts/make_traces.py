#!/usr/bin/env python3
"""Regenerate the committed traffic traces under fixtures/traces/.

step.csv      1000 Mbit/s for 50 ticks, then 9000 Mbit/s (the elastic-router
              scale-out scenario).
sine.csv      one slow day/night-style cycle between 2000 and 9000 Mbit/s over
              240 ticks; slow enough that threshold scaling keeps up losslessly.
overload.csv  constant 12000 Mbit/s, saturating every router configuration
              (used for benchmarking runs).
"""

import math
from pathlib import Path

TRACES = Path(__file__).resolve().parent.parent / "fixtures" / "traces"


def write(name: str, rows):
    lines = ["tick,cp,offered_mbps"]
    lines += [f"{tick},{cp},{mbps:g}" for tick, cp, mbps in rows]
    (TRACES / name).write_text("\n".join(lines) + "\n")
    print(f"wrote {TRACES / name}")


def main():
    TRACES.mkdir(parents=True, exist_ok=True)

    write("step.csv", [(t, "client", 1000.0 if t < 50 else 9000.0) for t in range(120)])

    rows = []
    for t in range(240):
        offered = 5500.0 - 3500.0 * math.cos(2.0 * math.pi * t / 240.0)
        rows.append((t, "client", round(offered, 1)))
    write("sine.csv", rows)

    write("overload.csv", [(t, "client", 12000.0) for t in range(60)])


if __name__ == "__main__":
    main()
