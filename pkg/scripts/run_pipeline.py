#!/usr/bin/env python3
"""Full pre-deployment loop over the bundled secure-CDN fixture.

Drives the CLI end to end in a scratch directory: validate the descriptors,
catalogue a VNFD, sign and verify a package, push it into a sandbox
workspace, emulate the pushed service under two resource configurations,
fit a router performance profile from the emulator's metrics, plan capacity,
expand the router through the load-balancer template and re-validate the
expanded graph, then export both topology drawings.

Every stage must exit 0; the first failing stage aborts the run.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
CDN = FIXTURES / "cdn"


def run(stage: str, args: list[str], env: dict) -> None:
    print(f"--- {stage}: svcsdk {' '.join(args)}")
    proc = subprocess.run([sys.executable, "-m", "svcsdk.cli", *args], env=env)
    if proc.returncode != 0:
        print(f"stage {stage!r} failed with exit code {proc.returncode}", file=sys.stderr)
        sys.exit(proc.returncode)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", help="scratch directory (default: a fresh temp dir)")
    opts = parser.parse_args()
    work = Path(opts.workdir) if opts.workdir else Path(tempfile.mkdtemp(prefix="svcsdk-pipeline-"))
    work.mkdir(parents=True, exist_ok=True)

    env = dict(os.environ)
    env["SVCSDK_CATALOGUE"] = str(work / "catalogue")

    run("validate", ["validate", str(CDN / "nsd.yaml"), "--plugins", str(FIXTURES)], env)
    run("catalogue", ["catalogue", "add", str(CDN / "vnfd-cache.yaml")], env)
    run("keygen", ["package", "keygen", "--out", str(work / "dev")], env)
    trust = work / "trust"
    trust.mkdir(exist_ok=True)
    (trust / "dev.pub").write_bytes((work / "dev.pub").read_bytes())
    package = work / "secure-cdn.svcpkg"
    run(
        "package-build",
        [
            "package", "build", str(CDN / "nsd.yaml"),
            "--key", str(work / "dev.key"),
            "--plugins", str(FIXTURES),
            "--created-at", "2024-05-01T12:00:00+00:00",
            "-o", str(package),
        ],
        env,
    )
    run("package-verify", ["package", "verify", str(package), "--trust", str(trust)], env)

    workspace = work / "sandbox"
    run("push", ["push", str(package), "--target", f"sandbox:{workspace}", "--trust", str(trust)], env)

    pushed_nsd = workspace / "descriptors" / "nsd.yaml"
    events = {}
    for flavor in ("small", "medium"):
        out = work / f"events-{flavor}.jsonl"
        events[flavor] = out
        run(
            f"emulate-{flavor}",
            [
                "emulate", "--nsd", str(pushed_nsd),
                "--infra", str(FIXTURES / "infra" / "4pop.yaml"),
                "--trace", str(FIXTURES / "traces" / "overload.csv"),
                "--policy", "none",
                "--flavor", f"router={flavor}",
                "--plugins", str(workspace),
                "--out", str(out),
            ],
            env,
        )
    run(
        "emulate-elastic",
        [
            "emulate", "--nsd", str(pushed_nsd),
            "--infra", str(FIXTURES / "infra" / "4pop.yaml"),
            "--trace", str(FIXTURES / "traces" / "step.csv"),
            "--plugins", str(workspace),
            "--out", str(work / "events-elastic.jsonl"),
        ],
        env,
    )

    profile = work / "router-profile.yaml"
    run(
        "profile-fit",
        [
            "profile", "fit",
            "--events", str(events["small"]),
            "--events", str(events["medium"]),
            "--vnf", "router",
            "-o", str(profile),
        ],
        env,
    )
    run(
        "capacity-plan",
        ["profile", "capacity", "--target", "9000", "--profile", str(profile), "--mode", "horizontal", "--cores", "2"],
        env,
    )
    run(
        "predict",
        ["profile", "predict", "--profile", str(profile), "--template", "load-balancer",
         "-n", "2", "--cores", "2", "--balancer-cap", "20000"],
        env,
    )

    expanded = work / "expanded"
    run(
        "expand",
        [
            "catalogue", "expand", str(pushed_nsd),
            "--template", "load-balancer", "--target", "router", "-n", "2",
            "--balancer-vnfd", str(CDN / "vnfd-balancer.yaml"),
            "-o", str(expanded),
        ],
        env,
    )
    run("revalidate-expanded", ["validate", str(expanded / "nsd.yaml")], env)
    run("graph-service", ["graph", str(CDN / "nsd.yaml"), "-o", str(work / "service.dot")], env)
    run("graph-deployment", ["graph", str(work / "events-elastic.jsonl"), "-o", str(work / "deployment.dot")], env)

    print(f"pipeline complete; artifacts under {work}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
