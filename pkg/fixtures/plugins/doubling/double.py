#!/usr/bin/env python3
"""Scaling plugin that doubles the instance count on every decision.

Deliberately defective: it ignores the monitored metrics, so the sandbox's
runaway detection has something to catch.
"""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    if req.get("type") == "scale_request":
        resp = {
            "type": "scale_decision",
            "target_instances": int(req.get("current_instances", 1)) * 2,
            "template": "load-balancer",
        }
    else:
        resp = {"type": "no_op"}
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()
