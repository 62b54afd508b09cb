#!/usr/bin/env python3
"""Scaling plugin that upgrades its VNF to the "large" flavor and then idles."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    if req.get("type") == "scale_request" and req.get("current_flavor") != "large":
        resp = {"type": "scale_decision", "target_flavor": "large"}
    else:
        resp = {"type": "no_op"}
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()
