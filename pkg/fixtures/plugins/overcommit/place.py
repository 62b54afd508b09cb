#!/usr/bin/env python3
"""Placement plugin that crams every instance onto the first PoP.

Deliberately defective: it never looks at capacities, so the placement
checker has something to reject.
"""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    if req.get("type") == "place_request":
        first = req["infrastructure"]["pops"][0]["id"]
        instances = [i for vnf in req["service"]["vnfs"] for i in vnf["instances"]]
        resp = {"type": "placement", "assignments": {i: first for i in instances}}
    else:
        resp = {"type": "no_op"}
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()
