#!/usr/bin/env python3
"""Placement plugin that pins every instance to the last (largest) PoP."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    if req.get("type") == "place_request":
        last = req["infrastructure"]["pops"][-1]["id"]
        instances = [i for vnf in req["service"]["vnfs"] for i in vnf["instances"]]
        resp = {"type": "placement", "assignments": {i: last for i in instances}}
    else:
        resp = {"type": "no_op"}
    sys.stdout.write(json.dumps(resp) + "\n")
    sys.stdout.flush()
