"""Subprocess plugin protocol: happy paths, crashes, timeouts, bad protocol."""

from __future__ import annotations

import os
import textwrap

import pytest
import yaml

from svcsdk.errors import PluginError
from svcsdk.model import PluginRef
from svcsdk.plugins import PluginHandle


def _make_plugin(root, name, body, protocol="1", entry="main.py"):
    plugin_dir = root / "plugins" / name
    plugin_dir.mkdir(parents=True)
    (plugin_dir / "plugin.yaml").write_text(
        yaml.safe_dump(
            {"entry": entry, "protocol_version": protocol, "max_instances": 8, "max_total_cpu_cores": 32}
        )
    )
    script = plugin_dir / entry
    script.write_text("#!/usr/bin/env python3\n" + textwrap.dedent(body))
    os.chmod(script, 0o755)
    return PluginRef(path=f"plugins/{name}", entry=entry)


ECHO_SCALER = """
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    if req.get("type") == "scale_request":
        out = {"type": "scale_decision", "target_instances": req["current_instances"] + 1,
               "template": "load-balancer"}
    else:
        out = {"type": "no_op"}
    sys.stdout.write(json.dumps(out) + "\\n")
    sys.stdout.flush()
"""


def test_scale_round_trip(tmp_path):
    ref = _make_plugin(tmp_path, "echo", ECHO_SCALER)
    with PluginHandle(tmp_path, ref) as handle:
        response = handle.scale("router", 2, "medium", [{"tick": 1, "cpu_utilization": 0.9}])
        assert response == {"type": "scale_decision", "target_instances": 3, "template": "load-balancer"}
        # the process is reused across requests
        response = handle.scale("router", 3, "medium", [])
        assert response["target_instances"] == 4


def test_fixture_place_plugin(tmp_path, fixtures_dir):
    ref = PluginRef(path="plugins/allcloud", entry="place.py")
    service_doc = {"vnfs": [{"vnf_id": "router", "instances": ["router-1"]}]}
    infra_doc = {"pops": [{"id": "edge-a"}, {"id": "cloud-1"}]}
    with PluginHandle(fixtures_dir, ref) as handle:
        assignments = handle.place(service_doc, infra_doc)
    assert assignments == {"router-1": "cloud-1"}


def test_malformed_response_raises(tmp_path):
    ref = _make_plugin(
        tmp_path,
        "garbage",
        """
import sys
for line in sys.stdin:
    sys.stdout.write("this is not json\\n")
    sys.stdout.flush()
""",
    )
    with PluginHandle(tmp_path, ref) as handle:
        with pytest.raises(PluginError, match="malformed JSON"):
            handle.scale("router", 1, "small", [])


def test_wrong_response_type_raises(tmp_path):
    ref = _make_plugin(
        tmp_path,
        "confused",
        """
import json, sys
for line in sys.stdin:
    sys.stdout.write(json.dumps({"type": "placement", "assignments": {}}) + "\\n")
    sys.stdout.flush()
""",
    )
    with PluginHandle(tmp_path, ref) as handle:
        with pytest.raises(PluginError, match="placement"):
            handle.scale("router", 1, "small", [])


def test_crash_raises(tmp_path):
    ref = _make_plugin(tmp_path, "crash", "import sys\nsys.exit(3)\n")
    with PluginHandle(tmp_path, ref) as handle:
        with pytest.raises(PluginError, match="closed its output|gone"):
            handle.scale("router", 1, "small", [])


def test_timeout_raises(tmp_path):
    ref = _make_plugin(tmp_path, "sleepy", "import time\ntime.sleep(60)\n")
    with PluginHandle(tmp_path, ref, timeout_s=0.3) as handle:
        with pytest.raises(PluginError, match="timed out"):
            handle.scale("router", 1, "small", [])


def test_protocol_mismatch_refused_at_start(tmp_path):
    ref = _make_plugin(tmp_path, "old", ECHO_SCALER, protocol="0")
    with pytest.raises(PluginError, match="protocol"):
        PluginHandle(tmp_path, ref)


def test_manifest_bounds_are_exposed(fixtures_dir):
    handle = PluginHandle(fixtures_dir, PluginRef(path="plugins/doubling", entry="double.py"))
    assert handle.max_instances == 64
    assert handle.max_total_cpu_cores == 256
