"""Subprocess client for external control-function plugins.

Plugins are executables speaking newline-delimited JSON on stdin/stdout, one
request per line, one response per line. A plugin process is started once per
emulation run and reused across requests; any malformed line, wrong response
type, crash or timeout raises `PluginError`.

Wire messages:
    {"type": "place_request", "protocol_version": "1",
     "service": {...}, "infrastructure": {...}}
        -> {"type": "placement", "assignments": {"<instance_id>": "<pop_id>"}}
    {"type": "scale_request", "protocol_version": "1", "vnf_id": ...,
     "current_instances": n, "current_flavor": ..., "metrics": [...]}
        -> {"type": "scale_decision", "target_instances": m, "template": ...}
         | {"type": "scale_decision", "target_flavor": "..."}
         | {"type": "no_op"}
"""

from __future__ import annotations

import json
import select
import subprocess
import time
from pathlib import Path

from svcsdk.errors import PluginError
from svcsdk.model import PLUGIN_PROTOCOL_VERSION, PluginRef
from svcsdk.validation import load_plugin_manifest

DEFAULT_TIMEOUT_S = 5.0


class PluginHandle:
    """One running plugin process plus its manifest-declared bounds."""

    def __init__(self, root: Path | str, ref: PluginRef, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.ref = ref
        self.dir = Path(root) / ref.path
        self.timeout_s = timeout_s
        manifest = load_plugin_manifest(self.dir)
        if manifest is None:
            raise PluginError(f"plugin manifest missing under {self.dir}")
        self.entry = self.dir / str(manifest.get("entry", ref.entry))
        if str(manifest.get("protocol_version")) != PLUGIN_PROTOCOL_VERSION:
            raise PluginError(
                f"plugin {ref.path!r} speaks protocol {manifest.get('protocol_version')!r}, "
                f"expected {PLUGIN_PROTOCOL_VERSION!r}"
            )
        self.max_instances = manifest.get("max_instances")
        self.max_total_cpu_cores = manifest.get("max_total_cpu_cores")
        self._proc: subprocess.Popen | None = None

    def _ensure_started(self):
        if self._proc is not None and self._proc.poll() is None:
            return
        if not self.entry.is_file():
            raise PluginError(f"plugin entry point {self.entry} missing")
        try:
            self._proc = subprocess.Popen(
                [str(self.entry.resolve())],
                cwd=self.dir,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise PluginError(f"cannot start plugin {self.entry}: {exc}") from exc

    def request(self, payload: dict) -> dict:
        """Send one request line and wait for one response line."""
        self._ensure_started()
        proc = self._proc
        assert proc is not None and proc.stdin is not None and proc.stdout is not None
        line = json.dumps(payload, sort_keys=True) + "\n"
        try:
            proc.stdin.write(line.encode("utf-8"))
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise PluginError(f"plugin {self.ref.path!r} is gone: {exc}") from exc

        deadline = time.monotonic() + self.timeout_s
        buf = b""
        while not buf.endswith(b"\n"):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise PluginError(f"plugin {self.ref.path!r} timed out after {self.timeout_s:g}s")
            ready, _, _ = select.select([proc.stdout], [], [], remaining)
            if not ready:
                continue
            chunk = proc.stdout.read1(65536)  # type: ignore[attr-defined]
            if not chunk:
                self.close()
                raise PluginError(f"plugin {self.ref.path!r} closed its output (crashed?)")
            buf += chunk
        text = buf.splitlines()[0].decode("utf-8", errors="replace")
        try:
            response = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PluginError(f"plugin {self.ref.path!r} sent malformed JSON: {text[:120]!r}") from exc
        if not isinstance(response, dict) or "type" not in response:
            raise PluginError(f"plugin {self.ref.path!r} sent a non-object response")
        return response

    def place(self, service_doc: dict, infra_doc: dict) -> dict[str, str]:
        response = self.request(
            {
                "type": "place_request",
                "protocol_version": PLUGIN_PROTOCOL_VERSION,
                "service": service_doc,
                "infrastructure": infra_doc,
            }
        )
        if response.get("type") != "placement" or not isinstance(response.get("assignments"), dict):
            raise PluginError(f"plugin {self.ref.path!r} sent {response.get('type')!r} to a place_request")
        return {str(k): str(v) for k, v in response["assignments"].items()}

    def scale(self, vnf_id: str, current_instances: int, current_flavor: str, metrics: list[dict]) -> dict:
        response = self.request(
            {
                "type": "scale_request",
                "protocol_version": PLUGIN_PROTOCOL_VERSION,
                "vnf_id": vnf_id,
                "current_instances": current_instances,
                "current_flavor": current_flavor,
                "metrics": metrics,
            }
        )
        kind = response.get("type")
        if kind == "no_op":
            return response
        if kind != "scale_decision":
            raise PluginError(f"plugin {self.ref.path!r} sent {kind!r} to a scale_request")
        if "target_instances" not in response and "target_flavor" not in response:
            raise PluginError(f"plugin {self.ref.path!r} sent a scale_decision without a target")
        return response

    def close(self):
        if self._proc is None:
            return
        proc, self._proc = self._proc, None
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.terminate()
            proc.wait(timeout=2)
        except Exception:
            proc.kill()

    def __enter__(self):
        self._ensure_started()
        return self

    def __exit__(self, *exc):
        self.close()
        return False
