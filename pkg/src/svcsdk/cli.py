"""Command-line surface of the SDK.

One binary, subcommands per pipeline stage: validate, package, catalogue,
push, emulate, profile, alarms, graph. Human-readable output goes to stdout,
diagnostics to stderr; every command takes --json for scripting.

Exit codes: 0 success, 1 validation errors present, 2 I/O or parse failure,
3 signature/trust failure, 4 emulation aborted, 5 remote push rejected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import requests

from svcsdk import __version__
from svcsdk.catalogue import Catalogue, chain_lookups, directory_lookup
from svcsdk.descriptors import (
    parse_service_descriptor,
    parse_vnf_descriptor,
    serialize_descriptor,
)
from svcsdk.dot_export import deployment_to_dot, service_to_dot
from svcsdk.emulator import EmulationConfig, EventLog, run_emulation
from svcsdk.errors import (
    Infeasible,
    InsufficientData,
    NoFeasiblePlacement,
    ParseError,
    PluginError,
    RangeError,
    SchemaError,
    SdkError,
    SigningError,
    ValidationGate,
)
from svcsdk.infrastructure import load_infrastructure
from svcsdk.model import resolve_references
from svcsdk.packaging import (
    PACKAGE_SUFFIX,
    build_package,
    generate_keypair,
    load_signing_key,
    load_trust_dir,
    unpack,
    verify_package,
)
from svcsdk.profiling import (
    AlarmRule,
    MetricSeries,
    PerformanceProfile,
    estimate_capacity,
    evaluate_alarms,
    fit_profile,
    horizontal_plan,
    ingest_metrics,
    metrics_from_event_log,
    predict_scaled_topology,
    series_to_csv,
)
from svcsdk.templates import ScalingTemplate, instantiate_template
from svcsdk.traffic import load_trace
from svcsdk.validation import validate_source

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_TRUST = 3
EXIT_ABORT = 4
EXIT_PUSH_REJECTED = 5

TRUST_CODES = {"BAD_SIGNATURE", "UNKNOWN_SIGNER", "DIGEST_MISMATCH", "MALFORMED_ARCHIVE"}

CATALOGUE_ENV = "SVCSDK_CATALOGUE"


def _err(message: str):
    print(f"error: {message}", file=sys.stderr)


def _catalogue_root(args) -> Path:
    if getattr(args, "catalogue", None):
        return Path(args.catalogue)
    return Path(os.environ.get(CATALOGUE_ENV, Path.home() / ".svcsdk" / "catalogue"))


def _lookup_for(args, nsd_path: Path):
    dirs = [nsd_path.parent]
    if getattr(args, "vnfd_dir", None):
        dirs.append(Path(args.vnfd_dir))
    return chain_lookups(directory_lookup(*dirs), Catalogue(_catalogue_root(args)).vnfd_lookup())


def _print_report(report, as_json: bool):
    if as_json:
        print(json.dumps({"passed": report.passed, "issues": [i.to_dict() for i in report.issues]}, indent=2))
        return
    if not report.issues:
        print("OK: no issues found")
        return
    width = max(len(i.code) for i in report.issues)
    for issue in report.issues:
        print(f"{issue.severity.upper():7} {issue.code:{width}} {issue.location}  {issue.message}")
    errors, warnings = len(report.errors), len(report.warnings)
    print(f"{'FAILED' if errors else 'PASSED'}: {errors} error(s), {warnings} warning(s)")


def cmd_validate(args) -> int:
    nsd_path = Path(args.nsd)
    try:
        text = nsd_path.read_text()
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    plugins_root = Path(args.plugins) if args.plugins else (
        nsd_path.parent if (nsd_path.parent / "plugins").is_dir() else None
    )
    report = validate_source(text, _lookup_for(args, nsd_path), plugins_root)
    _print_report(report, args.json)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _resolved_from_args(args, nsd_path: Path):
    service = parse_service_descriptor(nsd_path.read_text())
    return resolve_references(service, _lookup_for(args, nsd_path))


def cmd_package_keygen(args) -> int:
    key_path, pub_path = generate_keypair(Path(args.out))
    print(f"private key: {key_path}")
    print(f"public key:  {pub_path}")
    return EXIT_OK


def cmd_package_build(args) -> int:
    nsd_path = Path(args.nsd)
    try:
        resolved = _resolved_from_args(args, nsd_path)
        key = load_signing_key(args.key)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ParseError, SchemaError) as exc:
        _err(str(exc))
        return EXIT_IO
    except SdkError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    plugin_root = Path(args.plugins) if args.plugins else (
        nsd_path.parent if (nsd_path.parent / "plugins").is_dir() else None
    )
    created_at = None
    if args.created_at:
        created_at = datetime.fromisoformat(args.created_at).astimezone(timezone.utc)
    out = Path(args.out) if args.out else nsd_path.with_suffix(PACKAGE_SUFFIX)
    try:
        build_package(resolved, plugin_root, key, created_at=created_at, out_path=out)
    except ValidationGate as exc:
        _print_report(exc.report, args.json)
        return EXIT_VALIDATION
    except SigningError as exc:
        _err(str(exc))
        return EXIT_TRUST
    print(f"package written: {out}")
    return EXIT_OK


def _verify(data: bytes, trust_dir: str, as_json: bool) -> int:
    try:
        trusted = load_trust_dir(trust_dir)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    report = verify_package(data, trusted)
    _print_report(report, as_json)
    if report.passed:
        return EXIT_OK
    if any(i.code in TRUST_CODES for i in report.errors):
        return EXIT_TRUST
    return EXIT_VALIDATION


def cmd_package_verify(args) -> int:
    try:
        data = Path(args.package).read_bytes()
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    return _verify(data, args.trust, args.json)


def cmd_catalogue_add(args) -> int:
    path = Path(args.file)
    try:
        text = path.read_text()
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    catalogue = Catalogue(_catalogue_root(args))
    try:
        if args.kind == "VNFD" or (args.kind == "auto" and "image:" in text):
            descriptor = parse_vnf_descriptor(text)
            from svcsdk.validation import validate_schema

            report = validate_schema(text, "VNFD")
        else:
            descriptor = parse_service_descriptor(text)
            report = validate_source(text, _lookup_for(args, path))
        if not report.passed:
            _print_report(report, args.json)
            return EXIT_VALIDATION
        entry = catalogue.add_entry(descriptor, report)
    except (ParseError, SchemaError) as exc:
        _err(str(exc))
        return EXIT_IO
    except SdkError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    print(f"catalogued {entry.kind} {entry.name} {entry.version} ({entry.sha256[:12]})")
    return EXIT_OK


def cmd_catalogue_get(args) -> int:
    catalogue = Catalogue(_catalogue_root(args))
    try:
        text = catalogue.lookup(args.kind, args.name, args.version)
    except SdkError as exc:
        _err(str(exc))
        return EXIT_IO
    if args.out:
        Path(args.out).write_text(text)
        print(f"written: {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_catalogue_list(args) -> int:
    entries = Catalogue(_catalogue_root(args)).entries()
    if args.json:
        print(json.dumps([vars(e) for e in entries], indent=2))
    else:
        for e in entries:
            print(f"{e.kind:8} {e.name:20} {e.version:8} {e.sha256[:12]}  {e.validated_at}")
    return EXIT_OK


def cmd_catalogue_expand(args) -> int:
    nsd_path = Path(args.nsd)
    try:
        resolved = _resolved_from_args(args, nsd_path)
        balancer = None
        if args.balancer_vnfd:
            balancer = parse_vnf_descriptor(Path(args.balancer_vnfd).read_text())
        template = ScalingTemplate(
            name=args.template,
            target_vnf=args.target,
            instances=args.instances,
            balancer=balancer,
            hub_vnf=args.hub,
        )
        expanded = instantiate_template(template, resolved)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ParseError, SchemaError) as exc:
        _err(str(exc))
        return EXIT_IO
    except SdkError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "nsd.yaml").write_text(serialize_descriptor(expanded.service))
    for (name, _version), vnfd in sorted(expanded.vnfds.items()):
        (out_dir / f"vnfd-{name}.yaml").write_text(serialize_descriptor(vnfd))
    print(f"expanded service written under: {out_dir}")
    return EXIT_OK


def cmd_push(args) -> int:
    try:
        data = Path(args.package).read_bytes()
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    rc = _verify(data, args.trust, as_json=False)
    if rc != EXIT_OK:
        _err("package failed local verification; not pushing")
        return rc

    target = args.target
    if target.startswith("sandbox:"):
        workspace = Path(target[len("sandbox:"):] or tempfile.mkdtemp(prefix="svcsdk-run-"))
        manifest = unpack(data, workspace)
        print(f"sandbox workspace ready: {workspace} ({manifest.package_name} {manifest.package_version})")
        return EXIT_OK
    if target.startswith(("http://", "https://")):
        headers = {"Content-Type": "application/gzip"}
        if args.token:
            headers["Authorization"] = f"Bearer {args.token}"
        try:
            response = requests.post(
                target.rstrip("/") + "/api/v1/packages", data=data, headers=headers, timeout=30
            )
        except requests.RequestException as exc:
            _err(f"push failed: {exc}")
            return EXIT_IO
        if response.status_code == 201:
            try:
                package_id = response.json().get("package_id", "")
            except ValueError:
                package_id = ""
            print(f"accepted: package_id={package_id}")
            return EXIT_OK
        _err(f"push rejected: HTTP {response.status_code}")
        return EXIT_PUSH_REJECTED
    _err(f"unknown push target {target!r} (use sandbox:<dir> or http(s)://...)")
    return EXIT_IO


def _parse_kv_flags(pairs: list[str], what: str) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for pair in pairs:
        try:
            scope, assignment = pair.split(":", 1)
            key, value = assignment.split("=", 1)
        except ValueError:
            raise ValueError(f"bad {what} {pair!r}, expected <vnf>:<key>=<value>")
        out.setdefault(scope, {})[key] = float(value)
    return out


def cmd_emulate(args) -> int:
    try:
        if args.package:
            workdir = Path(tempfile.mkdtemp(prefix="svcsdk-emulate-"))
            unpack(Path(args.package).read_bytes(), workdir)
            nsd_path = workdir / "descriptors" / "nsd.yaml"
            plugin_root: Path | None = workdir
        else:
            nsd_path = Path(args.nsd)
            plugin_root = Path(args.plugins) if args.plugins else (
                nsd_path.parent if (nsd_path.parent / "plugins").is_dir() else None
            )
        service = parse_service_descriptor(nsd_path.read_text())
        resolved = resolve_references(service, _lookup_for(args, nsd_path))
        infra = load_infrastructure(Path(args.infra).read_text())
        trace = load_trace(Path(args.trace).read_text())
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ParseError, SchemaError) as exc:
        _err(str(exc))
        return EXIT_IO
    except SdkError as exc:
        _err(str(exc))
        return EXIT_VALIDATION

    profiles = {}
    for pair in args.profile or []:
        name, _, path = pair.partition("=")
        profiles[name] = PerformanceProfile.from_yaml(Path(path).read_text())
    flavor_override = {}
    for pair in args.flavor or []:
        vnf, _, flavor = pair.partition("=")
        flavor_override[vnf] = flavor
    try:
        vnfm_params = _parse_kv_flags(args.policy_param or [], "--policy-param")
    except ValueError as exc:
        _err(str(exc))
        return EXIT_IO

    config = EmulationConfig(
        decision_interval=args.decision_interval,
        instantiation_delay=args.delay,
        strict=args.strict,
        seed=args.seed,
        max_ticks=args.ticks,
        plugin_root=plugin_root,
        policy_override=args.policy,
        vnfm_params=vnfm_params,
        flavor_override=flavor_override,
        profiles=profiles,
    )
    try:
        log, state = run_emulation(resolved, infra, trace, config)
    except (NoFeasiblePlacement, PluginError) as exc:
        _err(str(exc))
        return EXIT_ABORT

    if args.out:
        Path(args.out).write_text(log.to_jsonl())
    scale_events = log.of_kind("scale_applied")
    max_loss = 0.0
    for record in log.of_kind("tick"):
        for st in record["vnfs"].values():
            max_loss = max(max_loss, st["packet_loss_ratio"])
    summary = {
        "ticks": len(log.of_kind("tick")),
        "scale_requests": len(log.of_kind("scale_request")),
        "scale_applied": len(scale_events),
        "alarms": len(log.of_kind("alarm")),
        "max_packet_loss_ratio": max_loss,
        "abort": state.abort_reason,
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(
            f"ticks={summary['ticks']} scale_requests={summary['scale_requests']} "
            f"scale_applied={summary['scale_applied']} alarms={summary['alarms']} "
            f"max_loss={max_loss:.4f} abort={state.abort_reason or '-'}"
        )
    return EXIT_ABORT if state.abort_reason else EXIT_OK


def _load_series(args) -> MetricSeries:
    series = MetricSeries.of([])
    for path in args.metrics or []:
        series = series.merged(ingest_metrics(Path(path).read_text()))
    for path in args.events or []:
        log = EventLog.from_jsonl(Path(path).read_text())
        series = series.merged(metrics_from_event_log(log.records))
    if not series.records:
        raise InsufficientData("no metric rows; pass --metrics CSV or --events JSONL")
    return series


def cmd_profile_fit(args) -> int:
    try:
        series = _load_series(args)
        profile = fit_profile(series, args.vnf)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ParseError, RangeError) as exc:
        _err(str(exc))
        return EXIT_IO
    except InsufficientData as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    text = profile.to_yaml()
    if args.out:
        Path(args.out).write_text(text)
        print(f"profile written: {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_profile_capacity(args) -> int:
    try:
        if args.per_instance is not None:
            plan = horizontal_plan(args.target, args.per_instance)
        else:
            if not args.profile:
                _err("need --profile or --per-instance")
                return EXIT_IO
            profile = PerformanceProfile.from_yaml(Path(args.profile).read_text())
            plan = estimate_capacity(profile, args.target, args.mode, per_instance_cores=args.cores)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except Infeasible as exc:
        _err(f"{exc} (max achievable {exc.max_achievable_mbps:g} Mbit/s)")
        return EXIT_VALIDATION
    if args.json:
        print(json.dumps(vars(plan), indent=2))
    elif plan.mode == "horizontal":
        print(
            f"{plan.instance_count} instances "
            f"(predicted {plan.predicted_mbps:g} Mbit/s, headroom {plan.headroom:.2f})"
        )
    else:
        print(
            f"{plan.cpu_cores} cpu cores "
            f"(predicted {plan.predicted_mbps:g} Mbit/s, headroom {plan.headroom:.2f})"
        )
    return EXIT_OK


def cmd_profile_predict(args) -> int:
    try:
        profile = PerformanceProfile.from_yaml(Path(args.profile).read_text())
        aggregate = predict_scaled_topology(
            profile, args.template, args.instances, args.cores, front_cap_mbps=args.balancer_cap
        )
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except ValueError as exc:
        _err(str(exc))
        return EXIT_IO
    if args.json:
        print(json.dumps({"template": args.template, "instances": args.instances, "aggregate_mbps": aggregate}))
    else:
        print(f"predicted aggregate: {aggregate:g} Mbit/s")
    return EXIT_OK


def _alarm_rules(args) -> list[AlarmRule]:
    rules: list[AlarmRule] = []
    if args.nsd:
        service = parse_service_descriptor(Path(args.nsd).read_text())
        for spec in service.monitoring:
            if spec.alarm is not None:
                rules.append(
                    AlarmRule(
                        metric=spec.metric,
                        vnf_id=spec.vnf_id,
                        comparator=spec.alarm.comparator,
                        threshold=spec.alarm.threshold,
                        duration_s=spec.alarm.duration_s,
                    )
                )
    for text in args.rule or []:
        # <vnf>:<metric><cmp><threshold>:<duration>, e.g. router:packet_loss_ratio>0.01:5
        try:
            vnf, rest = text.split(":", 1)
            body, duration = rest.rsplit(":", 1)
            cmp_pos = max(body.find(">"), body.find("<"))
            metric, comparator, threshold = body[:cmp_pos], body[cmp_pos], body[cmp_pos + 1:]
            rules.append(
                AlarmRule(
                    metric=metric,
                    vnf_id=vnf,
                    comparator=comparator,
                    threshold=float(threshold),
                    duration_s=int(duration),
                )
            )
        except (ValueError, IndexError):
            raise ValueError(f"bad --rule {text!r}, expected <vnf>:<metric><cmp><value>:<duration>")
    return rules


def cmd_alarms_eval(args) -> int:
    try:
        series = _load_series(args)
        rules = _alarm_rules(args)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (ParseError, RangeError, ValueError, InsufficientData) as exc:
        _err(str(exc))
        return EXIT_IO
    events = evaluate_alarms(series, rules)
    if args.json:
        print(
            json.dumps(
                [
                    {
                        "vnf_id": e.rule.vnf_id,
                        "metric": e.rule.metric,
                        "comparator": e.rule.comparator,
                        "threshold": e.rule.threshold,
                        "start_tick": e.start_tick,
                        "duration_s": e.duration_s,
                    }
                    for e in events
                ],
                indent=2,
            )
        )
    elif not events:
        print("no alarms")
    else:
        for e in events:
            print(
                f"ALARM {e.rule.vnf_id} {e.rule.metric}{e.rule.comparator}{e.rule.threshold:g} "
                f"from tick {e.start_tick} for {e.duration_s}s"
            )
    return EXIT_OK


def cmd_graph(args) -> int:
    path = Path(args.input)
    try:
        text = path.read_text()
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    try:
        if path.suffix == ".jsonl" or text.lstrip().startswith("{"):
            dot = deployment_to_dot(EventLog.from_jsonl(text).records)
        else:
            service = parse_service_descriptor(text)
            resolved = resolve_references(service, _lookup_for(args, path))
            dot = service_to_dot(resolved)
    except (ParseError, SchemaError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_IO
    except SdkError as exc:
        _err(str(exc))
        return EXIT_VALIDATION
    if args.out:
        Path(args.out).write_text(dot)
        print(f"dot written: {args.out}")
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svcsdk", description=__doc__)
    parser.add_argument("--version", action="version", version=f"svcsdk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_catalogue_arg(p):
        p.add_argument("--catalogue", help=f"catalogue root (default ${CATALOGUE_ENV} or ~/.svcsdk/catalogue)")

    p = sub.add_parser("validate", help="formal pre-deployment checks of an NSD")
    p.add_argument("nsd")
    p.add_argument("--vnfd-dir", help="extra directory with vnfd-*.yaml files")
    p.add_argument("--plugins", help="package root containing plugins/")
    p.add_argument("--json", action="store_true")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_validate)

    pkg = sub.add_parser("package", help="build, verify and key management")
    pkg_sub = pkg.add_subparsers(dest="package_command", required=True)

    p = pkg_sub.add_parser("keygen", help="generate an Ed25519 signing key pair")
    p.add_argument("--out", required=True, help="path stem; writes <stem>.key and <stem>.pub")
    p.set_defaults(func=cmd_package_keygen)

    p = pkg_sub.add_parser("build", help="compile a validated service into a signed .svcpkg")
    p.add_argument("nsd")
    p.add_argument("--key", required=True, help="signing key (.key)")
    p.add_argument("--plugins", help="package root containing plugins/")
    p.add_argument("--vnfd-dir")
    p.add_argument("--created-at", help="pin the package timestamp (ISO-8601) for reproducible builds")
    p.add_argument("-o", "--out")
    p.add_argument("--json", action="store_true")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_package_build)

    p = pkg_sub.add_parser("verify", help="verify archive integrity, signature and contents")
    p.add_argument("package")
    p.add_argument("--trust", required=True, help="directory of trusted public keys (*.pub)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_package_verify)

    cat = sub.add_parser("catalogue", help="store of validated descriptors and templates")
    cat_sub = cat.add_subparsers(dest="catalogue_command", required=True)

    p = cat_sub.add_parser("add", help="validate and store a descriptor")
    p.add_argument("file")
    p.add_argument("--kind", choices=["auto", "NSD", "VNFD"], default="auto")
    p.add_argument("--vnfd-dir")
    p.add_argument("--json", action="store_true")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_catalogue_add)

    p = cat_sub.add_parser("get", help="retrieve a stored descriptor")
    p.add_argument("kind", choices=["NSD", "VNFD", "TEMPLATE"])
    p.add_argument("name")
    p.add_argument("version")
    p.add_argument("-o", "--out")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_catalogue_get)

    p = cat_sub.add_parser("list", help="list catalogue entries")
    p.add_argument("--json", action="store_true")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_catalogue_list)

    p = cat_sub.add_parser("expand", help="instantiate a scaling template on a service")
    p.add_argument("nsd")
    p.add_argument("--template", required=True, choices=["load-balancer", "hub-and-spoke", "full-mesh"])
    p.add_argument("--target", required=True, help="vnf_id to expand")
    p.add_argument("-n", "--instances", type=int, required=True)
    p.add_argument("--balancer-vnfd", help="VNFD file for the balancer node (load-balancer)")
    p.add_argument("--hub", help="existing vnf_id acting as hub (hub-and-spoke)")
    p.add_argument("--vnfd-dir")
    p.add_argument("-o", "--out", required=True, help="output directory for the expanded descriptors")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_catalogue_expand)

    p = sub.add_parser("push", help="push a verified package to an execution environment")
    p.add_argument("package")
    p.add_argument("--target", required=True, help="sandbox:<dir> or http(s)://host")
    p.add_argument("--token", help="bearer token for http(s) targets")
    p.add_argument("--trust", required=True, help="directory of trusted public keys")
    p.set_defaults(func=cmd_push)

    p = sub.add_parser("emulate", help="run a service against a traffic trace in the sandbox MANO")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--package", help=".svcpkg to run")
    src.add_argument("--nsd", help="NSD to run (VNFDs resolved next to it)")
    p.add_argument("--infra", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--out", help="write the event log (JSON lines)")
    p.add_argument("--ticks", type=int, help="cap the run length")
    p.add_argument("--policy", choices=["none"], help="override every VNFM (none = fixed instances)")
    p.add_argument("--policy-param", action="append", help="<vnf>:<key>=<value> threshold overrides")
    p.add_argument("--flavor", action="append", help="<vnf>=<flavor> initial flavor override")
    p.add_argument("--profile", action="append", help="<vnfd>=<profile.yaml> capacity model override")
    p.add_argument("--plugins", help="plugin root when running from --nsd")
    p.add_argument("--vnfd-dir", help="extra directory with vnfd-*.yaml files")
    p.add_argument("--decision-interval", type=int, default=5)
    p.add_argument("--delay", type=int, default=3, help="instantiation delay in ticks")
    p.add_argument("--strict", action="store_true", help="abort when scale-out cannot be placed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_emulate)

    prof = sub.add_parser("profile", help="fit and use VNF performance profiles")
    prof_sub = prof.add_subparsers(dest="profile_command", required=True)

    p = prof_sub.add_parser("fit", help="fit a saturating-linear profile from metrics")
    p.add_argument("--metrics", action="append", help="metric CSV (repeatable)")
    p.add_argument("--events", action="append", help="emulator event log JSONL (repeatable)")
    p.add_argument("--vnf", required=True)
    p.add_argument("-o", "--out")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_profile_fit)

    p = prof_sub.add_parser("capacity", help="plan resources for a target rate")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--profile")
    p.add_argument("--mode", choices=["vertical", "horizontal"], default="horizontal")
    p.add_argument("--cores", type=int, help="per-instance cores (horizontal with --profile)")
    p.add_argument("--per-instance", type=float, help="known per-instance rate, skips the profile")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_profile_capacity)

    p = prof_sub.add_parser("predict", help="predict a scaled topology's aggregate throughput")
    p.add_argument("--profile", required=True)
    p.add_argument("--template", required=True, choices=["load-balancer", "hub-and-spoke", "full-mesh"])
    p.add_argument("-n", "--instances", type=int, required=True)
    p.add_argument("--cores", type=int, required=True)
    p.add_argument("--balancer-cap", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_profile_predict)

    al = sub.add_parser("alarms", help="evaluate threshold alarms over metrics")
    al_sub = al.add_subparsers(dest="alarms_command", required=True)
    p = al_sub.add_parser("eval")
    p.add_argument("--metrics", action="append")
    p.add_argument("--events", action="append")
    p.add_argument("--nsd", help="take alarm rules from this NSD's monitoring section")
    p.add_argument("--rule", action="append", help="<vnf>:<metric><cmp><value>:<duration>")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_alarms_eval)

    p = sub.add_parser("graph", help="export a service or deployment as Graphviz DOT")
    p.add_argument("input", help="NSD yaml or event-log jsonl")
    p.add_argument("-o", "--out")
    p.add_argument("--vnfd-dir")
    add_catalogue_arg(p)
    p.set_defaults(func=cmd_graph)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError) as exc:
        _err(str(exc))
        return EXIT_IO
    except SdkError as exc:
        _err(str(exc))
        return EXIT_VALIDATION


def entrypoint():  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
