"""Command-line entry point.

Exit codes: 0 verified or no findings, 1 findings present, 2 punted
unresolved, 3 usage or provider error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from cosynth.diff import diff_all, finding_to_json, load_interface_map
from cosynth.frontends import Vendor, parse
from cosynth.humanizer import humanize
from cosynth.ir import Action, Community, parse_prefix, to_jsonable
from cosynth.llm import ProviderError, load_transcript, provider_from_spec, save_transcript
from cosynth.orchestrator import (
    Limits,
    ReplayHuman,
    ScriptedHuman,
    Status,
    compute_leverage,
    interactive_human,
    no_human,
    outcome_summary,
    run_local_synthesis,
    run_translation,
)
from cosynth.policy import PolicyEnv, RouteConstraint, UnsatisfiableConstraint, search_policy
from cosynth.sim import check_no_transit, rib_dump, simulate
from cosynth.topology import Topology, compose_snapshot, describe_topology, generate_star, verify_topology

OK, FINDINGS, PUNTED, ERROR = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(ERROR)


def _read_config(path: str, vendor: Optional[Vendor] = None):
    return parse(Path(path).read_text(), vendor)


def _limits(args) -> Limits:
    return Limits(args.max_syntax_retries, args.max_semantic_retries, args.max_total_automated)


def _human(args):
    if args.interactive:
        return interactive_human
    if args.human_script:
        return ScriptedHuman(json.loads(Path(args.human_script).read_text()))
    if args.provider.startswith("replay:"):
        return ReplayHuman(args.provider.partition(":")[2])
    return no_human


def _finish_workflow(outcome, args, write) -> int:
    write(outcome)
    if args.transcript:
        save_transcript(outcome.transcript, args.transcript)
    print(json.dumps(outcome_summary(outcome), indent=2))
    return OK if outcome.status is Status.VERIFIED else PUNTED


def cmd_translate(args) -> int:
    provider = provider_from_spec(args.provider, strict=args.strict)
    outcome = run_translation(Path(args.input).read_text(), provider, _limits(args), _human(args))

    def write(o):
        if args.out and "translation" in o.artifacts:
            Path(args.out).write_text(o.artifacts["translation"])
    return _finish_workflow(outcome, args, write)


def cmd_synthesize(args) -> int:
    if bool(args.topology) == bool(args.routers):
        raise UsageError("give exactly one of --topology and --routers")
    t = Topology.load(args.topology) if args.topology else generate_star(args.routers)
    provider = provider_from_spec(args.provider, strict=args.strict)
    outcome = run_local_synthesis(t, provider, _limits(args), _human(args))

    def write(o):
        if args.out_dir and o.artifacts:
            if o.status is Status.VERIFIED:
                compose_snapshot(o.artifacts, args.out_dir, t)
            else:
                compose_snapshot(o.artifacts, args.out_dir)
    return _finish_workflow(outcome, args, write)


def cmd_diff(args) -> int:
    a, b = _read_config(args.a), _read_config(args.b)
    findings = a.diagnostics + b.diagnostics
    if not findings:
        cmap = load_interface_map(args.interface_map) if args.interface_map else None
        findings = diff_all(a.config, b.config, cmap)
    if args.format == "json":
        print(json.dumps([finding_to_json(f) for f in findings], indent=2))
    else:
        for f in findings:
            print(humanize(f).text)
    return FINDINGS if findings else OK


def cmd_verify_topology(args) -> int:
    result = _read_config(args.config)
    t = Topology.load(args.topology)
    findings = result.diagnostics or verify_topology(result.config, t, args.router)
    for f in findings:
        print(humanize(f).text)
    return FINDINGS if findings else OK


def cmd_search_policy(args) -> int:
    result = _read_config(args.config)
    if result.errors:
        for d in result.errors:
            print(humanize(d).text)
        return FINDINGS
    config = result.config
    if args.policy not in config.policies:
        raise UsageError(f"no policy named {args.policy}")
    has = frozenset(Community.parse(c) for c in args.has_community)
    lacks = frozenset(Community.parse(c) for c in args.lacks_community)
    constraint = RouteConstraint(prefix=parse_prefix(args.prefix) if args.prefix else None,
                                 has_communities=has, lacks_communities=lacks)
    expected = Action(args.expect)
    ce = search_policy(config.policies[args.policy], PolicyEnv.of(config), constraint, expected)
    if ce is None:
        print(f"{args.policy}: every matching route is {'permitted' if expected is Action.PERMIT else 'denied'}")
        return OK
    verb = "permits" if ce.actual is Action.PERMIT else "denies"
    print(f"{args.policy} {verb} the route with {ce.announcement.describe()}; expected {expected.value}")
    return FINDINGS


def cmd_simulate(args) -> int:
    t = Topology.load(args.topology)
    configs = {}
    for name in t.names:
        path = Path(args.snapshot) / "configs" / f"{name}.cfg"
        result = parse(path.read_text())
        if result.errors:
            for d in result.errors:
                print(f"{name}: {humanize(d).text}")
            return FINDINGS
        configs[name] = result.config
    ribs = simulate(t, configs)
    violations = check_no_transit(ribs, t) if args.check == "no-transit" else []
    if args.format == "json":
        print(json.dumps({"ribs": rib_dump(ribs),
                          "violations": [dict(to_jsonable(v), kind=type(v).__name__) for v in violations]},
                         indent=2))
    else:
        for router, rib in rib_dump(ribs).items():
            print(f"{router}:")
            for prefix, entry in rib.items():
                via = entry["learned_from"] or "local"
                print(f"  {prefix} via {via} as-path {entry['as_path']} communities {entry['communities']}")
        for v in violations:
            print(humanize(v).text)
    return FINDINGS if violations else OK


def cmd_gen_topology(args) -> int:
    t = generate_star(args.routers)
    text = t.dumps()
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    if args.describe:
        print(describe_topology(t), end="")
    return OK


def cmd_leverage(args) -> int:
    report = compute_leverage(load_transcript(args.transcript))
    print(report)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cosynth", description="Verified prompting for router configurations.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def workflow_args(sp):
        sp.add_argument("--provider", required=True, help="live, replay:<file> or scripted:<file>")
        sp.add_argument("--strict", action="store_true", help="replay: require identical prompts")
        sp.add_argument("--transcript")
        sp.add_argument("--interactive", action="store_true")
        sp.add_argument("--human-script", help="JSON list of human prompts used at punts")
        sp.add_argument("--max-syntax-retries", type=int, default=Limits.max_syntax_retries)
        sp.add_argument("--max-semantic-retries", type=int, default=Limits.max_semantic_retries)
        sp.add_argument("--max-total-automated", type=int, default=Limits.max_total_automated)

    sp = sub.add_parser("translate", help="translate a Cisco configuration to Junos")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out")
    workflow_args(sp)
    sp.set_defaults(func=cmd_translate)

    sp = sub.add_parser("synthesize", help="synthesize per-router configs for a star network")
    sp.add_argument("--topology")
    sp.add_argument("--routers", type=int)
    sp.add_argument("--out-dir")
    workflow_args(sp)
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("diff", help="compare an original configuration with a translation")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--interface-map", help="JSON object of original -> translated interface names")
    sp.set_defaults(func=cmd_diff)

    sp = sub.add_parser("verify-topology", help="check one router config against the topology")
    sp.add_argument("--config", required=True)
    sp.add_argument("--topology", required=True)
    sp.add_argument("--router", required=True)
    sp.set_defaults(func=cmd_verify_topology)

    sp = sub.add_parser("search-policy", help="look for a route the policy mishandles")
    sp.add_argument("--config", required=True)
    sp.add_argument("--policy", required=True)
    sp.add_argument("--has-community", action="append", default=[])
    sp.add_argument("--lacks-community", action="append", default=[])
    sp.add_argument("--prefix")
    sp.add_argument("--expect", choices=("permit", "deny"), required=True)
    sp.set_defaults(func=cmd_search_policy)

    sp = sub.add_parser("simulate", help="propagate routes over a snapshot")
    sp.add_argument("--snapshot", required=True)
    sp.add_argument("--topology", required=True)
    sp.add_argument("--check", choices=("no-transit", "none"), default="none")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("gen-topology", help="write a star topology")
    sp.add_argument("--routers", type=int, required=True)
    sp.add_argument("--out")
    sp.add_argument("--describe", action="store_true")
    sp.set_defaults(func=cmd_gen_topology)

    sp = sub.add_parser("leverage", help="count automated and human prompts in a transcript")
    sp.add_argument("--transcript", required=True)
    sp.set_defaults(func=cmd_leverage)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (UsageError, ProviderError, UnsatisfiableConstraint, OSError, ValueError) as exc:
        print(f"cosynth: error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
