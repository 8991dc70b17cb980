"""The verifier-in-the-loop workflows and leverage accounting.

Each round extracts a configuration from the latest reply, runs the
verifiers in priority order and sends back the humanized text of the first
finding.  When a retry limit is hit the human hook is asked for a prompt;
if it has none the workflow ends unresolved.
"""
from __future__ import annotations

import enum
import json
import re
import sys
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

from cosynth.diff import diff_all
from cosynth.frontends.cisco import parse_cisco
from cosynth.frontends.juniper import parse_juniper
from cosynth.humanizer import humanize
from cosynth.llm import NoConfigFound, Session, extract_configs, iips_for, load_iip, load_transcript, open_session, send
from cosynth.sim import check_no_transit, simulate
from cosynth.topology import (
    Topology,
    check_local_policy,
    describe_local_policy,
    describe_topology,
    local_policy_specs,
    verify_topology,
)

TRANSLATE_TASK = "Translate the configuration into an equivalent Juniper configuration."
SYNTHESIS_TASK = ("Write router configurations for the network below so that no ISP can reach another ISP "
                  "through R1, while every ISP can reach the CUSTOMER network and the CUSTOMER can reach every ISP.")
PRINT_ALL = "Please print the entire configuration."


@dataclass(frozen=True)
class Limits:
    max_syntax_retries: int = 5
    max_semantic_retries: int = 5
    max_total_automated: int = 25

    def __post_init__(self) -> None:
        if min(self.max_syntax_retries, self.max_semantic_retries, self.max_total_automated) < 1:
            raise ValueError("limits must be positive")


class Status(str, enum.Enum):
    VERIFIED = "Verified"
    PUNTED = "PuntedUnresolved"


class _Unbounded:
    def __repr__(self) -> str:
        return "Unbounded"

    __str__ = __repr__


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class LeverageReport:
    automated_count: int
    human_count: int
    leverage: Union[Fraction, _Unbounded]

    def __str__(self) -> str:
        return f"automated={self.automated_count} human={self.human_count} leverage={self.leverage}"


@dataclass
class WorkflowOutcome:
    status: Status
    artifacts: dict
    transcript: list
    leverage: LeverageReport
    findings_history: list = field(default_factory=list)  # (round, session, finding)


def compute_leverage(transcript) -> LeverageReport:
    """Tally user prompts by origin; IIP messages count as neither."""
    messages = []
    for item in transcript:
        messages.extend(item.messages if isinstance(item, Session) else [item])
    tally = Counter(m.origin for m in messages if m.role == "user")
    auto, human = tally["automated"], tally["human"]
    return LeverageReport(auto, human, Fraction(auto, human) if human else UNBOUNDED)


# ---------------------------------------------------------------------------
# human hooks

@dataclass(frozen=True)
class Punt:
    session: str
    reason: str
    prompt: str   # the correction the loop would have sent
    config: str


HumanHook = Callable[[Punt], Optional[str]]


class ScriptedHuman:
    """Answers punts from a list, or from per-session lists keyed by name."""

    def __init__(self, replies: Union[list, dict]):
        self.replies = {"*": list(replies)} if isinstance(replies, list) else {k: list(v) for k, v in replies.items()}

    def __call__(self, punt: Punt) -> Optional[str]:
        queue = self.replies.get(punt.session, self.replies.get("*", []))
        return queue.pop(0) if queue else None


class ReplayHuman(ScriptedHuman):
    """Human prompts recorded in a transcript, minus each session's opening."""

    def __init__(self, path):
        replies = {}
        for s in load_transcript(path):
            users = s.user_messages
            replies[s.name] = [m.text for m in users[1:] if m.origin == "human"]
        super().__init__(replies)


def interactive_human(punt: Punt) -> Optional[str]:
    print(f"\n[{punt.session or 'session'}] automatic correction stopped: {punt.reason}", file=sys.stderr)
    print(f"Pending finding: {punt.prompt}", file=sys.stderr)
    print("Type a prompt for the model (empty line to give up):", file=sys.stderr)
    line = sys.stdin.readline()
    return line.strip() or None


def no_human(punt: Punt) -> Optional[str]:
    return None


# ---------------------------------------------------------------------------
# the loop

@dataclass
class _Loop:
    session: Session
    provider: object
    limits: Limits
    hook: HumanHook
    history: list
    automated_count: int = 0
    syntax_streak: int = 0
    sent: Counter = field(default_factory=Counter)

    def automated(self, text: str) -> str:
        self.automated_count += 1
        return send(self.session, self.provider, text, "automated").text

    def human(self, text: str) -> str:
        self.syntax_streak = 0
        self.sent.clear()
        return send(self.session, self.provider, text, "human").text

    def correct(self, finding, stage: str, config_text: str) -> Optional[str]:
        """Send the correction for ``finding``; None means the human gave up."""
        self.history.append((len(self.history) + 1, self.session.name, finding))
        prompt = humanize(finding).text
        self.syntax_streak = self.syntax_streak + 1 if stage == "syntax" else 0
        reason = None
        if self.automated_count >= self.limits.max_total_automated:
            reason = "automated prompt budget exhausted"
        elif stage == "syntax" and self.syntax_streak > self.limits.max_syntax_retries:
            reason = "too many syntax correction attempts"
        elif stage != "syntax" and self.sent[prompt] >= self.limits.max_semantic_retries:
            reason = "the same problem keeps coming back"
        if reason is None:
            self.sent[prompt] += 1
            return self.automated(prompt)
        text = self.hook(Punt(self.session.name, reason, prompt, config_text))
        if text is None:
            return None
        return self.human(text)

    def ask_full(self) -> Optional[str]:
        if self.automated_count >= self.limits.max_total_automated:
            text = self.hook(Punt(self.session.name, "automated prompt budget exhausted", PRINT_ALL, ""))
            return None if text is None else self.human(text)
        return self.automated(PRINT_ALL)


_JUNOS_FULL = re.compile(r"^\s*interfaces\s*\{", re.M)
_CISCO_FULL = re.compile(r"^\s*router bgp\s", re.M)


def _pick_config(reply: str, name: Optional[str], full: re.Pattern) -> Optional[str]:
    """The complete config in ``reply`` for router ``name``, if there is one."""
    try:
        blocks = extract_configs(reply)
    except NoConfigFound:
        return None
    candidates = [b for b in blocks if b.name == name] if name else []
    candidates = candidates or [b for b in blocks if b.name is None] or blocks
    for b in candidates:
        if full.search(b.text):
            return b.text
    return None


def _translation_findings(source_ir, text: str) -> tuple:
    parsed = parse_juniper(text)
    if parsed.diagnostics:
        return "syntax", parsed.diagnostics
    return "semantic", diff_all(source_ir, parsed.config)


def run_translation(source: str, provider, limits: Limits = Limits(), human_hook: HumanHook = no_human,
                    iips: Optional[list] = None) -> WorkflowOutcome:
    parsed = parse_cisco(source)
    if parsed.errors:
        raise ValueError("source configuration has errors: " + "; ".join(d.render() for d in parsed.errors))
    iips = iips_for("translation", load_iip() if iips is None else iips)
    session = open_session(provider, iips)
    history: list = []
    loop = _Loop(session, provider, limits, human_hook, history)
    reply: Optional[str] = loop.human(f"{TRANSLATE_TASK}\n\n{source}")
    last_config = ""
    while reply is not None:
        config = _pick_config(reply, None, _JUNOS_FULL)
        if config is None:
            reply = loop.ask_full()
            continue
        last_config = config
        stage, findings = _translation_findings(parsed.config, config)
        if not findings:
            return WorkflowOutcome(Status.VERIFIED, {"translation": config}, [session],
                                   compute_leverage([session]), history)
        reply = loop.correct(findings[0], stage, config)
    return WorkflowOutcome(Status.PUNTED, {"translation": last_config} if last_config else {}, [session],
                           compute_leverage([session]), history)


def _router_findings(text: str, t: Topology, router: str, spec) -> tuple:
    parsed = parse_cisco(text)
    if parsed.diagnostics:
        return "syntax", parsed.diagnostics, None
    topo = verify_topology(parsed.config, t, router)
    if topo:
        return "topology", topo, None
    return "semantic", check_local_policy(parsed.config, spec), parsed.config


def _verify_router(loop: _Loop, reply: Optional[str], t: Topology, router: str, spec) -> Optional[str]:
    while reply is not None:
        config = _pick_config(reply, router, _CISCO_FULL)
        if config is None:
            reply = loop.ask_full()
            continue
        stage, findings, _ = _router_findings(config, t, router, spec)
        if not findings:
            return config
        reply = loop.correct(findings[0], stage, config)
    return None


def run_local_synthesis(t: Topology, provider, limits: Limits = Limits(), human_hook: HumanHook = no_human,
                        iips: Optional[list] = None) -> WorkflowOutcome:
    specs = local_policy_specs(t)
    iips = iips_for("synthesis", load_iip() if iips is None else iips)
    description = describe_topology(t)
    history: list = []
    sessions: list = []
    loops: dict = {}
    artifacts: dict = {}

    def outcome(status: Status) -> WorkflowOutcome:
        return WorkflowOutcome(status, dict(artifacts), sessions, compute_leverage(sessions), history)

    for i, router in enumerate(t.names):
        session = open_session(provider, iips, name=router)
        sessions.append(session)
        loop = loops[router] = _Loop(session, provider, limits, human_hook, history)
        opening = f"{description}\n{describe_local_policy(specs[router], t)}"
        if i == 0:
            reply = loop.human(f"{SYNTHESIS_TASK}\n\n{opening}")
        else:
            reply = loop.automated(opening)
        config = _verify_router(loop, reply, t, router, specs[router])
        if config is None:
            return outcome(Status.PUNTED)
        artifacts[router] = config

    hub = t.hub.name
    while True:
        configs = {r: parse_cisco(text).config for r, text in artifacts.items()}
        violations = check_no_transit(simulate(t, configs), t)
        if not violations:
            return outcome(Status.VERIFIED)
        for v in violations:
            history.append((len(history) + 1, "", v))
        # Global counterexamples are not fed back automatically.
        loop = loops[hub]
        text = human_hook(Punt(hub, "network-wide policy violated", humanize(violations[0]).text, artifacts[hub]))
        if text is None:
            return outcome(Status.PUNTED)
        config = _verify_router(loop, loop.human(text), t, hub, specs[hub])
        if config is None:
            return outcome(Status.PUNTED)
        artifacts[hub] = config


def outcome_summary(o: WorkflowOutcome) -> dict:
    return {
        "status": o.status.value,
        "automated": o.leverage.automated_count,
        "human": o.leverage.human_count,
        "leverage": str(o.leverage.leverage),
        "rounds": len(o.findings_history),
    }


def dumps_summary(o: WorkflowOutcome) -> str:
    return json.dumps(outcome_summary(o), indent=2)
