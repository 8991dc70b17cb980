"""Render verifier findings as correction prompts.

Each finding kind has a text template with ``$name`` placeholders under
``cosynth/templates``.  A directory of extra ``.txt`` files can override or
extend the shipped set.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template
from typing import Any, Optional, Union

from cosynth.diff import ORIGINAL, AttributeDiff, PolicyBehaviorDiff, StructuralMismatch
from cosynth.frontends import Severity, SyntaxDiagnostic, Vendor
from cosynth.ir import Action, Protocol
from cosynth.policy import RouteAnnouncement
from cosynth.sim import CustomerUnreachable, IspReachesIsp, IspUnreachableFromCustomer
from cosynth.topology import (
    ExtraNeighbor,
    ExtraNetwork,
    InterfaceAddressMismatch,
    LocalAsMismatch,
    LocalPolicyViolation,
    MissingNeighbor,
    MissingNetwork,
    RouterIdMismatch,
)


@dataclass(frozen=True)
class PromptText:
    text: str
    finding_kind: str
    source: Any


def load_templates(directory: Optional[Union[str, Path]] = None) -> dict:
    out = {}
    for entry in resources.files("cosynth").joinpath("templates").iterdir():
        if entry.name.endswith(".txt"):
            out[entry.name[:-4]] = entry.read_text(encoding="utf-8")
    if directory is not None:
        for path in sorted(Path(directory).glob("*.txt")):
            out[path.stem] = path.read_text(encoding="utf-8")
    return out


_TEMPLATES: Optional[dict] = None


def _fill(name: str, **fields: Any) -> str:
    global _TEMPLATES
    if _TEMPLATES is None:
        _TEMPLATES = load_templates()
    return Template(_TEMPLATES[name]).substitute({k: str(v) for k, v in fields.items()})


def _communities(values) -> str:
    return ", ".join(str(c) for c in sorted(values))


def _route_phrase(ann: RouteAnnouncement) -> str:
    text = f"the prefix {ann.prefix}"
    if ann.origin_protocol is not Protocol.BGP:
        text += f" from protocol {ann.origin_protocol.value}"
    if ann.communities:
        text += f" with communities {_communities(ann.communities)}"
    if ann.med:
        text += f" with MED {ann.med}"
    return text


def _action_phrase(action: Action, route: Optional[RouteAnnouncement],
                   other: Optional[RouteAnnouncement]) -> str:
    if action is Action.DENY:
        return "REJECT"
    text = "ACCEPT"
    if route is not None and other is not None:
        if route.med != other.med:
            text += f" with MED {route.med}"
        if route.communities != other.communities:
            text += f" with communities {{{_communities(route.communities)}}}"
    return text


def _policy_phrase(direction: str, name: Optional[str]) -> str:
    if name is None:
        return f"default BGP {direction} behavior"
    return f"BGP {direction} policy {name}"


def _syntax(d: SyntaxDiagnostic) -> str:
    warning = d.severity is Severity.WARNING
    if d.vendor is Vendor.JUNIPER:
        statement = d.statement or d.line_text.strip()
        if warning:
            return _fill("syntax_warning_junos", statement=statement, message=d.message)
        return _fill("syntax_error_junos", statement=statement)
    if warning:
        return _fill("syntax_warning_cisco", line=d.line_text.strip(), message=d.message)
    return _fill("syntax_error_cisco", line=d.line_text.strip())


def _attribute(f: AttributeDiff) -> str:
    if f.component == "ospf":
        left, right = f"the OSPF link for {f.left_name}", f"link to {f.right_name}"
    else:
        left, right = f"the BGP neighbor {f.left_name}", f"neighbor {f.right_name}"

    def value(v: object) -> str:
        return str(v).lower() if isinstance(v, bool) else str(v)

    return _fill("attribute", left=left, right=right, attribute=f.attribute,
                 left_value=value(f.left_value), right_value=value(f.right_value))


def _selected_routes(v: LocalPolicyViolation) -> str:
    c = v.assertion.constraint
    if c.has_communities:
        label = "community" if len(c.has_communities) == 1 else "communities"
        return f"that have the {label} {_communities(c.has_communities)}"
    if c.prefix is not None:
        return f"for the prefix {c.prefix}"
    return f"such as the one with {v.counterexample.announcement.describe()}"


def _local_policy(v: LocalPolicyViolation) -> str:
    a = v.assertion
    ce = v.counterexample
    tag_problem = a.adds_community is not None and ce.actual is Action.PERMIT
    if v.policy is None:
        if tag_problem:
            return _fill("no_policy_missing_tag", neighbor=a.neighbor, community=a.adds_community)
        if a.expected is Action.DENY:
            return _fill("no_policy_permits", direction=a.direction, neighbor=a.neighbor,
                         routes=_selected_routes(v))
    if tag_problem:
        result = ce.result.communities if ce.result is not None else frozenset()
        return _fill("policy_missing_tag", policy=v.policy, community=a.adds_community, neighbor=a.neighbor,
                     example=ce.announcement.describe(), result=_communities(result))
    name = "policy_permits" if a.expected is Action.DENY else "policy_denies"
    return _fill(name, policy=v.policy or f"for {a.direction} from neighbor {a.neighbor}",
                 routes=_selected_routes(v))


def humanize(f: Any) -> PromptText:
    """The correction prompt for any verifier finding."""
    kind = type(f).__name__
    if isinstance(f, SyntaxDiagnostic):
        text = _syntax(f)
    elif isinstance(f, StructuralMismatch):
        name = "structural_original" if f.side == ORIGINAL else "structural_translation"
        text = _fill(name, item=f.item, counterpart=f.counterpart)
    elif isinstance(f, AttributeDiff):
        text = _attribute(f)
    elif isinstance(f, PolicyBehaviorDiff):
        text = _fill(
            "policy_behavior",
            route=_route_phrase(f.example),
            left_policy=_policy_phrase(f.direction, f.left_policy),
            right_policy=_policy_phrase(f.direction, f.right_policy),
            neighbor=f.neighbor,
            left_action=_action_phrase(f.left_action, f.left_route, f.right_route),
            right_action=_action_phrase(f.right_action, f.right_route, f.left_route),
        )
    elif isinstance(f, LocalPolicyViolation):
        text = _local_policy(f)
    elif isinstance(f, IspReachesIsp):
        text = _fill("isp_reaches_isp", router=f.router, prefix=f.prefix, owner=f.owner)
    elif isinstance(f, CustomerUnreachable):
        text = _fill("customer_unreachable", router=f.router)
    elif isinstance(f, IspUnreachableFromCustomer):
        text = _fill("isp_unreachable", router=f.router)
    else:
        return humanize_topology(f)
    return PromptText(text, kind, f)


_TOPOLOGY = {
    InterfaceAddressMismatch: "interface_address",
    LocalAsMismatch: "local_as",
    RouterIdMismatch: "router_id",
    MissingNeighbor: "missing_neighbor",
    MissingNetwork: "missing_network",
    ExtraNetwork: "extra_network",
    ExtraNeighbor: "extra_neighbor",
}


def humanize_topology(f: Any) -> PromptText:
    name = _TOPOLOGY.get(type(f))
    if name is None:
        raise TypeError(f"no template for finding {type(f).__name__}")
    fields = {k: getattr(f, k) for k in f.__dataclass_fields__}
    return PromptText(_fill(name, **fields), type(f).__name__, f)
