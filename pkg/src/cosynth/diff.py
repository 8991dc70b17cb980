"""Differencing an original configuration against its translation.

Findings come in three groups, reported in this order because a missing
component hides any attribute or behavior difference behind it:
structural mismatches, attribute differences, policy behavior differences.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from cosynth.ir import Action, Protocol, RouterConfig, to_jsonable
from cosynth.policy import (
    Accepted,
    PolicyEnv,
    PolicyOutcome,
    RouteAnnouncement,
    build_test_space,
    evaluate_attachment,
)

ORIGINAL = "original"
TRANSLATION = "translation"
DIRECTIONS = ("import", "export")


@dataclass(frozen=True)
class StructuralMismatch:
    item: str          # e.g. "an import route map for bgp neighbor 2.3.4.5"
    counterpart: str   # noun for the missing side, e.g. "route map"
    side: str = ORIGINAL  # the side that has the item


@dataclass(frozen=True)
class AttributeDiff:
    component: str     # "ospf" or "bgp"
    left_name: str
    right_name: str
    attribute: str
    left_value: object
    right_value: object


@dataclass(frozen=True)
class PolicyBehaviorDiff:
    neighbor: str
    direction: str
    left_policy: Optional[str]
    right_policy: Optional[str]
    example: RouteAnnouncement
    left_action: Action
    right_action: Action
    left_route: Optional[RouteAnnouncement] = None
    right_route: Optional[RouteAnnouncement] = None


DiffFinding = Union[StructuralMismatch, AttributeDiff, PolicyBehaviorDiff]


@dataclass
class CorrespondenceMap:
    neighbors: list = field(default_factory=list)   # (peer address, peer address)
    interfaces: list = field(default_factory=list)  # (left name, right name)
    policies: list = field(default_factory=list)    # (peer, direction, left policy, right policy)


def _loopback_unit(name: str) -> Optional[int]:
    m = re.fullmatch(r"[Ll]oopback(\d+)", name) or re.fullmatch(r"lo0\.(\d+)", name)
    return int(m.group(1)) if m else None


def load_interface_map(path: Union[str, Path]) -> dict:
    """Sidecar JSON object mapping original interface names to translated ones."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise ValueError("interface map must be a JSON object of name -> name")
    return data


def _pair_interfaces(a: list, b: list, overrides: Optional[dict]) -> list:
    pairs = []
    left = list(a)
    right = list(b)

    def take(match) -> None:
        for ia in list(left):
            ib = next((x for x in right if match(ia, x)), None)
            if ib is not None:
                pairs.append((ia.name, ib.name))
                left.remove(ia)
                right.remove(ib)

    if overrides:
        take(lambda x, y: overrides.get(x.name) == y.name)
    take(lambda x, y: x.name == y.name)
    take(lambda x, y: _loopback_unit(x.name) is not None and x.name.lower().startswith("loopback")
         and y.name.startswith("lo0.") and _loopback_unit(x.name) == _loopback_unit(y.name))
    take(lambda x, y: (x.address, x.mask_length) == (y.address, y.mask_length))
    return pairs


def correspond(a: RouterConfig, b: RouterConfig, interface_map: Optional[dict] = None):
    """Pair up components and list those without a partner."""
    cmap = CorrespondenceMap()
    found: list = []
    b_peers = {n.peer_address for n in b.bgp_neighbors}
    a_peers = {n.peer_address for n in a.bgp_neighbors}
    for nbr in sorted(a.bgp_neighbors, key=lambda n: n.peer_address):
        if nbr.peer_address not in b_peers:
            found.append(StructuralMismatch(f"a bgp neighbor {nbr.peer_address}", "bgp neighbor", ORIGINAL))
            continue
        cmap.neighbors.append((nbr.peer_address, nbr.peer_address))
        other = b.neighbor(nbr.peer_address)
        for direction in DIRECTIONS:
            pa = getattr(nbr, f"{direction}_policy")
            pb = getattr(other, f"{direction}_policy")
            if pa is not None and pb is None:
                found.append(StructuralMismatch(
                    f"an {direction} route map for bgp neighbor {nbr.peer_address}", "route map", ORIGINAL))
            elif pa is None and pb is not None:
                found.append(StructuralMismatch(
                    f"an {direction} policy for bgp neighbor {nbr.peer_address}", "route map", TRANSLATION))
            else:
                cmap.policies.append((nbr.peer_address, direction, pa, pb))
    for nbr in sorted(b.bgp_neighbors, key=lambda n: n.peer_address):
        if nbr.peer_address not in a_peers:
            found.append(StructuralMismatch(f"a bgp neighbor {nbr.peer_address}", "bgp neighbor", TRANSLATION))

    cmap.interfaces = _pair_interfaces(a.interfaces, b.interfaces, interface_map)
    paired_a = {x for x, _ in cmap.interfaces}
    paired_b = {y for _, y in cmap.interfaces}
    for iface in a.interfaces:
        if iface.name not in paired_a:
            found.append(StructuralMismatch(f"an interface {iface.name}", "interface", ORIGINAL))
    for iface in b.interfaces:
        if iface.name not in paired_b:
            found.append(StructuralMismatch(f"an interface {iface.name}", "interface", TRANSLATION))
    for left, right in cmap.interfaces:
        la, lb = a.ospf_link(left), b.ospf_link(right)
        if la is not None and lb is None:
            found.append(StructuralMismatch(f"an OSPF link for {left}", "OSPF link", ORIGINAL))
        elif la is None and lb is not None:
            found.append(StructuralMismatch(f"an OSPF link for {right}", "OSPF link", TRANSLATION))
    return cmap, found


def diff_attributes(a: RouterConfig, b: RouterConfig, cmap: CorrespondenceMap) -> list:
    out: list = []
    for left, right in cmap.interfaces:
        la, lb = a.ospf_link(left), b.ospf_link(right)
        if la is None or lb is None:
            continue
        if la.cost != lb.cost:
            out.append(AttributeDiff("ospf", left, right, "cost", la.cost, lb.cost))
        if la.passive != lb.passive:
            out.append(AttributeDiff("ospf", left, right, "passive", la.passive, lb.passive))
    for pa, pb in cmap.neighbors:
        na, nb = a.neighbor(pa), b.neighbor(pb)
        for attr in ("local_as", "remote_as"):
            va, vb = getattr(na, attr), getattr(nb, attr)
            if va != vb:
                out.append(AttributeDiff("bgp", str(pa), str(pb), attr.replace("_", "-"), va, vb))
    return out


def _differs(oa: PolicyOutcome, ob: PolicyOutcome) -> bool:
    if isinstance(oa, Accepted) != isinstance(ob, Accepted):
        return True
    if isinstance(oa, Accepted):
        return (oa.route.med, oa.route.communities) != (ob.route.med, ob.route.communities)
    return False


def _action(outcome: PolicyOutcome) -> Action:
    return Action.PERMIT if isinstance(outcome, Accepted) else Action.DENY


def diff_policies(a: RouterConfig, b: RouterConfig, cmap: CorrespondenceMap) -> list:
    """At most one behavior difference per attachment point.

    Imports only ever see BGP routes.  Exports also see locally originated
    routes of every protocol, which is how redistribution differences show up.
    """
    env_a, env_b = PolicyEnv.of(a), PolicyEnv.of(b)
    space = build_test_space(PolicyEnv.union(env_a, env_b))
    out: list = []
    for peer, direction, pa, pb in cmap.policies:
        for ann in space:
            if direction == "import" and ann.origin_protocol is not Protocol.BGP:
                continue
            oa = evaluate_attachment(a, peer, direction, ann, env_a)
            ob = evaluate_attachment(b, peer, direction, ann, env_b)
            if _differs(oa, ob):
                out.append(PolicyBehaviorDiff(
                    str(peer), direction, pa, pb, ann, _action(oa), _action(ob),
                    oa.route if isinstance(oa, Accepted) else None,
                    ob.route if isinstance(ob, Accepted) else None,
                ))
                break
    return out


def diff_all(a: RouterConfig, b: RouterConfig, interface_map: Optional[dict] = None) -> list:
    cmap, structural = correspond(a, b, interface_map)
    return structural + diff_attributes(a, b, cmap) + diff_policies(a, b, cmap)


def finding_to_json(f: DiffFinding) -> dict:
    data = to_jsonable(f)
    data["kind"] = type(f).__name__
    return data
