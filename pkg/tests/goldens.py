"""Findings produced from fixtures, paired with the exact prompt each must render to."""
from __future__ import annotations

from ipaddress import IPv4Address

import star
from conftest import FIXTURES
from cosynth.diff import diff_all
from cosynth.frontends import parse
from cosynth.frontends.cisco import parse_cisco
from cosynth.ir import Action, Community, Protocol
from cosynth.policy import RouteConstraint
from cosynth.topology import LocalPolicySpec, PolicyAssertion, check_local_policy, generate_star, verify_topology

TR = FIXTURES / "translation"

TRANSLATION_PROMPTS = {
    "fault_prefix_syntax":
        "There is a syntax error: 'policy-options prefix-list our-networks 1.2.3.0/24-32'",
    "fault_missing_policy":
        "In the original configuration, there is an import route map for bgp neighbor 2.3.4.5, "
        "but in the translation, there is no corresponding route map",
    "fault_ospf_cost":
        "In the original configuration, the OSPF link for Loopback0 has cost set to 1, "
        "but in the translation, the corresponding link to lo0.0 has cost set to 0",
    "fault_ge_exact":
        "In the original configuration, for the prefix 1.2.3.0/25, the BGP export policy to_provider "
        "for BGP neighbor 2.3.4.5 performs the following action: ACCEPT. But, in the translation, "
        "the corresponding BGP export policy to_provider performs the following action: REJECT",
}

SYNTAX_PROMPT = "'ip community-list standard COMM_LIST_R2_OUT permit .+' is wrong syntax."
SEMANTIC_PROMPT = ("The route-map DROP_COMMUNITY permits routes that have the community 100:1. "
                   "However, they should be denied.")


def translation_finding(fixture: str):
    source = parse((TR / "source.cfg").read_text()).config
    result = parse((TR / f"{fixture}.junos").read_text())
    found = result.diagnostics or diff_all(source, result.config)
    assert len(found) == 1, found
    return found[0]


def syntax_finding():
    (d,) = parse_cisco("ip community-list standard COMM_LIST_R2_OUT permit .+\n").diagnostics
    return d


def semantic_finding():
    cfg = parse_cisco((FIXTURES / "golden" / "drop_community.cfg").read_text()).config
    tag = Community(100, 1)
    spec = LocalPolicySpec("R1", assertions=[PolicyAssertion(
        IPv4Address("1.0.0.2"), "export",
        RouteConstraint(has_communities=frozenset([tag]), protocol=Protocol.BGP), Action.DENY)])
    (v,) = check_local_policy(cfg, spec)
    return v


def topology_findings() -> list:
    """(finding, expected prompt) for each single mutation of the star configs."""
    t = generate_star(6)
    out = []
    for router, old, new, prompt in star.MUTATIONS:
        cfg = star.config(router, star.swap(star.text(router), old, new))
        found = verify_topology(cfg, t, router)
        assert len(found) == 1, found
        out.append((found[0], prompt))
    return out
