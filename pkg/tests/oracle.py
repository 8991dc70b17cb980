"""Brute-force reference semantics, written without the package's evaluator.

Used only by tests: small universes, direct definitions, no shortcuts.
"""
from __future__ import annotations

import itertools
from ipaddress import IPv4Network

from cosynth.ir import Action, MatchCommunity, MatchPrefixList, MatchProtocol, SetCommunity, SetMed

BASE = IPv4Network("10.0.0.0/8")


def universe_prefixes(max_len: int = 16) -> list:
    """Every prefix that contains 10.0.0.0/8 or lies inside it, up to ``max_len``."""
    out = [BASE.supernet(new_prefix=n) for n in range(0, 8)]
    for n in range(8, max_len + 1):
        out.extend(BASE.subnets(new_prefix=n))
    return out


def all_subsets(items) -> list:
    items = sorted(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


def _bits(net: IPv4Network) -> str:
    return format(int(net.network_address), "032b")[: net.prefixlen]


def entry_matches(entry, prefix: IPv4Network) -> bool:
    length = entry.prefix.prefixlen
    low = entry.ge if entry.ge is not None else length
    if entry.le is not None:
        high = entry.le
    else:
        high = 32 if entry.ge is not None else length
    return _bits(prefix).startswith(_bits(entry.prefix)) and low <= prefix.prefixlen <= high


def list_permits(entries, prefix) -> bool:
    for e in sorted(entries, key=lambda e: e.seq):
        if entry_matches(e, prefix):
            return e.action is Action.PERMIT
    return False


def holds(match, prefix_lists, community_lists, prefix, comms, proto) -> bool:
    if isinstance(match, MatchPrefixList):
        return list_permits(prefix_lists[match.name], prefix)
    if isinstance(match, MatchCommunity):
        return any(c in comms for c in community_lists[match.list_id])
    assert isinstance(match, MatchProtocol)
    return match.protocol is proto


def evaluate(policy, prefix_lists, community_lists, prefix, comms, proto, med=0):
    """('permit', med, communities) or ('deny', None, None)."""
    for clause in sorted(policy.clauses, key=lambda c: c.seq):
        if all(holds(m, prefix_lists, community_lists, prefix, comms, proto) for m in clause.matches):
            if clause.action is Action.DENY:
                return ("deny", None, None)
            for s in clause.sets:
                if isinstance(s, SetMed):
                    med = s.value
                elif isinstance(s, SetCommunity):
                    comms = comms | s.values if s.additive else s.values
            return ("permit", med, frozenset(comms))
    if policy.default_action is Action.DENY:
        return ("deny", None, None)
    return ("permit", med, frozenset(comms))


def admits(constraint, prefix, comms, proto) -> bool:
    if constraint.prefix is not None:
        low, high = constraint.length_range or (constraint.prefix.prefixlen,) * 2
        if not low <= prefix.prefixlen <= high:
            return False
        if not _bits(prefix).startswith(_bits(constraint.prefix)):
            return False
    if not constraint.has_communities <= comms or constraint.lacks_communities & comms:
        return False
    return constraint.protocol is None or constraint.protocol is proto


def violations(policy, prefix_lists, community_lists, constraint, expected, pool, protocols, max_len=16):
    """Every (prefix, communities, protocol) the policy treats against ``expected``."""
    want = "permit" if expected is Action.PERMIT else "deny"
    out = []
    for prefix in universe_prefixes(max_len):
        for comms in all_subsets(pool):
            for proto in protocols:
                if not admits(constraint, prefix, comms, proto):
                    continue
                if evaluate(policy, prefix_lists, community_lists, prefix, comms, proto)[0] != want:
                    out.append((prefix, comms, proto))
    return out


def attachment(config, direction, prefix, comms, proto):
    """IOS-style neighbor treatment of one route (no redistribution statements)."""
    nbr = config.bgp_neighbors[0]
    name = nbr.import_policy if direction == "import" else nbr.export_policy
    if direction == "export" and proto.value != "bgp" and prefix not in config.bgp_networks:
        return ("deny", None, None)
    if name is None:
        return ("permit", 0, frozenset(comms))
    return evaluate(config.policies[name], config.prefix_lists, config.community_lists, prefix, comms, proto)
