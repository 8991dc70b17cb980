"""Route-policy semantics over concrete announcements.

Search is exhaustive over a finite test space built from the prefixes,
lengths and communities a configuration mentions.  That is enough to
produce one concrete counterexample, which is all the feedback loop needs.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from ipaddress import IPv4Network
from typing import Callable, Iterable, Iterator, Optional, Union

from cosynth.ir import (
    Action,
    BgpNeighbor,
    Community,
    MatchCommunity,
    MatchPrefixList,
    MatchProtocol,
    PolicyClause,
    PrefixListEntry,
    Protocol,
    RouterConfig,
    RoutePolicy,
    SetCommunity,
    SetLocalPref,
    SetMed,
)

PROBE_PREFIX = IPv4Network("203.0.113.0/24")
MAX_TEST_SPACE = 100_000


@dataclass(frozen=True)
class RouteAnnouncement:
    prefix: IPv4Network
    communities: frozenset = frozenset()
    med: int = 0
    origin_protocol: Protocol = Protocol.BGP
    as_path: tuple = ()
    local_pref: int = 100

    def describe(self) -> str:
        comms = ", ".join(str(c) for c in sorted(self.communities))
        return (f"prefix {self.prefix}, communities {{{comms}}}, med {self.med}, "
                f"protocol {self.origin_protocol.value}")


@dataclass(frozen=True)
class Accepted:
    route: RouteAnnouncement


@dataclass(frozen=True)
class Denied:
    at_clause: Optional[int] = None
    reason: str = ""


PolicyOutcome = Union[Accepted, Denied]


def verdict(outcome: PolicyOutcome) -> Action:
    return Action.PERMIT if isinstance(outcome, Accepted) else Action.DENY


class PrefixMatch(enum.Enum):
    PERMIT = "permit"
    DENY = "deny"
    NO_MATCH = "no-match"


@dataclass(frozen=True)
class PolicyEnv:
    """Named lists a policy can reference, plus values worth probing."""

    prefix_lists: dict = field(default_factory=dict)
    community_lists: dict = field(default_factory=dict)
    extra_prefixes: tuple = ()
    extra_communities: frozenset = frozenset()
    meds: frozenset = frozenset()

    @classmethod
    def of(cls, *configs: RouterConfig) -> "PolicyEnv":
        prefix_lists: dict = {}
        community_lists: dict = {}
        extra: list = []
        comms: set = set()
        meds: set = set()
        for cfg in configs:
            prefix_lists.update(cfg.prefix_lists)
            community_lists.update(cfg.community_lists)
            extra.extend(cfg.bgp_networks)
            for policy in cfg.policies.values():
                for clause in policy.clauses:
                    for s in clause.sets:
                        if isinstance(s, SetCommunity):
                            comms |= s.values
                        elif isinstance(s, SetMed):
                            meds.add(s.value)
        return cls(prefix_lists, community_lists, tuple(extra), frozenset(comms), frozenset(meds))

    @classmethod
    def union(cls, *envs: "PolicyEnv") -> "PolicyEnv":
        """Everything worth probing in any of ``envs``; for building test spaces.

        A name defined differently on two sides keeps both definitions, the
        later one under a suffixed key.
        """
        def merge(left: dict, right: dict) -> dict:
            out = dict(left)
            for name, value in right.items():
                key = name
                while key in out and out[key] != value:
                    key += "'"
                out[key] = value
            return out

        out = cls()
        for env in envs:
            out = cls(
                merge(out.prefix_lists, env.prefix_lists),
                merge(out.community_lists, env.community_lists),
                out.extra_prefixes + env.extra_prefixes,
                out.extra_communities | env.extra_communities,
                out.meds | env.meds,
            )
        return out


@dataclass(frozen=True)
class RouteConstraint:
    prefix: Optional[IPv4Network] = None
    length_range: Optional[tuple] = None
    has_communities: frozenset = frozenset()
    lacks_communities: frozenset = frozenset()
    protocol: Optional[Protocol] = None

    @property
    def lengths(self) -> Optional[tuple]:
        if self.prefix is None:
            return None
        return self.length_range or (self.prefix.prefixlen, self.prefix.prefixlen)

    def admits(self, ann: RouteAnnouncement) -> bool:
        if self.prefix is not None:
            low, high = self.lengths
            if not low <= ann.prefix.prefixlen <= high:
                return False
            if ann.prefix.prefixlen < self.prefix.prefixlen:
                return False
            if ann.prefix.supernet(new_prefix=self.prefix.prefixlen) != self.prefix:
                return False
        if not self.has_communities <= ann.communities:
            return False
        if self.lacks_communities & ann.communities:
            return False
        return self.protocol is None or ann.origin_protocol is self.protocol


@dataclass(frozen=True)
class Counterexample:
    announcement: RouteAnnouncement
    actual: Action
    expected: Action
    at_clause: Optional[int] = None
    # set when the route was accepted but transformed the wrong way
    result: Optional[RouteAnnouncement] = None


class UnsatisfiableConstraint(ValueError):
    pass


def match_prefix_list(entries: Iterable[PrefixListEntry], prefix: IPv4Network) -> PrefixMatch:
    for entry in sorted(entries, key=lambda e: e.seq):
        if entry.covers(prefix):
            return PrefixMatch.PERMIT if entry.action is Action.PERMIT else PrefixMatch.DENY
    return PrefixMatch.NO_MATCH


def condition_holds(cond, env: PolicyEnv, ann: RouteAnnouncement) -> bool:
    if isinstance(cond, MatchPrefixList):
        return match_prefix_list(env.prefix_lists[cond.name], ann.prefix) is PrefixMatch.PERMIT
    if isinstance(cond, MatchCommunity):
        return bool(ann.communities & frozenset(env.community_lists[cond.list_id]))
    if isinstance(cond, MatchProtocol):
        return ann.origin_protocol is cond.protocol
    raise TypeError(f"unknown match condition {cond!r}")


def clause_applies(clause: PolicyClause, env: PolicyEnv, ann: RouteAnnouncement) -> bool:
    return all(condition_holds(m, env, ann) for m in clause.matches)


def apply_sets(sets: Iterable, ann: RouteAnnouncement) -> RouteAnnouncement:
    for s in sets:
        if isinstance(s, SetMed):
            ann = replace(ann, med=s.value)
        elif isinstance(s, SetLocalPref):
            ann = replace(ann, local_pref=s.value)
        elif isinstance(s, SetCommunity):
            comms = ann.communities | s.values if s.additive else frozenset(s.values)
            ann = replace(ann, communities=comms)
    return ann


def eval_policy(policy: RoutePolicy, env: PolicyEnv, ann: RouteAnnouncement) -> PolicyOutcome:
    for clause in sorted(policy.clauses, key=lambda cl: cl.seq):
        if clause_applies(clause, env, ann):
            if clause.action is Action.DENY:
                return Denied(clause.seq)
            return Accepted(apply_sets(clause.sets, ann))
    if policy.default_action is Action.DENY:
        return Denied(None, "default")
    return Accepted(ann)


# ---------------------------------------------------------------------------
# neighbor-level behaviour

def import_route(config: RouterConfig, neighbor: BgpNeighbor, ann: RouteAnnouncement,
                 env: Optional[PolicyEnv] = None) -> PolicyOutcome:
    if neighbor.import_policy is None:
        return Accepted(ann)
    env = env or PolicyEnv.of(config)
    return eval_policy(config.policies[neighbor.import_policy], env, ann)


def _enter_bgp(config: RouterConfig, ann: RouteAnnouncement, env: PolicyEnv) -> PolicyOutcome:
    for red in config.redistributions:
        if red.protocol is ann.origin_protocol:
            if red.policy is None:
                return Accepted(ann)
            return eval_policy(config.policies[red.policy], env, ann)
    if ann.prefix in config.bgp_networks:
        return Accepted(ann)
    return Denied(None, "not redistributed into BGP")


def export_route(config: RouterConfig, neighbor: BgpNeighbor, ann: RouteAnnouncement,
                 env: Optional[PolicyEnv] = None) -> PolicyOutcome:
    """What ``config`` advertises to ``neighbor`` for a route in its table.

    Non-BGP routes first have to enter BGP: through a network statement or a
    redistribution on IOS, or through the neighbor's export policy on Junos.
    """
    env = env or PolicyEnv.of(config)
    if ann.origin_protocol is not Protocol.BGP:
        if config.redistribute_via_export:
            if neighbor.export_policy is None:
                return Denied(None, "only BGP routes are advertised without an export policy")
        else:
            entered = _enter_bgp(config, ann, env)
            if isinstance(entered, Denied):
                return entered
            ann = entered.route
    if neighbor.export_policy is None:
        return Accepted(ann)
    return eval_policy(config.policies[neighbor.export_policy], env, ann)


def evaluate_attachment(config: RouterConfig, peer, direction: str, ann: RouteAnnouncement,
                        env: Optional[PolicyEnv] = None) -> PolicyOutcome:
    """Outcome of ``ann`` at the given neighbor attachment point."""
    nbr = config.neighbor(peer)
    env = env or PolicyEnv.of(config)
    if direction == "import":
        return import_route(config, nbr, ann, env)
    return export_route(config, nbr, ann, env)



# ---------------------------------------------------------------------------
# test space

@dataclass
class TestSpace:
    __test__ = False

    announcements: list
    truncated: bool = False

    def __iter__(self) -> Iterator[RouteAnnouncement]:
        return iter(self.announcements)

    def __len__(self) -> int:
        return len(self.announcements)


def _at_length(prefix: IPv4Network, length: int) -> IPv4Network:
    if length <= prefix.prefixlen:
        return prefix.supernet(new_prefix=length)
    return IPv4Network((int(prefix.network_address), length))


def _free_below(node: IPv4Network, length: int, blockers: list) -> Optional[IPv4Network]:
    """A prefix of ``length`` under ``node`` that lies under none of ``blockers``.

    Prefers the all-zeros extension, so examples read naturally.
    """
    inside = [b for b in blockers if b.subnet_of(node)]
    if node in inside:
        return None
    if not inside or node.prefixlen == length:
        return _at_length(node, length)
    for child in node.subnets(prefixlen_diff=1):
        found = _free_below(child, length, inside)
        if found is not None:
            return found
    return None


def candidate_prefixes(env: PolicyEnv, constraint: Optional[RouteConstraint] = None) -> list:
    """Representative prefixes covering every distinct prefix-list outcome.

    Whether an entry covers a prefix depends on the prefix length relative to
    the entry's bounds and on which entry prefixes are its ancestors.  For each
    boundary length we pick, under every anchor (and under the root), one
    prefix whose deepest anchor ancestor is exactly that anchor.
    """
    anchors: set = set()
    lengths: set = {0}
    for entries in env.prefix_lists.values():
        for e in entries:
            low, high = e.length_range
            anchors.add(e.prefix)
            lengths |= {e.prefix.prefixlen, low, high, min(high + 1, 32), max(low - 1, 0)}
    if constraint is not None and constraint.prefix is not None:
        low, high = constraint.lengths
        anchors.add(constraint.prefix)
        lengths |= {constraint.prefix.prefixlen, low, high, min(high + 1, 32), max(low - 1, 0)}
    out = {PROBE_PREFIX, *env.extra_prefixes}
    root = IPv4Network("0.0.0.0/0")
    for length in lengths:
        for top in sorted(anchors | {root}):
            if top.prefixlen > length:
                out.add(_at_length(top, length))
                continue
            blockers = [a for a in anchors if a != top and a.prefixlen <= length and a.subnet_of(top)]
            found = _free_below(top, length, blockers)
            if found is not None:
                out.add(found)
    return sorted(out, key=lambda p: (int(p.network_address), p.prefixlen))


def candidate_communities(env: PolicyEnv, constraint: Optional[RouteConstraint] = None) -> list:
    mentioned: set = set(env.extra_communities)
    for values in env.community_lists.values():
        mentioned.update(values)
    if constraint is not None:
        mentioned |= constraint.has_communities | constraint.lacks_communities
    ordered = sorted(mentioned)
    sets = [frozenset()]
    sets += [frozenset([c]) for c in ordered]
    if len(ordered) <= 6:
        sets += [frozenset(pair) for pair in itertools.combinations(ordered, 2)]
    sets.append(frozenset(ordered))
    if constraint is not None and constraint.has_communities:
        sets.append(constraint.has_communities)
    seen: set = set()
    unique = []
    for s in sets:
        if s not in seen:
            seen.add(s)
            unique.append(s)
    return unique


def build_test_space(env: PolicyEnv, constraint: Optional[RouteConstraint] = None,
                     limit: int = MAX_TEST_SPACE) -> TestSpace:
    prefixes = candidate_prefixes(env, constraint)
    comm_sets = candidate_communities(env, constraint)
    meds = sorted({0} | set(env.meds))
    protocols = list(Protocol)
    out: list = []
    for prefix, comms, med, proto in itertools.product(prefixes, comm_sets, meds, protocols):
        ann = RouteAnnouncement(prefix, comms, med, proto)
        if constraint is not None and not constraint.admits(ann):
            continue
        if len(out) >= limit:
            return TestSpace(out, truncated=True)
        out.append(ann)
    return TestSpace(out)


# ---------------------------------------------------------------------------
# search

def search(evaluate: Callable[[RouteAnnouncement], PolicyOutcome], space: Iterable[RouteAnnouncement],
           expected: Action, adds_community: Optional[Community] = None) -> Optional[Counterexample]:
    """First announcement in ``space`` whose treatment differs from ``expected``.

    With ``adds_community`` an accepted route must also carry that community
    and keep every community it arrived with.
    """
    for ann in space:
        outcome = evaluate(ann)
        actual = verdict(outcome)
        at = outcome.at_clause if isinstance(outcome, Denied) else None
        if actual is not expected:
            return Counterexample(ann, actual, expected, at)
        if adds_community is not None and isinstance(outcome, Accepted):
            comms = outcome.route.communities
            if adds_community not in comms or not ann.communities <= comms:
                return Counterexample(ann, actual, expected, None, outcome.route)
    return None


def search_policy(policy: RoutePolicy, env: PolicyEnv, constraint: RouteConstraint,
                  expected: Action) -> Optional[Counterexample]:
    space = build_test_space(env, constraint)
    if not len(space):
        raise UnsatisfiableConstraint("no announcement in the test space satisfies the constraint")
    return search(lambda ann: eval_policy(policy, env, ann), space, expected)
