"""Vendor-neutral router configuration model.

Parsers for both dialects produce a :class:`RouterConfig`; the differ, the
policy engine and the simulator only ever look at this representation.
"""
from __future__ import annotations

import copy
import dataclasses
import enum
from dataclasses import dataclass, field
from ipaddress import IPv4Address, IPv4Network
from typing import Any, Iterable, Optional, Union


class Action(str, enum.Enum):
    PERMIT = "permit"
    DENY = "deny"

    def __str__(self) -> str:
        return self.value


class Protocol(str, enum.Enum):
    BGP = "bgp"
    OSPF = "ospf"
    CONNECTED = "connected"
    STATIC = "static"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Community:
    high: int
    low: int

    @classmethod
    def parse(cls, text: str) -> "Community":
        high, sep, low = text.strip().partition(":")
        if not sep or not high.isdigit() or not low.isdigit():
            raise ValueError(f"invalid community value {text!r}")
        value = cls(int(high), int(low))
        if value.high > 0xFFFF or value.low > 0xFFFF:
            raise ValueError(f"community value out of range {text!r}")
        return value

    def __str__(self) -> str:
        return f"{self.high}:{self.low}"


@dataclass
class Interface:
    name: str
    address: IPv4Address
    mask_length: int

    @property
    def network(self) -> IPv4Network:
        return IPv4Network((self.address, self.mask_length), strict=False)


@dataclass
class BgpNeighbor:
    peer_address: IPv4Address
    remote_as: int
    local_as: int
    import_policy: Optional[str] = None
    export_policy: Optional[str] = None


@dataclass(frozen=True, order=True)
class Redistribution:
    protocol: Protocol
    policy: Optional[str] = None


@dataclass
class OspfLink:
    interface_name: str
    cost: int = 1
    passive: bool = False


@dataclass(frozen=True)
class MatchPrefixList:
    name: str


@dataclass(frozen=True)
class MatchCommunity:
    list_id: str


@dataclass(frozen=True)
class MatchProtocol:
    protocol: Protocol


MatchCond = Union[MatchPrefixList, MatchCommunity, MatchProtocol]


@dataclass(frozen=True)
class SetMed:
    value: int


@dataclass(frozen=True)
class SetCommunity:
    values: frozenset
    additive: bool = False


@dataclass(frozen=True)
class SetLocalPref:
    value: int


SetAction = Union[SetMed, SetCommunity, SetLocalPref]


@dataclass
class PolicyClause:
    seq: int
    action: Action
    matches: list = field(default_factory=list)
    sets: list = field(default_factory=list)


@dataclass
class RoutePolicy:
    name: str
    clauses: list = field(default_factory=list)
    default_action: Action = Action.DENY


@dataclass
class PrefixListEntry:
    seq: int
    action: Action
    prefix: IPv4Network
    ge: Optional[int] = None
    le: Optional[int] = None

    @property
    def length_range(self) -> tuple[int, int]:
        """Inclusive (low, high) length bounds after applying the defaults."""
        low = self.prefix.prefixlen if self.ge is None else self.ge
        if self.le is not None:
            high = self.le
        elif self.ge is not None:
            high = 32
        else:
            high = self.prefix.prefixlen
        return low, high

    def covers(self, prefix: IPv4Network) -> bool:
        low, high = self.length_range
        if not low <= prefix.prefixlen <= high:
            return False
        if prefix.prefixlen < self.prefix.prefixlen:
            return False
        return prefix.supernet(new_prefix=self.prefix.prefixlen) == self.prefix


@dataclass
class RouterConfig:
    name: str = ""
    asn: int = 0
    router_id: Optional[IPv4Address] = None
    interfaces: list = field(default_factory=list)
    bgp_neighbors: list = field(default_factory=list)
    bgp_networks: list = field(default_factory=list)
    redistributions: list = field(default_factory=list)
    ospf: list = field(default_factory=list)
    policies: dict = field(default_factory=dict)
    prefix_lists: dict = field(default_factory=dict)
    community_lists: dict = field(default_factory=dict)
    # Junos-style: every neighbor export policy sees non-BGP routes, and a
    # neighbor without one advertises BGP-learned routes only.
    redistribute_via_export: bool = False

    def interface(self, name: str) -> Optional[Interface]:
        for iface in self.interfaces:
            if iface.name == name:
                return iface
        return None

    def neighbor(self, peer: Union[str, IPv4Address]) -> Optional[BgpNeighbor]:
        peer = IPv4Address(peer)
        for nbr in self.bgp_neighbors:
            if nbr.peer_address == peer:
                return nbr
        return None

    def ospf_link(self, interface_name: str) -> Optional[OspfLink]:
        for link in self.ospf:
            if link.interface_name == interface_name:
                return link
        return None


@dataclass(frozen=True)
class IrViolation:
    field: str
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule} ({self.detail})"


def _match_key(m: MatchCond) -> tuple:
    if isinstance(m, MatchPrefixList):
        return (0, m.name)
    if isinstance(m, MatchCommunity):
        return (1, m.list_id)
    return (2, m.protocol.value)


def _canonical_set(action: SetAction) -> SetAction:
    if isinstance(action, SetCommunity):
        return SetCommunity(frozenset(action.values), action.additive)
    return action


def canonicalize(config: RouterConfig) -> RouterConfig:
    """Deterministic normal form; equal behaviour in, identical value out."""
    c = copy.deepcopy(config)
    c.interfaces = sorted(c.interfaces, key=lambda i: i.name)
    c.bgp_neighbors = sorted(c.bgp_neighbors, key=lambda n: int(n.peer_address))
    c.bgp_networks = sorted(set(c.bgp_networks), key=lambda p: (int(p.network_address), p.prefixlen))
    c.redistributions = sorted(
        set(c.redistributions), key=lambda r: (r.protocol.value, r.policy or "")
    )
    c.ospf = sorted(c.ospf, key=lambda o: o.interface_name)
    policies = {}
    for name in sorted(c.policies):
        pol = c.policies[name]
        clauses = []
        for clause in sorted(pol.clauses, key=lambda cl: cl.seq):
            matches = sorted(set(clause.matches), key=_match_key)
            clauses.append(
                PolicyClause(clause.seq, clause.action, matches, [_canonical_set(s) for s in clause.sets])
            )
        policies[name] = RoutePolicy(pol.name, clauses, pol.default_action)
    c.policies = policies
    prefix_lists = {}
    for name in sorted(c.prefix_lists):
        entries = []
        for e in sorted(c.prefix_lists[name], key=lambda e: e.seq):
            low, high = e.length_range
            entries.append(PrefixListEntry(e.seq, e.action, e.prefix, low, high))
        prefix_lists[name] = entries
    c.prefix_lists = prefix_lists
    c.community_lists = {name: sorted(set(c.community_lists[name])) for name in sorted(c.community_lists)}
    return c


def validate_ir(config: RouterConfig) -> list[IrViolation]:
    out: list[IrViolation] = []

    def bad(where: str, rule: str, detail: str) -> None:
        out.append(IrViolation(where, rule, detail))

    if config.asn <= 0:
        bad("asn", "asn must be positive", str(config.asn))
    seen: set[str] = set()
    for iface in config.interfaces:
        if iface.name in seen:
            bad("interfaces", "duplicate interface name", iface.name)
        seen.add(iface.name)
        if not 0 <= iface.mask_length <= 32:
            bad("interfaces", "mask_length must be within 0..32", f"{iface.name} /{iface.mask_length}")
    peers: set[IPv4Address] = set()
    for nbr in config.bgp_neighbors:
        if nbr.peer_address in peers:
            bad("bgp_neighbors", "duplicate peer_address", str(nbr.peer_address))
        peers.add(nbr.peer_address)
        if nbr.remote_as <= 0:
            bad("bgp_neighbors", "remote_as must be positive", str(nbr.peer_address))
        if nbr.local_as <= 0:
            bad("bgp_neighbors", "local_as must be positive", str(nbr.peer_address))
        for ref in (nbr.import_policy, nbr.export_policy):
            if ref is not None and ref not in config.policies:
                bad("bgp_neighbors", "undefined policy", ref)
    for red in config.redistributions:
        if red.policy is not None and red.policy not in config.policies:
            bad("redistributions", "undefined policy", red.policy)
    ospf_seen: set[str] = set()
    for link in config.ospf:
        if link.interface_name in ospf_seen:
            bad("ospf", "duplicate OSPF link", link.interface_name)
        ospf_seen.add(link.interface_name)
        if link.interface_name not in seen:
            bad("ospf", "OSPF link on undefined interface", link.interface_name)
        if link.cost < 0:
            bad("ospf", "cost must be non-negative", link.interface_name)
    for name, pol in config.policies.items():
        if pol.name != name:
            bad("policies", "policy key does not match policy name", f"{name} != {pol.name}")
        last = 0
        for clause in pol.clauses:
            if clause.seq <= last:
                bad("policies", "clause sequence numbers must strictly increase", f"{name} {clause.seq}")
            last = clause.seq
            for m in clause.matches:
                if isinstance(m, MatchPrefixList) and m.name not in config.prefix_lists:
                    bad("policies", "undefined prefix-list", m.name)
                elif isinstance(m, MatchCommunity) and m.list_id not in config.community_lists:
                    bad("policies", "undefined community-list", m.list_id)
            for s in clause.sets:
                if isinstance(s, SetMed) and s.value < 0:
                    bad("policies", "med must be non-negative", f"{name} {clause.seq}")
    for name, entries in config.prefix_lists.items():
        seqs: set[int] = set()
        for e in entries:
            if e.seq in seqs:
                bad("prefix_lists", "duplicate sequence number", f"{name} {e.seq}")
            seqs.add(e.seq)
            length = e.prefix.prefixlen
            if e.ge is not None and e.ge < length:
                bad("prefix_lists", "ge < prefix_length", f"{name} {e.prefix} ge {e.ge}")
            if e.le is not None and e.le > 32:
                bad("prefix_lists", "le > 32", f"{name} {e.prefix} le {e.le}")
            if e.le is not None and e.le < (length if e.ge is None else e.ge):
                bad("prefix_lists", "le < ge", f"{name} {e.prefix} le {e.le}")
    for name, values in config.community_lists.items():
        for v in values:
            if not (0 <= v.high <= 0xFFFF and 0 <= v.low <= 0xFFFF):
                bad("community_lists", "community out of range", f"{name} {v}")
    return out


# ---------------------------------------------------------------------------
# JSON

def to_jsonable(obj: Any) -> Any:
    """Plain JSON-ready structure for any model object in this package."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (IPv4Address, IPv4Network, Community)):
        return str(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        if isinstance(obj, (MatchPrefixList, MatchCommunity, MatchProtocol, SetMed, SetCommunity, SetLocalPref)):
            out["kind"] = type(obj).__name__
        for f in dataclasses.fields(obj):
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return [to_jsonable(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def _opt_addr(value: Optional[str]) -> Optional[IPv4Address]:
    return None if value is None else IPv4Address(value)


def _match_from(d: dict) -> MatchCond:
    kind = d["kind"]
    if kind == "MatchPrefixList":
        return MatchPrefixList(d["name"])
    if kind == "MatchCommunity":
        return MatchCommunity(d["list_id"])
    if kind == "MatchProtocol":
        return MatchProtocol(Protocol(d["protocol"]))
    raise ValueError(f"unknown match kind {kind!r}")


def _set_from(d: dict) -> SetAction:
    kind = d["kind"]
    if kind == "SetMed":
        return SetMed(d["value"])
    if kind == "SetCommunity":
        return SetCommunity(frozenset(Community.parse(v) for v in d["values"]), d["additive"])
    if kind == "SetLocalPref":
        return SetLocalPref(d["value"])
    raise ValueError(f"unknown set kind {kind!r}")


def config_from_dict(d: dict) -> RouterConfig:
    return RouterConfig(
        name=d.get("name", ""),
        asn=d.get("asn", 0),
        router_id=_opt_addr(d.get("router_id")),
        interfaces=[Interface(i["name"], IPv4Address(i["address"]), i["mask_length"]) for i in d.get("interfaces", [])],
        bgp_neighbors=[
            BgpNeighbor(IPv4Address(n["peer_address"]), n["remote_as"], n["local_as"],
                        n.get("import_policy"), n.get("export_policy"))
            for n in d.get("bgp_neighbors", [])
        ],
        bgp_networks=[IPv4Network(p) for p in d.get("bgp_networks", [])],
        redistributions=[Redistribution(Protocol(r["protocol"]), r.get("policy")) for r in d.get("redistributions", [])],
        ospf=[OspfLink(o["interface_name"], o["cost"], o["passive"]) for o in d.get("ospf", [])],
        policies={
            name: RoutePolicy(
                p["name"],
                [
                    PolicyClause(c["seq"], Action(c["action"]),
                                 [_match_from(m) for m in c["matches"]], [_set_from(s) for s in c["sets"]])
                    for c in p["clauses"]
                ],
                Action(p["default_action"]),
            )
            for name, p in d.get("policies", {}).items()
        },
        prefix_lists={
            name: [PrefixListEntry(e["seq"], Action(e["action"]), IPv4Network(e["prefix"]), e.get("ge"), e.get("le"))
                   for e in entries]
            for name, entries in d.get("prefix_lists", {}).items()
        },
        community_lists={
            name: [Community.parse(v) for v in values] for name, values in d.get("community_lists", {}).items()
        },
        redistribute_via_export=d.get("redistribute_via_export", False),
    )


def parse_prefix(text: str) -> IPv4Network:
    """Strict IPv4 prefix: host bits must be zero."""
    return IPv4Network(text, strict=True)


def all_policy_refs(config: RouterConfig) -> Iterable[str]:
    for nbr in config.bgp_neighbors:
        if nbr.import_policy:
            yield nbr.import_policy
        if nbr.export_policy:
            yield nbr.export_policy
    for red in config.redistributions:
        if red.policy:
            yield red.policy
