"""IOS-style configuration subset.

Parsing is mode based, the way the device itself reads a file: a line is
first offered to the current configuration mode and falls back to global
mode when the current mode does not know it.  ``!`` returns to global mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from ipaddress import IPv4Address, IPv4Network
from typing import Optional

from cosynth.frontends import ParseResult, Severity, SyntaxDiagnostic, Vendor
from cosynth.ir import (
    Action,
    BgpNeighbor,
    Community,
    Interface,
    MatchCommunity,
    MatchPrefixList,
    MatchProtocol,
    OspfLink,
    PolicyClause,
    PrefixListEntry,
    Protocol,
    Redistribution,
    RouterConfig,
    RoutePolicy,
    SetCommunity,
    SetLocalPref,
    SetMed,
    canonicalize,
    validate_ir,
)

CLI_ONLY = ("configure terminal", "conf t", "write", "end")
BGP_ONLY = ("neighbor", "network", "bgp", "redistribute")


class _Bad(Exception):
    """A recognised statement with malformed arguments."""


class _Unknown(Exception):
    """The statement is not part of the current mode."""


def _mask_len(mask: str) -> int:
    try:
        return IPv4Network(f"0.0.0.0/{mask}").prefixlen
    except ValueError:
        raise _Bad(f"invalid subnet mask {mask}") from None


def _wildcard_net(addr: str, wildcard: str) -> IPv4Network:
    try:
        inverted = IPv4Address(int(IPv4Address(wildcard)) ^ 0xFFFFFFFF)
        return IPv4Network(f"{addr}/{inverted}", strict=False)
    except ValueError:
        raise _Bad(f"invalid wildcard {wildcard}") from None


def _addr(text: str) -> IPv4Address:
    try:
        return IPv4Address(text)
    except ValueError:
        raise _Bad(f"invalid IPv4 address {text}") from None


def _int(text: str, what: str) -> int:
    if not text.isdigit():
        raise _Bad(f"invalid {what} {text}")
    return int(text)


def _protocol(word: str) -> Protocol:
    try:
        return Protocol(word)
    except ValueError:
        raise _Bad(f"unsupported protocol {word}") from None


@dataclass
class _State:
    config: RouterConfig = field(default_factory=RouterConfig)
    neighbors: dict = field(default_factory=dict)
    neighbor_lines: dict = field(default_factory=dict)
    explicit_local_as: set = field(default_factory=set)
    ospf_costs: dict = field(default_factory=dict)
    ospf_enabled: set = field(default_factory=set)
    ospf_networks: list = field(default_factory=list)
    ospf_passive: set = field(default_factory=set)
    clause_lines: dict = field(default_factory=dict)
    mode: str = "global"
    iface: Optional[str] = None
    pending_iface: dict = field(default_factory=dict)
    clause: Optional[PolicyClause] = None
    prefix_seq: dict = field(default_factory=dict)


def parse_cisco(text: str) -> ParseResult:
    st = _State()
    diags: list[SyntaxDiagnostic] = []
    lines = text.splitlines()
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("!"):
            st.mode = "global"
            continue
        words = line.split()
        try:
            try:
                _in_mode(st, words, number)
            except _Unknown:
                st.mode = "global"
                _global(st, words, number)
        except _Bad as exc:
            diags.append(SyntaxDiagnostic(number, raw, str(exc), Severity.ERROR, Vendor.CISCO))
        except _Unknown:
            if words[0] in BGP_ONLY:
                diags.append(SyntaxDiagnostic(
                    number, raw, "statement outside the router bgp block", Severity.WARNING, Vendor.CISCO))
            else:
                diags.append(SyntaxDiagnostic(number, raw, "unrecognized statement", Severity.ERROR, Vendor.CISCO))
    _finish(st, diags, lines)
    diags.sort(key=lambda d: d.line_number)
    return ParseResult(st.config, diags)


def _in_mode(st: _State, w: list, number: int) -> None:
    if st.mode == "interface":
        _interface_line(st, w)
    elif st.mode == "bgp":
        _bgp_line(st, w, number)
    elif st.mode == "ospf":
        _ospf_line(st, w)
    elif st.mode == "route-map":
        _route_map_line(st, w)
    else:
        raise _Unknown


def _global(st: _State, w: list, number: int) -> None:
    c = st.config
    head = w[0]
    joined = " ".join(w)
    if head == "hostname" and len(w) == 2:
        c.name = w[1]
    elif head == "exit":
        st.mode = "global"
    elif joined in CLI_ONLY or joined.startswith("write "):
        raise _Bad("command-line command, not configuration")
    elif joined == "ip routing":
        pass
    elif head == "interface" and len(w) == 2:
        st.mode, st.iface = "interface", w[1]
        st.pending_iface.setdefault(w[1], None)
    elif head == "router" and len(w) == 3 and w[1] == "bgp":
        asn = _int(w[2], "AS number")
        if c.asn and c.asn != asn:
            raise _Bad("second router bgp process")
        c.asn = asn
        st.mode = "bgp"
    elif head == "router" and len(w) == 3 and w[1] == "ospf":
        _int(w[2], "process id")
        st.mode = "ospf"
    elif head == "route-map" and len(w) in (3, 4):
        _open_stanza(st, w, number)
    elif head == "ip" and len(w) > 1 and w[1] == "prefix-list":
        _prefix_list(st, w[2:])
    elif head == "ip" and len(w) > 1 and w[1] == "community-list":
        _community_list(st, w[2:])
    else:
        raise _Unknown


def _interface_line(st: _State, w: list) -> None:
    name = st.iface
    if w[:2] == ["ip", "address"] and len(w) == 4:
        st.pending_iface[name] = Interface(name, _addr(w[2]), _mask_len(w[3]))
    elif w[:3] == ["ip", "ospf", "cost"] and len(w) == 4:
        st.ospf_costs[name] = _int(w[3], "OSPF cost")
    elif w[:2] == ["ip", "ospf"] and len(w) == 5 and w[3] == "area":
        st.ospf_enabled.add(name)
    elif w[0] == "description" or w in (["shutdown"], ["no", "shutdown"]):
        pass
    else:
        raise _Unknown


def _neighbor(st: _State, peer: str, number: int) -> BgpNeighbor:
    address = _addr(peer)
    nbr = st.neighbors.get(address)
    if nbr is None:
        nbr = st.neighbors[address] = BgpNeighbor(address, 0, 0)
        st.neighbor_lines[address] = number
    return nbr


def _bgp_line(st: _State, w: list, number: int) -> None:
    c = st.config
    if w[:2] == ["bgp", "router-id"] and len(w) == 3:
        c.router_id = _addr(w[2])
    elif w == ["bgp", "log-neighbor-changes"]:
        pass
    elif w[0] == "neighbor" and len(w) >= 3:
        nbr = _neighbor(st, w[1], number)
        rest = w[2:]
        if rest[0] == "remote-as" and len(rest) == 2:
            nbr.remote_as = _int(rest[1], "AS number")
        elif rest[0] == "local-as" and len(rest) == 2:
            nbr.local_as = _int(rest[1], "AS number")
            st.explicit_local_as.add(nbr.peer_address)
        elif rest[0] == "route-map" and len(rest) == 3 and rest[2] in ("in", "out"):
            if rest[2] == "in":
                nbr.import_policy = rest[1]
            else:
                nbr.export_policy = rest[1]
        elif rest[0] in ("description", "send-community", "activate", "update-source"):
            pass
        else:
            raise _Bad("unsupported neighbor statement")
    elif w[0] == "network" and len(w) == 4 and w[2] == "mask":
        try:
            c.bgp_networks.append(IPv4Network(f"{w[1]}/{w[3]}"))
        except ValueError:
            raise _Bad("invalid network statement") from None
    elif w[0] == "network" and len(w) == 2 and "/" in w[1]:
        try:
            c.bgp_networks.append(IPv4Network(w[1]))
        except ValueError:
            raise _Bad("invalid network statement") from None
    elif w[0] == "redistribute" and len(w) >= 2:
        proto = _protocol(w[1])
        if proto is Protocol.BGP:
            raise _Bad("cannot redistribute bgp into itself")
        rest = w[2:]
        if proto is Protocol.OSPF and rest and rest[0].isdigit():
            rest = rest[1:]
        policy = None
        if rest:
            if len(rest) != 2 or rest[0] != "route-map":
                raise _Bad("unsupported redistribute options")
            policy = rest[1]
        c.redistributions.append(Redistribution(proto, policy))
    else:
        raise _Unknown


def _ospf_line(st: _State, w: list) -> None:
    if w[0] == "network" and len(w) == 5 and w[3] == "area":
        st.ospf_networks.append(_wildcard_net(w[1], w[2]))
    elif w[0] == "passive-interface" and len(w) == 2:
        st.ospf_passive.add(w[1])
    elif w[0] == "router-id" and len(w) == 2:
        _addr(w[1])
    else:
        raise _Unknown


def _open_stanza(st: _State, w: list, number: int) -> None:
    name, verb = w[1], w[2]
    if verb not in ("permit", "deny"):
        raise _Bad(f"route-map action must be permit or deny, not {verb}")
    seq = _int(w[3], "sequence number") if len(w) == 4 else 10
    policy = st.config.policies.setdefault(name, RoutePolicy(name))
    for clause in policy.clauses:
        if clause.seq == seq:
            if clause.action.value != verb:
                raise _Bad(f"route-map {name} sequence {seq} redefined with a different action")
            st.clause = clause
            break
    else:
        st.clause = PolicyClause(seq, Action(verb))
        policy.clauses.append(st.clause)
        policy.clauses.sort(key=lambda cl: cl.seq)
    st.clause_lines[(name, seq)] = number
    st.mode = "route-map"


def _route_map_line(st: _State, w: list) -> None:
    clause = st.clause
    if w[0] == "match":
        if w[1:4] == ["ip", "address", "prefix-list"] and len(w) == 5:
            clause.matches.append(MatchPrefixList(w[4]))
        elif w[1] == "community" and len(w) == 3:
            if ":" in w[2]:
                raise _Bad("match community takes a community-list, not a community value")
            clause.matches.append(MatchCommunity(w[2]))
        elif w[1] in ("source-protocol", "protocol") and len(w) == 3:
            clause.matches.append(MatchProtocol(_protocol(w[2])))
        else:
            raise _Bad("unsupported match condition")
    elif w[0] == "set":
        if w[1] in ("metric", "med") and len(w) == 3:
            clause.sets.append(SetMed(_int(w[2], "metric")))
        elif w[1] == "local-preference" and len(w) == 3:
            clause.sets.append(SetLocalPref(_int(w[2], "local-preference")))
        elif w[1] == "community" and len(w) >= 3:
            additive = w[-1] == "additive"
            values = w[2:-1] if additive else w[2:]
            if not values:
                raise _Bad("set community needs at least one value")
            try:
                comms = frozenset(Community.parse(v) for v in values)
            except ValueError as exc:
                raise _Bad(str(exc)) from None
            clause.sets.append(SetCommunity(comms, additive))
        else:
            raise _Bad("unsupported set action")
    elif w[0] == "description":
        pass
    else:
        raise _Unknown


def _prefix_list(st: _State, w: list) -> None:
    if not w:
        raise _Bad("prefix-list needs a name")
    name, rest = w[0], w[1:]
    entries = st.config.prefix_lists.setdefault(name, [])
    if rest[:1] == ["seq"]:
        if len(rest) < 2:
            raise _Bad("missing sequence number")
        seq = _int(rest[1], "sequence number")
        rest = rest[2:]
    else:
        seq = st.prefix_seq.get(name, 0) + 5
    if len(rest) < 2 or rest[0] not in ("permit", "deny"):
        raise _Bad("prefix-list entry needs permit or deny and a prefix")
    try:
        prefix = IPv4Network(rest[1])
    except ValueError:
        raise _Bad(f"invalid prefix {rest[1]}") from None
    ge = le = None
    opts = rest[2:]
    while opts:
        if len(opts) < 2 or opts[0] not in ("ge", "le"):
            raise _Bad("expected ge or le followed by a length")
        value = _int(opts[1], "prefix length")
        if value > 32:
            raise _Bad(f"prefix length {value} exceeds 32")
        if opts[0] == "ge":
            ge = value
        else:
            le = value
        opts = opts[2:]
    if ge is not None and ge < prefix.prefixlen:
        raise _Bad("ge must be at least the prefix length")
    if le is not None and le < (ge if ge is not None else prefix.prefixlen):
        raise _Bad("le must be at least ge and the prefix length")
    if any(e.seq == seq for e in entries):
        raise _Bad(f"duplicate sequence number {seq}")
    entries.append(PrefixListEntry(seq, Action(rest[0]), prefix, ge, le))
    st.prefix_seq[name] = max(seq, st.prefix_seq.get(name, 0))


def _community_list(st: _State, w: list) -> None:
    if w[:1] == ["expanded"]:
        raise _Bad("expanded community-lists are not supported")
    if w[:1] == ["standard"]:
        w = w[1:]
    if len(w) < 3 or w[1] != "permit":
        raise _Bad("community-list entry needs a name, permit and values")
    try:
        values = [Community.parse(v) for v in w[2:]]
    except ValueError as exc:
        raise _Bad(str(exc)) from None
    st.config.community_lists.setdefault(w[0], []).extend(values)


def _finish(st: _State, diags: list, lines: list) -> None:
    c = st.config
    c.interfaces = [iface for iface in st.pending_iface.values() if iface is not None]
    for address, nbr in st.neighbors.items():
        number = st.neighbor_lines[address]
        if nbr.remote_as == 0:
            diags.append(SyntaxDiagnostic(number, lines[number - 1], "neighbor has no remote-as",
                                          Severity.ERROR, Vendor.CISCO))
        if address not in st.explicit_local_as:
            nbr.local_as = c.asn
        c.bgp_neighbors.append(nbr)
    enabled = set(st.ospf_enabled)
    for iface in c.interfaces:
        if any(iface.address in net for net in st.ospf_networks):
            enabled.add(iface.name)
    for name in sorted(enabled | (st.ospf_passive & {i.name for i in c.interfaces})):
        c.ospf.append(OspfLink(name, st.ospf_costs.get(name, 1), name in st.ospf_passive))
    _reference_warnings(st, diags, lines)


def _reference_warnings(st: _State, diags: list, lines: list) -> None:
    c = st.config
    for address, nbr in st.neighbors.items():
        for ref in (nbr.import_policy, nbr.export_policy):
            if ref is not None and ref not in c.policies:
                number = st.neighbor_lines[address]
                diags.append(SyntaxDiagnostic(number, lines[number - 1], f"undefined route-map {ref}",
                                              Severity.WARNING, Vendor.CISCO))
    for (name, seq), number in st.clause_lines.items():
        policy = c.policies[name]
        clause = next(cl for cl in policy.clauses if cl.seq == seq)
        for m in clause.matches:
            missing = (
                isinstance(m, MatchPrefixList) and m.name not in c.prefix_lists
                or isinstance(m, MatchCommunity) and m.list_id not in c.community_lists
            )
            if missing:
                label = m.name if isinstance(m, MatchPrefixList) else m.list_id
                diags.append(SyntaxDiagnostic(number, lines[number - 1], f"undefined list {label}",
                                              Severity.WARNING, Vendor.CISCO))


# ---------------------------------------------------------------------------
# printer

def _mask(length: int) -> str:
    return str(IPv4Network(f"0.0.0.0/{length}").netmask)


def _prefix_entry(e: PrefixListEntry) -> str:
    low, high = e.length_range
    text = f"{e.prefix}"
    length = e.prefix.prefixlen
    if low != length:
        text += f" ge {low}"
    default_high = 32 if low != length else length
    if high != default_high:
        text += f" le {high}"
    return text


def print_cisco(config: RouterConfig) -> str:
    problems = validate_ir(config)
    assert not problems, f"cannot print invalid configuration: {problems}"
    assert not config.redistribute_via_export, "export-driven redistribution has no IOS form"
    c = canonicalize(config)
    out: list[str] = []
    if c.name:
        out += [f"hostname {c.name}", "!"]
    ospf_names = {link.interface_name: link for link in c.ospf}
    for iface in c.interfaces:
        out.append(f"interface {iface.name}")
        out.append(f" ip address {iface.address} {_mask(iface.mask_length)}")
        if iface.name in ospf_names:
            out.append(f" ip ospf cost {ospf_names[iface.name].cost}")
        out.append("!")
    if c.ospf:
        out.append("router ospf 1")
        for link in c.ospf:
            out.append(f" network {c.interface(link.interface_name).address} 0.0.0.0 area 0")
        for link in c.ospf:
            if link.passive:
                out.append(f" passive-interface {link.interface_name}")
        out.append("!")
    if c.asn:
        out.append(f"router bgp {c.asn}")
        if c.router_id is not None:
            out.append(f" bgp router-id {c.router_id}")
        for net in c.bgp_networks:
            out.append(f" network {net.network_address} mask {net.netmask}")
        for nbr in c.bgp_neighbors:
            out.append(f" neighbor {nbr.peer_address} remote-as {nbr.remote_as}")
            if nbr.local_as != c.asn:
                out.append(f" neighbor {nbr.peer_address} local-as {nbr.local_as}")
            if nbr.import_policy:
                out.append(f" neighbor {nbr.peer_address} route-map {nbr.import_policy} in")
            if nbr.export_policy:
                out.append(f" neighbor {nbr.peer_address} route-map {nbr.export_policy} out")
        for red in c.redistributions:
            line = f" redistribute {red.protocol.value}"
            if red.protocol is Protocol.OSPF:
                line += " 1"
            if red.policy:
                line += f" route-map {red.policy}"
            out.append(line)
        out.append("!")
    for name, entries in c.prefix_lists.items():
        for e in entries:
            out.append(f"ip prefix-list {name} seq {e.seq} {e.action.value} {_prefix_entry(e)}")
    if c.prefix_lists:
        out.append("!")
    for name, values in c.community_lists.items():
        for v in values:
            out.append(f"ip community-list standard {name} permit {v}")
    if c.community_lists:
        out.append("!")
    for name, policy in c.policies.items():
        assert policy.default_action is Action.DENY, "route-maps always deny by default"
        assert policy.clauses, f"route-map {name} has no stanzas"
        for clause in policy.clauses:
            out.append(f"route-map {name} {clause.action.value} {clause.seq}")
            for m in clause.matches:
                if isinstance(m, MatchPrefixList):
                    out.append(f" match ip address prefix-list {m.name}")
                elif isinstance(m, MatchCommunity):
                    out.append(f" match community {m.list_id}")
                else:
                    out.append(f" match source-protocol {m.protocol.value}")
            for s in clause.sets:
                if isinstance(s, SetMed):
                    out.append(f" set metric {s.value}")
                elif isinstance(s, SetLocalPref):
                    out.append(f" set local-preference {s.value}")
                else:
                    values = " ".join(str(v) for v in sorted(s.values))
                    out.append(f" set community {values}{' additive' if s.additive else ''}")
        out.append("!")
    return "\n".join(out) + "\n"
