"""Junos curly-brace configuration subset."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from ipaddress import IPv4Address, IPv4Interface, IPv4Network
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
    RouterConfig,
    RoutePolicy,
    SetCommunity,
    SetLocalPref,
    SetMed,
    canonicalize,
    validate_ir,
)

_TOKEN = re.compile(r'"[^"]*"|[{};\[\]]|[^\s{};\[\]"]+')

_PROTOCOLS = {
    "bgp": Protocol.BGP,
    "ospf": Protocol.OSPF,
    "direct": Protocol.CONNECTED,
    "static": Protocol.STATIC,
}
_PROTOCOL_NAMES = {v: k for k, v in _PROTOCOLS.items()}


@dataclass
class Node:
    words: list
    line: int
    children: Optional[list] = None

    @property
    def key(self) -> str:
        return self.words[0] if self.words else ""


class _Bad(Exception):
    pass


def _tokenize(text: str) -> list:
    tokens = []
    in_comment = False
    for number, line in enumerate(text.splitlines(), start=1):
        pos = 0
        if in_comment:
            end = line.find("*/")
            if end < 0:
                continue
            pos, in_comment = end + 2, False
        while pos < len(line):
            rest = line[pos:]
            stripped = rest.lstrip()
            pos += len(rest) - len(stripped)
            if not stripped:
                break
            if stripped.startswith("#"):
                break
            if stripped.startswith("/*"):
                end = line.find("*/", pos + 2)
                if end < 0:
                    in_comment = True
                    break
                pos = end + 2
                continue
            m = _TOKEN.match(line, pos)
            tokens.append((m.group(0).strip('"'), number))
            pos = m.end()
    return tokens


def _build_tree(tokens: list, lines: list, diags: list) -> list:
    root: list = []
    stack: list = [root]
    words: list = []
    first_line = 0
    for tok, number in tokens:
        if tok == ";":
            if words:
                stack[-1].append(Node(words, first_line))
            words = []
        elif tok == "{":
            node = Node(words, first_line or number, [])
            stack[-1].append(node)
            stack.append(node.children)
            words = []
        elif tok == "}":
            if words:
                diags.append(_diag(lines, first_line, "missing semicolon", " ".join(words)))
                words = []
            if len(stack) == 1:
                diags.append(_diag(lines, number, "unbalanced closing brace", "}"))
            else:
                stack.pop()
        else:
            if not words:
                first_line = number
            words.append(tok)
    if words:
        diags.append(_diag(lines, first_line, "missing semicolon", " ".join(words)))
    if len(stack) > 1:
        last = tokens[-1][1] if tokens else 1
        diags.append(_diag(lines, last, "missing closing brace", ""))
    return root


def _diag(lines: list, number: int, message: str, statement: str,
          severity: Severity = Severity.ERROR) -> SyntaxDiagnostic:
    text = lines[number - 1] if 0 < number <= len(lines) else ""
    return SyntaxDiagnostic(number, text, message, severity, Vendor.JUNIPER, statement)


@dataclass
class _State:
    lines: list
    diags: list = field(default_factory=list)
    config: RouterConfig = field(default_factory=lambda: RouterConfig(redistribute_via_export=True))
    exact_lists: dict = field(default_factory=dict)
    filtered_refs: dict = field(default_factory=dict)
    communities: dict = field(default_factory=dict)
    match_refs: set = field(default_factory=set)
    set_refs: list = field(default_factory=list)
    neighbor_nodes: list = field(default_factory=list)

    def bad(self, node: Node, path: list, message: str) -> None:
        self.diags.append(_diag(self.lines, node.line, message, " ".join(path + node.words)))

    def warn(self, node: Node, path: list, message: str) -> None:
        self.diags.append(_diag(self.lines, node.line, message, " ".join(path + node.words), Severity.WARNING))


def parse_juniper(text: str) -> ParseResult:
    lines = text.splitlines()
    st = _State(lines)
    tree = _build_tree(_tokenize(text), lines, st.diags)
    handlers = {
        "system": _system,
        "interfaces": _interfaces,
        "routing-options": _routing_options,
        "protocols": _protocols,
        "policy-options": _policy_options,
    }
    for node in tree:
        handler = handlers.get(node.key)
        if handler is None or node.children is None or len(node.words) != 1:
            st.bad(node, [], "unrecognized statement")
            continue
        handler(st, node, [node.key])
    _finish(st)
    st.diags.sort(key=lambda d: d.line_number)
    return ParseResult(st.config, st.diags)


def _leaf(node: Node, size: int) -> bool:
    return node.children is None and len(node.words) == size


def _children(st: _State, node: Node, path: list) -> list:
    if node.children is None:
        st.bad(node, path, "expected a block")
        return []
    return node.children


def _system(st: _State, node: Node, path: list) -> None:
    for child in node.children:
        if child.key == "host-name" and _leaf(child, 2):
            st.config.name = child.words[1]
        else:
            st.bad(child, path, "unrecognized statement")


def _interfaces(st: _State, node: Node, path: list) -> None:
    for phys in node.children:
        if phys.children is None or len(phys.words) != 1:
            st.bad(phys, path, "unrecognized statement")
            continue
        for unit in phys.children:
            here = path + phys.words
            if unit.key == "description":
                continue
            if unit.key != "unit" or len(unit.words) != 2 or unit.children is None or not unit.words[1].isdigit():
                st.bad(unit, here, "unrecognized statement")
                continue
            name = f"{phys.words[0]}.{unit.words[1]}"
            for fam in unit.children:
                upath = here + unit.words
                if fam.key == "description":
                    continue
                if fam.words != ["family", "inet"] or fam.children is None:
                    st.bad(fam, upath, "unrecognized statement")
                    continue
                for addr in fam.children:
                    if addr.key == "address" and _leaf(addr, 2):
                        try:
                            iface = IPv4Interface(addr.words[1])
                        except ValueError:
                            st.bad(addr, upath + fam.words, "invalid interface address")
                            continue
                        if "/" not in addr.words[1]:
                            st.bad(addr, upath + fam.words, "interface address needs a prefix length")
                            continue
                        st.config.interfaces.append(Interface(name, iface.ip, iface.network.prefixlen))
                    else:
                        st.bad(addr, upath + fam.words, "unrecognized statement")


def _routing_options(st: _State, node: Node, path: list) -> None:
    for child in node.children:
        try:
            if child.key == "router-id" and _leaf(child, 2):
                st.config.router_id = IPv4Address(child.words[1])
            elif child.key == "autonomous-system" and _leaf(child, 2) and child.words[1].isdigit():
                st.config.asn = int(child.words[1])
            else:
                st.bad(child, path, "unrecognized statement")
        except ValueError:
            st.bad(child, path, "invalid router-id")


def _protocols(st: _State, node: Node, path: list) -> None:
    for child in node.children:
        if child.words == ["bgp"] and child.children is not None:
            _bgp(st, child, path + ["bgp"])
        elif child.words == ["ospf"] and child.children is not None:
            _ospf(st, child, path + ["ospf"])
        else:
            st.bad(child, path, "unrecognized statement")


_PEER_KEYS = ("peer-as", "local-as", "import", "export")


def _peer_setting(st: _State, node: Node, path: list, into: dict) -> bool:
    if node.key not in _PEER_KEYS:
        return False
    if not _leaf(node, 2) or node.words[1] == "[":
        st.bad(node, path, f"{node.key} takes exactly one value")
        return True
    value = node.words[1]
    if node.key in ("peer-as", "local-as"):
        if not value.isdigit() or int(value) == 0:
            st.bad(node, path, "invalid AS number")
            return True
        into[node.key] = int(value)
    else:
        into[node.key] = value
    return True


def _bgp(st: _State, node: Node, path: list) -> None:
    for group in node.children:
        if group.key != "group" or len(group.words) != 2 or group.children is None:
            st.bad(group, path, "unrecognized statement")
            continue
        gpath = path + group.words
        inherited: dict = {}
        neighbors = []
        for child in group.children:
            if _peer_setting(st, child, gpath, inherited):
                continue
            if child.key == "type" and _leaf(child, 2) and child.words[1] in ("external", "internal"):
                continue
            if child.key == "description":
                continue
            if child.key == "neighbor" and len(child.words) == 2:
                neighbors.append(child)
                continue
            st.bad(child, gpath, "unrecognized statement")
        for nbr_node in neighbors:
            settings = dict(inherited)
            for child in nbr_node.children or []:
                if child.key == "description":
                    continue
                if not _peer_setting(st, child, gpath + nbr_node.words, settings):
                    st.bad(child, gpath + nbr_node.words, "unrecognized statement")
            try:
                peer = IPv4Address(nbr_node.words[1])
            except ValueError:
                st.bad(nbr_node, gpath, "invalid neighbor address")
                continue
            st.neighbor_nodes.append((nbr_node, gpath, settings, peer))


def _ospf(st: _State, node: Node, path: list) -> None:
    for area in node.children:
        if area.key != "area" or len(area.words) != 2 or area.children is None:
            st.bad(area, path, "unrecognized statement")
            continue
        apath = path + area.words
        for iface in area.children:
            if iface.key != "interface" or len(iface.words) != 2:
                st.bad(iface, apath, "unrecognized statement")
                continue
            link = OspfLink(iface.words[1])
            for opt in iface.children or []:
                if opt.words == ["passive"]:
                    link.passive = True
                elif opt.key == "metric" and _leaf(opt, 2) and opt.words[1].isdigit():
                    link.cost = int(opt.words[1])
                else:
                    st.bad(opt, apath + iface.words, "unrecognized statement")
            st.config.ospf.append(link)


def _policy_options(st: _State, node: Node, path: list) -> None:
    for child in node.children:
        try:
            if child.key == "prefix-list" and len(child.words) == 2:
                _prefix_list(st, child, path)
            elif child.key == "route-filter-list" and len(child.words) == 2:
                _route_filter_list(st, child, path)
            elif child.key == "community" and len(child.words) >= 4 and child.words[2] == "members":
                _community(st, child, path)
            elif child.key == "policy-statement" and len(child.words) == 2 and child.children is not None:
                _policy(st, child, path)
            else:
                st.bad(child, path, "unrecognized statement")
        except _Bad as exc:
            st.bad(child, path, str(exc))


def _prefix_list(st: _State, node: Node, path: list) -> None:
    name = node.words[1]
    entries = []
    for item in _children(st, node, path):
        if not _leaf(item, 1):
            st.bad(item, path + node.words, "unrecognized statement")
            continue
        try:
            prefix = IPv4Network(item.words[0])
        except ValueError:
            st.bad(item, path + node.words, "invalid prefix")
            continue
        entries.append(prefix)
    st.exact_lists[name] = entries


def _filter_range(length: int, words: list) -> tuple:
    """Prefix-length bounds for a Junos match-type qualifier."""
    if words == ["exact"]:
        return length, length
    if words == ["orlonger"]:
        return length, 32
    if words == ["longer"]:
        if length == 32:
            raise _Bad("longer cannot apply to a /32")
        return length + 1, 32
    if len(words) == 2 and words[0] == "upto" and re.fullmatch(r"/\d+", words[1]):
        high = int(words[1][1:])
        if not length <= high <= 32:
            raise _Bad("upto length out of range")
        return length, high
    if len(words) == 2 and words[0] == "prefix-length-range" and re.fullmatch(r"/\d+-/\d+", words[1]):
        low, high = (int(x) for x in words[1].replace("/", "").split("-"))
        if not length <= low <= high <= 32:
            raise _Bad("prefix-length-range out of range")
        return low, high
    raise _Bad("unsupported match type")


def _route_filter_entries(st: _State, items: list, path: list) -> list:
    entries = []
    for item in items:
        if item.children is not None or len(item.words) < 2:
            st.bad(item, path, "unrecognized statement")
            continue
        try:
            prefix = IPv4Network(item.words[0])
            low, high = _filter_range(prefix.prefixlen, item.words[1:])
        except ValueError:
            st.bad(item, path, "invalid prefix")
            continue
        except _Bad as exc:
            st.bad(item, path, str(exc))
            continue
        entries.append(PrefixListEntry(5 * (len(entries) + 1), Action.PERMIT, prefix, low, high))
    return entries


def _route_filter_list(st: _State, node: Node, path: list) -> None:
    name = node.words[1]
    st.config.prefix_lists[name] = _route_filter_entries(st, _children(st, node, path), path + node.words)


def _community(st: _State, node: Node, path: list) -> None:
    values = node.words[3:]
    if values[0] == "[":
        if values[-1] != "]":
            raise _Bad("unterminated member list")
        values = values[1:-1]
    if node.children is not None or not values:
        raise _Bad("community needs members")
    try:
        st.communities[node.words[1]] = [Community.parse(v) for v in values]
    except ValueError as exc:
        raise _Bad(str(exc)) from None


def _policy(st: _State, node: Node, path: list) -> None:
    name = node.words[1]
    ppath = path + node.words
    policy = RoutePolicy(name)
    position = 0
    for child in node.children:
        if child.key == "term" and len(child.words) == 2 and child.children is not None:
            position += 1
            clause = _term(st, child, ppath, name, position)
            if clause is not None:
                policy.clauses.append(clause)
        elif child.key == "then" and _leaf(child, 2) and child.words[1] in ("accept", "reject"):
            policy.default_action = Action.PERMIT if child.words[1] == "accept" else Action.DENY
        else:
            st.bad(child, ppath, "unrecognized statement")
    seqs = [cl.seq for cl in policy.clauses]
    if seqs != sorted(set(seqs)):
        for i, clause in enumerate(policy.clauses, start=1):
            clause.seq = 10 * i
    st.config.policies[name] = policy


def _term(st: _State, node: Node, path: list, policy: str, position: int) -> Optional[PolicyClause]:
    term = node.words[1]
    tpath = path + node.words
    seq = int(term) if term.isdigit() and int(term) > 0 else 10 * position
    clause = PolicyClause(seq, Action.PERMIT)
    action = None
    route_filters: list = []
    ok = True
    for part in node.children:
        if part.key == "from":
            items = part.children if part.children is not None else [Node(part.words[1:], part.line)]
            fpath = tpath + ["from"]
            for item in items:
                if item.key == "route-filter" and item.children is None:
                    route_filters.append(Node(item.words[1:], item.line))
                    continue
                ok &= _from_item(st, item, fpath, clause)
        elif part.key == "then":
            items = part.children if part.children is not None else [Node(part.words[1:], part.line)]
            for item in items:
                result = _then_item(st, item, tpath + ["then"], clause)
                if result is False:
                    ok = False
                elif result is not None:
                    action = result
        else:
            st.bad(part, tpath, "unrecognized statement")
            ok = False
    if route_filters:
        if any(isinstance(m, MatchPrefixList) for m in clause.matches):
            st.bad(node, path, "a term may use only one prefix condition")
            ok = False
        list_name = f"{policy}:{term}"
        st.config.prefix_lists[list_name] = _route_filter_entries(st, route_filters, tpath + ["from", "route-filter"])
        clause.matches.append(MatchPrefixList(list_name))
    if action is None:
        st.bad(node, path, "term has no accept or reject action")
        return None
    clause.action = action
    return clause if ok else None


def _from_item(st: _State, item: Node, path: list, clause: PolicyClause) -> bool:
    w = item.words
    if item.children is not None:
        st.bad(item, path, "unrecognized statement")
        return False
    if w[:1] == ["protocol"] and len(w) == 2 and w[1] in _PROTOCOLS:
        if any(isinstance(m, MatchProtocol) for m in clause.matches):
            st.bad(item, path, "a term may match only one protocol")
            return False
        clause.matches.append(MatchProtocol(_PROTOCOLS[w[1]]))
        return True
    if w[:1] in (["prefix-list"], ["route-filter-list"], ["prefix-list-filter"]):
        if any(isinstance(m, MatchPrefixList) for m in clause.matches):
            st.bad(item, path, "a term may use only one prefix condition")
            return False
        if w[0] == "prefix-list-filter" and len(w) >= 3:
            qualifier = " ".join(w[2:])
            try:
                _filter_range(0, w[2:])
            except _Bad as exc:
                st.bad(item, path, str(exc))
                return False
            list_name = f"{w[1]}:{qualifier}"
            st.filtered_refs[list_name] = (w[1], w[2:], item, path)
            clause.matches.append(MatchPrefixList(list_name))
            return True
        if len(w) == 2:
            clause.matches.append(MatchPrefixList(w[1]))
            return True
    if w[:1] == ["community"] and len(w) == 2 and w[1] != "[":
        if any(isinstance(m, MatchCommunity) for m in clause.matches):
            st.bad(item, path, "a term may match only one community")
            return False
        clause.matches.append(MatchCommunity(w[1]))
        st.match_refs.add(w[1])
        return True
    st.bad(item, path, "unrecognized statement")
    return False


def _then_item(st: _State, item: Node, path: list, clause: PolicyClause):
    w = item.words
    if item.children is None and w in (["accept"], ["reject"]):
        return Action.PERMIT if w[0] == "accept" else Action.DENY
    if item.children is None and len(w) == 2 and w[0] in ("metric", "local-preference") and w[1].isdigit():
        clause.sets.append(SetMed(int(w[1])) if w[0] == "metric" else SetLocalPref(int(w[1])))
        return None
    if item.children is None and len(w) == 3 and w[0] == "community" and w[1] in ("add", "set"):
        st.set_refs.append((w[2], clause, len(clause.sets), w[1] == "add", item, path))
        clause.sets.append(None)
        return None
    st.bad(item, path, "unrecognized statement")
    return False


def _finish(st: _State) -> None:
    c = st.config
    for name, prefixes in st.exact_lists.items():
        c.prefix_lists[name] = [
            PrefixListEntry(5 * i, Action.PERMIT, p, p.prefixlen, p.prefixlen) for i, p in enumerate(prefixes, 1)
        ]
    for list_name, (base, qualifier, item, path) in st.filtered_refs.items():
        if base not in st.exact_lists:
            st.bad(item, path, f"undefined prefix-list {base}")
            continue
        entries = []
        for i, p in enumerate(st.exact_lists[base], 1):
            try:
                low, high = _filter_range(p.prefixlen, qualifier)
            except _Bad as exc:
                st.bad(item, path, str(exc))
                break
            entries.append(PrefixListEntry(5 * i, Action.PERMIT, p, low, high))
        c.prefix_lists[list_name] = entries
    set_only = {ref[0] for ref in st.set_refs} - st.match_refs
    for name, values in st.communities.items():
        if name not in set_only:
            c.community_lists[name] = list(values)
    for name, clause, index, additive, item, path in st.set_refs:
        if name not in st.communities:
            st.bad(item, path, f"undefined community {name}")
            clause.sets[index] = SetCommunity(frozenset(), additive)
        else:
            clause.sets[index] = SetCommunity(frozenset(st.communities[name]), additive)
    for pol in c.policies.values():
        for clause in pol.clauses:
            clause.sets = [s for s in clause.sets if s is not None]
    for node, path, settings, peer in st.neighbor_nodes:
        if "peer-as" not in settings:
            st.bad(node, path, "neighbor has no peer-as")
            continue
        if "local-as" not in settings:
            st.warn(node, path, "Missing BGP local-as attribute")
        nbr = BgpNeighbor(peer, settings["peer-as"], settings.get("local-as", c.asn),
                          settings.get("import"), settings.get("export"))
        for ref in (nbr.import_policy, nbr.export_policy):
            if ref is not None and ref not in c.policies:
                st.warn(node, path, f"undefined policy-statement {ref}")
        c.bgp_neighbors.append(nbr)
    iface_names = {i.name for i in c.interfaces}
    for link in c.ospf:
        if link.interface_name not in iface_names:
            st.diags.append(_diag(st.lines, 1, f"OSPF interface {link.interface_name} is not configured",
                                  "protocols ospf", Severity.WARNING))


# ---------------------------------------------------------------------------
# printer

def _qualifier(e: PrefixListEntry) -> str:
    low, high = e.length_range
    length = e.prefix.prefixlen
    if low == high == length:
        return "exact"
    if low == length and high == 32:
        return "orlonger"
    if low == length + 1 and high == 32:
        return "longer"
    if low == length:
        return f"upto /{high}"
    return f"prefix-length-range /{low}-/{high}"


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0

    def open(self, text: str) -> None:
        self.lines.append("    " * self.depth + text + " {")
        self.depth += 1

    def close(self) -> None:
        self.depth -= 1
        self.lines.append("    " * self.depth + "}")

    def leaf(self, text: str) -> None:
        self.lines.append("    " * self.depth + text + ";")


def print_juniper(config: RouterConfig) -> str:
    problems = validate_ir(config)
    assert not problems, f"cannot print invalid configuration: {problems}"
    assert config.redistribute_via_export, "IOS-style redistribution has no Junos form"
    assert not config.bgp_networks and not config.redistributions, "network statements have no Junos form"
    c = canonicalize(config)
    w = _Writer()
    if c.name:
        w.open("system")
        w.leaf(f"host-name {c.name}")
        w.close()
    if c.interfaces:
        w.open("interfaces")
        units: dict = {}
        for iface in c.interfaces:
            phys, dot, unit = iface.name.rpartition(".")
            assert dot and unit.isdigit(), f"interface {iface.name} needs a unit number"
            units.setdefault(phys, []).append((int(unit), iface))
        for phys, members in units.items():
            w.open(phys)
            for unit, iface in sorted(members, key=lambda m: m[0]):
                w.open(f"unit {unit}")
                w.open("family inet")
                w.leaf(f"address {iface.address}/{iface.mask_length}")
                w.close()
                w.close()
            w.close()
        w.close()
    if c.asn or c.router_id is not None:
        w.open("routing-options")
        if c.router_id is not None:
            w.leaf(f"router-id {c.router_id}")
        if c.asn:
            w.leaf(f"autonomous-system {c.asn}")
        w.close()
    if c.bgp_neighbors or c.ospf:
        w.open("protocols")
        if c.bgp_neighbors:
            w.open("bgp")
            w.open("group ebgp")
            w.leaf("type external")
            for nbr in c.bgp_neighbors:
                w.open(f"neighbor {nbr.peer_address}")
                w.leaf(f"peer-as {nbr.remote_as}")
                w.leaf(f"local-as {nbr.local_as}")
                if nbr.import_policy:
                    w.leaf(f"import {nbr.import_policy}")
                if nbr.export_policy:
                    w.leaf(f"export {nbr.export_policy}")
                w.close()
            w.close()
            w.close()
        if c.ospf:
            w.open("ospf")
            w.open("area 0.0.0.0")
            for link in c.ospf:
                w.open(f"interface {link.interface_name}")
                if link.passive:
                    w.leaf("passive")
                w.leaf(f"metric {link.cost}")
                w.close()
            w.close()
            w.close()
        w.close()
    if c.prefix_lists or c.community_lists or c.policies:
        w.open("policy-options")
        exact_lists = set()
        for name, entries in c.prefix_lists.items():
            assert all(e.action is Action.PERMIT for e in entries), f"prefix-list {name} has deny entries"
            if entries and all(_qualifier(e) == "exact" for e in entries):
                exact_lists.add(name)
                w.open(f"prefix-list {name}")
                for e in entries:
                    w.leaf(str(e.prefix))
            else:
                w.open(f"route-filter-list {name}")
                for e in entries:
                    w.leaf(f"{e.prefix} {_qualifier(e)}")
            w.close()
        for name, values in c.community_lists.items():
            w.leaf(f"community {name} members [ {' '.join(str(v) for v in values)} ]")
        for pname, policy in c.policies.items():
            for clause in policy.clauses:
                for i, s in enumerate(clause.sets):
                    if isinstance(s, SetCommunity):
                        members = " ".join(str(v) for v in sorted(s.values))
                        w.leaf(f"community {pname}-{clause.seq}-{i} members [ {members} ]")
        for pname, policy in c.policies.items():
            w.open(f"policy-statement {pname}")
            for clause in policy.clauses:
                w.open(f"term {clause.seq}")
                if clause.matches:
                    w.open("from")
                    for m in clause.matches:
                        if isinstance(m, MatchProtocol):
                            w.leaf(f"protocol {_PROTOCOL_NAMES[m.protocol]}")
                        elif isinstance(m, MatchCommunity):
                            w.leaf(f"community {m.list_id}")
                        elif m.name in exact_lists:
                            w.leaf(f"prefix-list {m.name}")
                        else:
                            w.leaf(f"route-filter-list {m.name}")
                    w.close()
                w.open("then")
                for i, s in enumerate(clause.sets):
                    if isinstance(s, SetMed):
                        w.leaf(f"metric {s.value}")
                    elif isinstance(s, SetLocalPref):
                        w.leaf(f"local-preference {s.value}")
                    else:
                        w.leaf(f"community {'add' if s.additive else 'set'} {pname}-{clause.seq}-{i}")
                w.leaf("accept" if clause.action is Action.PERMIT else "reject")
                w.close()
                w.close()
            if policy.default_action is Action.PERMIT:
                w.leaf("then accept")
            w.close()
        w.close()
    return "\n".join(w.lines) + "\n"
