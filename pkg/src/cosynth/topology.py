"""Star topologies: generation, prose description, per-router checks.

Addressing scheme for ``generate_star(n)``: link ``j`` (1 <= j < n) joins
the hub R1 (``eth0/(j-1)``, ``j.0.0.1``) to R(j+1) (``eth0/0``,
``j.0.0.2``) on ``j.0.0.0/24``.  Router Ri is in AS i.  The customer
network 100.0.0.0/24 hangs off R1; R(j+1) owns the stub ``(n-1+j).0.0.0/24``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from ipaddress import IPv4Address, IPv4Network
from pathlib import Path
from typing import Mapping, Optional, Union

from cosynth.frontends import Vendor, prepend_preamble
from cosynth.ir import Action, Community, Interface, Protocol, RouterConfig
from cosynth.policy import (
    Counterexample,
    PolicyEnv,
    RouteConstraint,
    UnsatisfiableConstraint,
    build_test_space,
    evaluate_attachment,
    search,
)

CUSTOMER_NETWORK = IPv4Network("100.0.0.0/24")
MAX_STAR_SIZE = 50


class Role(str, enum.Enum):
    HUB = "hub"
    ISP = "isp"


@dataclass
class RouterSpec:
    name: str
    asn: int
    router_id: IPv4Address
    role: Role
    interfaces: list = field(default_factory=list)
    attached_networks: list = field(default_factory=list)
    expected_neighbors: list = field(default_factory=list)

    @property
    def connected_networks(self) -> list:
        nets = [iface.network for iface in self.interfaces] + list(self.attached_networks)
        return sorted(set(nets), key=lambda n: (int(n.network_address), n.prefixlen))


@dataclass(frozen=True)
class Endpoint:
    router: str
    interface: str


@dataclass(frozen=True)
class Link:
    a: Endpoint
    b: Endpoint


class TopologyError(ValueError):
    pass


@dataclass
class Topology:
    routers: list = field(default_factory=list)
    links: list = field(default_factory=list)

    def router(self, name: str) -> RouterSpec:
        for r in self.routers:
            if r.name == name:
                return r
        raise TopologyError(f"unknown router {name}")

    @property
    def names(self) -> list:
        return [r.name for r in self.routers]

    @property
    def hub(self) -> RouterSpec:
        hubs = [r for r in self.routers if r.role is Role.HUB]
        if len(hubs) != 1:
            raise TopologyError("a star needs exactly one hub router")
        return hubs[0]

    def endpoint_interface(self, end: Endpoint) -> Interface:
        for iface in self.router(end.router).interfaces:
            if iface.name == end.interface:
                return iface
        raise TopologyError(f"{end.router} has no interface {end.interface}")

    def validate(self) -> list:
        problems = []
        names = self.names
        if len(set(names)) != len(names):
            problems.append("router names are not unique")
        for link in self.links:
            try:
                ia, ib = self.endpoint_interface(link.a), self.endpoint_interface(link.b)
            except TopologyError as exc:
                problems.append(str(exc))
                continue
            if ia.network != ib.network:
                problems.append(f"link {link.a.router}-{link.b.router} endpoints are on different subnets")
        try:
            hub = self.hub
        except TopologyError as exc:
            problems.append(str(exc))
        else:
            for link in self.links:
                if hub.name not in (link.a.router, link.b.router):
                    problems.append(f"link {link.a.router}-{link.b.router} does not touch the hub")
        return problems

    def to_dict(self) -> dict:
        return {
            "routers": [
                {
                    "name": r.name,
                    "asn": r.asn,
                    "router_id": str(r.router_id),
                    "role": r.role.value,
                    "interfaces": [
                        {"name": i.name, "address": str(i.address), "mask_length": i.mask_length}
                        for i in r.interfaces
                    ],
                    "attached_networks": [str(n) for n in r.attached_networks],
                    "expected_neighbors": [
                        {"peer_address": str(peer), "remote_as": asn} for peer, asn in r.expected_neighbors
                    ],
                }
                for r in self.routers
            ],
            "links": [
                {"a": {"router": l.a.router, "interface": l.a.interface},
                 "b": {"router": l.b.router, "interface": l.b.interface}}
                for l in self.links
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        routers = [
            RouterSpec(
                r["name"], r["asn"], IPv4Address(r["router_id"]), Role(r["role"]),
                [Interface(i["name"], IPv4Address(i["address"]), i["mask_length"]) for i in r["interfaces"]],
                [IPv4Network(n) for n in r.get("attached_networks", [])],
                [(IPv4Address(n["peer_address"]), n["remote_as"]) for n in r.get("expected_neighbors", [])],
            )
            for r in data["routers"]
        ]
        links = [Link(Endpoint(**l["a"]), Endpoint(**l["b"])) for l in data["links"]]
        topo = cls(routers, links)
        if not any(r.expected_neighbors for r in routers):
            _derive_neighbors(topo)
        return topo

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Topology":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _derive_neighbors(topo: Topology) -> None:
    for link in topo.links:
        ia, ib = topo.endpoint_interface(link.a), topo.endpoint_interface(link.b)
        ra, rb = topo.router(link.a.router), topo.router(link.b.router)
        ra.expected_neighbors.append((ib.address, rb.asn))
        rb.expected_neighbors.append((ia.address, ra.asn))


def generate_star(n: int) -> Topology:
    if not 2 <= n <= MAX_STAR_SIZE:
        raise TopologyError(f"star size must be between 2 and {MAX_STAR_SIZE}, got {n}")
    hub = RouterSpec("R1", 1, IPv4Address("1.0.0.1"), Role.HUB, attached_networks=[CUSTOMER_NETWORK])
    routers = [hub]
    links = []
    for j in range(1, n):
        hub.interfaces.append(Interface(f"eth0/{j - 1}", IPv4Address(f"{j}.0.0.1"), 24))
        isp = RouterSpec(
            f"R{j + 1}", j + 1, IPv4Address(f"{j}.0.0.2"), Role.ISP,
            [Interface("eth0/0", IPv4Address(f"{j}.0.0.2"), 24)],
            [IPv4Network(f"{n - 1 + j}.0.0.0/24")],
        )
        routers.append(isp)
        links.append(Link(Endpoint("R1", f"eth0/{j - 1}"), Endpoint(isp.name, "eth0/0")))
    topo = Topology(routers, links)
    _derive_neighbors(topo)
    return topo


def describe_topology(t: Topology) -> str:
    """Plain-English network description used as the model's context."""
    out = [f"The network has {len(t.routers)} routers: {', '.join(t.names)}."]
    for r in t.routers:
        role = "the hub router facing the CUSTOMER" if r.role is Role.HUB else "an ISP router"
        out.append(f"{r.name} is {role}. It is in AS {r.asn} and its router ID is {r.router_id}.")
    for link in t.links:
        ia, ib = t.endpoint_interface(link.a), t.endpoint_interface(link.b)
        out.append(
            f"{link.a.router} is connected to {link.b.router} via interface {ia.name} at {link.a.router} "
            f"({ia.address}/{ia.mask_length}) and {ib.name} at {link.b.router} ({ib.address}/{ib.mask_length})."
        )
        out.append(f"The link between {link.a.router} and {link.b.router} uses subnet {ia.network}.")
    for r in t.routers:
        for net in r.attached_networks:
            label = " (the CUSTOMER network)" if r.role is Role.HUB else ""
            out.append(f"Network {net}{label} is attached to {r.name}.")
    for r in t.routers:
        peers = ", ".join(f"{peer} (AS {asn})" for peer, asn in r.expected_neighbors)
        nets = ", ".join(str(n) for n in r.connected_networks)
        out.append(f"{r.name} must run BGP with neighbors {peers} and announce the networks {nets}.")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# local policies

@dataclass(frozen=True)
class PolicyAssertion:
    neighbor: IPv4Address
    direction: str
    constraint: RouteConstraint
    expected: Action
    adds_community: Optional[Community] = None


@dataclass
class LocalPolicySpec:
    router: str
    ingress_tags: dict = field(default_factory=dict)
    egress_denies: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)


def _is_star(t: Topology) -> bool:
    try:
        hub = t.hub
    except TopologyError:
        return False
    return not t.validate() and len(t.links) == len(t.routers) - 1 and all(
        hub.name in (l.a.router, l.b.router) for l in t.links)


def _spokes(t: Topology) -> list:
    """(index j, isp spec, isp-side address, hub-side address), in link order."""
    hub = t.hub
    out = []
    for j, link in enumerate(t.links, start=1):
        hub_end, isp_end = (link.a, link.b) if link.a.router == hub.name else (link.b, link.a)
        out.append((j, t.router(isp_end.router), t.endpoint_interface(isp_end).address,
                    t.endpoint_interface(hub_end).address))
    return out


def ingress_tag(j: int) -> Community:
    return Community(99 + j, 1)


def local_policy_specs(t: Topology) -> dict:
    if not _is_star(t):
        raise TopologyError("local policies are defined for star topologies only")
    hub = t.hub
    spokes = _spokes(t)
    tags = {isp_addr: ingress_tag(j) for j, _, isp_addr, _ in spokes}
    all_tags = frozenset(tags.values())
    hub_spec = LocalPolicySpec(hub.name)
    for j, isp, isp_addr, _ in spokes:
        own = tags[isp_addr]
        hub_spec.ingress_tags[isp_addr] = own
        hub_spec.egress_denies[isp_addr] = all_tags - {own}
        hub_spec.assertions.append(PolicyAssertion(
            isp_addr, "import", RouteConstraint(protocol=Protocol.BGP), Action.PERMIT, own))
    for j, isp, isp_addr, _ in spokes:
        for tag in sorted(hub_spec.egress_denies[isp_addr]):
            hub_spec.assertions.append(PolicyAssertion(
                isp_addr, "export",
                RouteConstraint(has_communities=frozenset([tag]), protocol=Protocol.BGP), Action.DENY))
        for net in hub.attached_networks:
            hub_spec.assertions.append(PolicyAssertion(
                isp_addr, "export",
                RouteConstraint(prefix=net, lacks_communities=all_tags, protocol=Protocol.CONNECTED),
                Action.PERMIT))
    specs = {hub.name: hub_spec}
    for j, isp, isp_addr, hub_addr in spokes:
        spec = LocalPolicySpec(isp.name)
        for net in isp.attached_networks:
            spec.assertions.append(PolicyAssertion(
                hub_addr, "export", RouteConstraint(prefix=net, protocol=Protocol.CONNECTED), Action.PERMIT))
        specs[isp.name] = spec
    return specs


def describe_local_policy(spec: LocalPolicySpec, t: Topology) -> str:
    r = t.router(spec.router)
    lines = [f"Write the configuration for router {r.name}."]
    if spec.ingress_tags:
        for peer, tag in spec.ingress_tags.items():
            lines.append(f"Add the community {tag} to every route received from neighbor {peer}, "
                         f"keeping the communities the route already has.")
        for peer, denied in spec.egress_denies.items():
            if denied:
                listed = ", ".join(str(c) for c in sorted(denied))
                lines.append(f"Do not send to neighbor {peer} any route that has any one of the "
                             f"communities {listed}.")
        for net in r.attached_networks:
            lines.append(f"Announce the CUSTOMER network {net} to every neighbor.")
    else:
        for net in r.attached_networks:
            lines.append(f"Announce the network {net} to your BGP neighbor.")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LocalPolicyViolation:
    router: str
    policy: Optional[str]  # None when nothing is attached at that point
    assertion: PolicyAssertion
    counterexample: Counterexample


def check_local_policy(config: RouterConfig, spec: LocalPolicySpec) -> list:
    """One violation per failing assertion, in assertion order."""
    env = PolicyEnv.of(config)
    out = []
    for a in spec.assertions:
        nbr = config.neighbor(a.neighbor)
        if nbr is None:
            continue  # the topology verifier reports missing neighbors
        space = build_test_space(env, a.constraint)
        if not len(space):
            raise UnsatisfiableConstraint(f"assertion for {a.neighbor} {a.direction} admits no announcement")
        ce = search(lambda ann: evaluate_attachment(config, a.neighbor, a.direction, ann, env),
                    space, a.expected, a.adds_community)
        if ce is not None:
            out.append(LocalPolicyViolation(spec.router, getattr(nbr, f"{a.direction}_policy"), a, ce))
    return out


# ---------------------------------------------------------------------------
# topology verifier

@dataclass(frozen=True)
class InterfaceAddressMismatch:
    interface: str
    expected: str
    found: str


@dataclass(frozen=True)
class LocalAsMismatch:
    expected: int
    found: int


@dataclass(frozen=True)
class RouterIdMismatch:
    expected: str
    found: str


@dataclass(frozen=True)
class MissingNeighbor:
    peer_address: str
    remote_as: int


@dataclass(frozen=True)
class MissingNetwork:
    network: str


@dataclass(frozen=True)
class ExtraNetwork:
    network: str
    router: str


@dataclass(frozen=True)
class ExtraNeighbor:
    peer_address: str
    remote_as: int


TopologyFinding = Union[
    InterfaceAddressMismatch, LocalAsMismatch, RouterIdMismatch, MissingNeighbor,
    MissingNetwork, ExtraNetwork, ExtraNeighbor,
]


def verify_topology(config: RouterConfig, t: Topology, router: str) -> list:
    spec = t.router(router)
    found: list = []
    for want in spec.interfaces:
        have = config.interface(want.name)
        if have is None:
            found.append(InterfaceAddressMismatch(want.name, str(want.address), "no address"))
        elif have.address != want.address:
            found.append(InterfaceAddressMismatch(want.name, str(want.address), str(have.address)))
        elif have.mask_length != want.mask_length:
            found.append(InterfaceAddressMismatch(
                want.name, f"{want.address}/{want.mask_length}", f"{have.address}/{have.mask_length}"))
    if config.asn != spec.asn:
        found.append(LocalAsMismatch(spec.asn, config.asn))
    if config.router_id != spec.router_id:
        found.append(RouterIdMismatch(str(spec.router_id), str(config.router_id) if config.router_id else "none"))
    declared = {(n.peer_address, n.remote_as) for n in config.bgp_neighbors}
    expected = set(spec.expected_neighbors)
    for peer, asn in spec.expected_neighbors:
        if (peer, asn) not in declared:
            found.append(MissingNeighbor(str(peer), asn))
    connected = spec.connected_networks
    announced = set(config.bgp_networks)
    for net in connected:
        if net not in announced:
            found.append(MissingNetwork(str(net)))
    for net in sorted(announced - set(connected), key=lambda n: (int(n.network_address), n.prefixlen)):
        found.append(ExtraNetwork(str(net), router))
    for nbr in config.bgp_neighbors:
        if (nbr.peer_address, nbr.remote_as) not in expected:
            found.append(ExtraNeighbor(str(nbr.peer_address), nbr.remote_as))
    return found


# ---------------------------------------------------------------------------
# composer

def compose_snapshot(configs: Mapping[str, str], directory: Union[str, Path], t: Optional[Topology] = None,
                     vendor: Vendor = Vendor.CISCO) -> list:
    """Write ``configs/<router>.cfg`` files with the harness preamble."""
    names = t.names if t is not None else sorted(configs)
    missing = [n for n in names if n not in configs]
    if missing:
        raise TopologyError(f"missing configuration for {', '.join(missing)}")
    target = Path(directory) / "configs"
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names:
        path = target / f"{name}.cfg"
        path.write_text(prepend_preamble(configs[name], vendor, name))
        written.append(path)
    if t is not None:
        (Path(directory) / "topology.json").write_text(t.dumps())
    return written
