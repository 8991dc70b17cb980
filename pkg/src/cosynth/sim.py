"""Synchronous eBGP propagation to a fixpoint, plus the no-transit check."""
from __future__ import annotations

from dataclasses import dataclass, replace
from ipaddress import IPv4Address, IPv4Network
from typing import Mapping, Optional, Union

from cosynth.ir import Protocol, RouterConfig
from cosynth.policy import Accepted, PolicyEnv, RouteAnnouncement, export_route, import_route
from cosynth.topology import Role, Topology

MAX_ROUNDS = 1000


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RibEntry:
    route: RouteAnnouncement
    learned_from: Optional[IPv4Address] = None  # None for local origination

    def sort_key(self) -> tuple:
        peer = -1 if self.learned_from is None else int(self.learned_from)
        return (-self.route.local_pref, len(self.route.as_path), peer)


@dataclass(frozen=True)
class Session:
    router: str
    peer_router: str
    local_address: IPv4Address
    peer_address: IPv4Address


def _sessions(configs: Mapping[str, RouterConfig]) -> list:
    """Sessions that both ends declare with matching AS numbers."""
    owner = {}
    for name, cfg in configs.items():
        for iface in cfg.interfaces:
            owner[iface.address] = (name, iface)
    out = []
    for name, cfg in configs.items():
        for nbr in cfg.bgp_neighbors:
            if nbr.peer_address not in owner:
                continue
            peer_name, peer_iface = owner[nbr.peer_address]
            if peer_name == name or configs[peer_name].asn != nbr.remote_as:
                continue
            local = next((i for i in cfg.interfaces if nbr.peer_address in i.network
                          and i.address != nbr.peer_address), None)
            if local is None:
                continue
            back = configs[peer_name].neighbor(local.address)
            if back is None or back.remote_as != cfg.asn:
                continue
            out.append(Session(name, peer_name, local.address, nbr.peer_address))
    return out


def simulate(t: Topology, configs: Mapping[str, RouterConfig], max_rounds: int = MAX_ROUNDS) -> dict:
    """Final RIB per router: ``{router: {prefix: RibEntry}}``."""
    configs = {name: configs[name] for name in t.names if name in configs}
    envs = {name: PolicyEnv.of(cfg) for name, cfg in configs.items()}
    sessions = _sessions(configs)
    incoming: dict = {name: [] for name in configs}
    for s in sessions:
        incoming[s.router].append(s)
    local = {
        name: {net: RibEntry(RouteAnnouncement(net, origin_protocol=Protocol.CONNECTED))
               for net in cfg.bgp_networks}
        for name, cfg in configs.items()
    }
    ribs = {name: dict(entries) for name, entries in local.items()}
    for _ in range(max_rounds):
        new = {}
        for name, cfg in configs.items():
            candidates: dict = {p: [e] for p, e in local[name].items()}
            for s in incoming[name]:
                sender = configs[s.peer_router]
                out_nbr = sender.neighbor(s.local_address)
                in_nbr = cfg.neighbor(s.peer_address)
                for prefix, entry in ribs[s.peer_router].items():
                    if entry.learned_from == s.local_address:
                        continue
                    sent = export_route(sender, out_nbr, entry.route, envs[s.peer_router])
                    if not isinstance(sent, Accepted):
                        continue
                    route = replace(sent.route, as_path=(sender.asn,) + sent.route.as_path,
                                    origin_protocol=Protocol.BGP, local_pref=100)
                    if cfg.asn in route.as_path:
                        continue
                    got = import_route(cfg, in_nbr, route, envs[name])
                    if isinstance(got, Accepted):
                        candidates.setdefault(prefix, []).append(RibEntry(got.route, s.peer_address))
            new[name] = {p: min(c, key=RibEntry.sort_key) for p, c in sorted(
                candidates.items(), key=lambda kv: (int(kv[0].network_address), kv[0].prefixlen))}
        if new == ribs:
            return ribs
        ribs = new
    raise SimulationError(f"no fixpoint after {max_rounds} rounds")


@dataclass(frozen=True)
class IspReachesIsp:
    router: str
    prefix: IPv4Network
    owner: str


@dataclass(frozen=True)
class CustomerUnreachable:
    router: str


@dataclass(frozen=True)
class IspUnreachableFromCustomer:
    router: str


GlobalViolation = Union[IspReachesIsp, CustomerUnreachable, IspUnreachableFromCustomer]


def check_no_transit(ribs: Mapping[str, dict], t: Topology) -> list:
    hub = t.hub
    isps = [r for r in t.routers if r.role is Role.ISP]
    out: list = []
    for r in isps:
        rib = ribs.get(r.name, {})
        for other in isps:
            if other.name == r.name:
                continue
            for net in other.attached_networks:
                if net in rib:
                    out.append(IspReachesIsp(r.name, net, other.name))
    for r in isps:
        if not all(net in ribs.get(r.name, {}) for net in hub.attached_networks):
            out.append(CustomerUnreachable(r.name))
    hub_rib = ribs.get(hub.name, {})
    for r in isps:
        if not all(net in hub_rib for net in r.attached_networks):
            out.append(IspUnreachableFromCustomer(r.name))
    return out


def rib_dump(ribs: Mapping[str, dict]) -> dict:
    return {
        router: {
            str(prefix): {
                "as_path": list(entry.route.as_path),
                "communities": [str(c) for c in sorted(entry.route.communities)],
                "learned_from": None if entry.learned_from is None else str(entry.learned_from),
            }
            for prefix, entry in rib.items()
        }
        for router, rib in ribs.items()
    }
