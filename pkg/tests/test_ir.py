import json
from ipaddress import IPv4Address, IPv4Network

import pytest
from hypothesis import given, settings

from cosynth.ir import (
    Action,
    BgpNeighbor,
    Community,
    PrefixListEntry,
    RouterConfig,
    canonicalize,
    config_from_dict,
    parse_prefix,
    to_jsonable,
    validate_ir,
)
from strategies import router_configs

NET = IPv4Network


@pytest.mark.parametrize("ge, le, expected", [
    (None, None, (24, 24)),
    (24, None, (24, 32)),
    (26, None, (26, 32)),
    (None, 28, (24, 28)),
    (25, 27, (25, 27)),
])
def test_ge_le_defaults(ge, le, expected):
    assert PrefixListEntry(5, Action.PERMIT, NET("1.2.3.0/24"), ge, le).length_range == expected


def test_covers_respects_bits_and_lengths():
    e = PrefixListEntry(5, Action.PERMIT, NET("1.2.3.0/24"), 24)
    assert e.covers(NET("1.2.3.0/25"))
    assert not e.covers(NET("1.2.0.0/16"))
    assert not e.covers(NET("1.2.4.0/25"))


def test_canonicalize_makes_length_bounds_explicit():
    cfg = RouterConfig(asn=1, prefix_lists={"P": [PrefixListEntry(5, Action.PERMIT, NET("1.2.3.0/24"), 24)]})
    entry = canonicalize(cfg).prefix_lists["P"][0]
    assert (entry.ge, entry.le) == (24, 32)


def test_canonicalize_is_idempotent_and_order_free():
    n1 = BgpNeighbor(IPv4Address("2.2.2.2"), 2, 1)
    n2 = BgpNeighbor(IPv4Address("1.1.1.1"), 3, 1)
    a = RouterConfig(asn=1, bgp_neighbors=[n1, n2])
    b = RouterConfig(asn=1, bgp_neighbors=[n2, n1])
    assert canonicalize(a) == canonicalize(b) == canonicalize(canonicalize(a))


def test_validate_reports_broken_references_and_bounds():
    cfg = RouterConfig(
        asn=0,
        bgp_neighbors=[BgpNeighbor(IPv4Address("1.1.1.1"), 2, 1, "MISSING")],
        prefix_lists={"P": [PrefixListEntry(5, Action.PERMIT, NET("1.2.3.0/24"), 20)]},
    )
    rules = {v.rule for v in validate_ir(cfg)}
    assert {"asn must be positive", "undefined policy", "ge < prefix_length"} <= rules


def test_parse_prefix_is_strict():
    assert parse_prefix("1.2.3.0/24") == NET("1.2.3.0/24")
    with pytest.raises(ValueError):
        parse_prefix("1.2.3.1/24")


@pytest.mark.parametrize("text", ["100", "a:b", "70000:1", ".+"])
def test_community_parse_rejects_bad_values(text):
    with pytest.raises(ValueError):
        Community.parse(text)


@settings(max_examples=100, deadline=None)
@given(router_configs(cisco=True))
def test_json_round_trip(cfg):
    data = json.loads(json.dumps(to_jsonable(cfg)))
    assert config_from_dict(data) == cfg


@settings(max_examples=100, deadline=None)
@given(router_configs(cisco=False))
def test_generated_configs_are_valid(cfg):
    assert validate_ir(cfg) == []
