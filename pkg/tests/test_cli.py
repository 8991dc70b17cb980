import json

import pytest

import star
from conftest import FIXTURES
from cosynth.cli import ERROR, FINDINGS, OK, PUNTED, main
from cosynth.topology import compose_snapshot, generate_star

TR = FIXTURES / "translation"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_diff_clean_and_faulty(capsys):
    assert run(capsys, "diff", TR / "source.cfg", TR / "correct.junos")[0] == OK
    code, out = run(capsys, "diff", TR / "source.cfg", TR / "fault_ospf_cost.junos")
    assert code == FINDINGS and "cost set to 1" in out.out


def test_diff_json(capsys):
    code, out = run(capsys, "diff", "--format", "json", TR / "source.cfg", TR / "fault_ge_exact.junos")
    (finding,) = json.loads(out.out)
    assert code == FINDINGS and finding["kind"] == "PolicyBehaviorDiff"
    assert finding["example"]["prefix"] == "1.2.3.0/25"


def test_diff_reports_syntax_first(capsys):
    code, out = run(capsys, "diff", TR / "source.cfg", TR / "fault_prefix_syntax.junos")
    assert code == FINDINGS and out.out.startswith("There is a syntax error")


def test_search_policy(capsys):
    args = ["search-policy", "--policy", "FILTER_COMM_OUT_R2", "--has-community", "101:1", "--expect", "deny"]
    code, out = run(capsys, *args, "--config", FIXTURES / "and_or_listing.cfg")
    assert code == FINDINGS and "permits" in out.out
    assert run(capsys, *args, "--config", FIXTURES / "and_or_fixed.cfg")[0] == OK


def test_search_policy_unsatisfiable(capsys):
    code, out = run(capsys, "search-policy", "--config", FIXTURES / "and_or_fixed.cfg", "--policy",
                    "FILTER_COMM_OUT_R2", "--has-community", "101:1", "--lacks-community", "101:1", "--expect", "deny")
    assert code == ERROR and "cosynth: error" in out.err


def test_gen_and_verify_topology(tmp_path, capsys):
    topo = tmp_path / "star.json"
    assert run(capsys, "gen-topology", "--routers", 6, "--out", topo)[0] == OK
    ok = ["verify-topology", "--topology", topo, "--router", "R2"]
    assert run(capsys, *ok, "--config", star.STAR / "R2.cfg")[0] == OK
    bad = tmp_path / "R2.cfg"
    bad.write_text(star.swap(star.text("R2"), "bgp router-id 1.0.0.2", "bgp router-id 1.0.0.1"))
    code, out = run(capsys, *ok, "--config", bad)
    assert code == FINDINGS and out.out.strip() == "Router ID does not match with given config. Expected 1.0.0.2, found 1.0.0.1"


def test_simulate(tmp_path, capsys):
    t = generate_star(6)
    topo = tmp_path / "star.json"
    topo.write_text(t.dumps())
    compose_snapshot({n: star.text(n) for n in t.names}, tmp_path / "snap", t)
    code, out = run(capsys, "simulate", "--snapshot", tmp_path / "snap", "--topology", topo,
                    "--check", "no-transit", "--format", "json")
    assert code == OK and json.loads(out.out)["violations"] == []
    (tmp_path / "snap" / "configs" / "R1.cfg").write_text(
        star.without_egress_filter(star.text("R1"), "1.0.0.2"))
    code, out = run(capsys, "simulate", "--snapshot", tmp_path / "snap", "--topology", topo, "--check", "no-transit")
    assert code == FINDINGS and "R2 can reach" in out.out


def test_translate_replay(tmp_path, capsys):
    out_file = tmp_path / "out.junos"
    code, out = run(capsys, "translate", "--input", TR / "source.cfg", "--provider",
                    f"replay:{FIXTURES / 'translation_episode.jsonl'}", "--strict", "--out", out_file,
                    "--transcript", tmp_path / "t.jsonl")
    assert code == OK
    summary = json.loads(out.out)
    assert (summary["status"], summary["leverage"]) == ("Verified", "10")
    assert out_file.read_text() == (TR / "correct.junos").read_text()


def test_synthesize_scripted_punts(tmp_path, capsys):
    script = tmp_path / "script.json"
    script.write_text(json.dumps({"*": ["I cannot help with that."] * 3}))
    code, out = run(capsys, "synthesize", "--routers", 3, "--provider", f"scripted:{script}",
                    "--max-total-automated", 2)
    assert code == PUNTED and json.loads(out.out)["status"] == "PuntedUnresolved"


def test_synthesize_replay_writes_snapshot(tmp_path, capsys):
    code, _ = run(capsys, "synthesize", "--routers", 6, "--provider",
                  f"replay:{FIXTURES / 'synthesis_episode.jsonl'}", "--max-semantic-retries", 2,
                  "--out-dir", tmp_path / "snap")
    assert code == OK
    assert sorted(p.name for p in (tmp_path / "snap" / "configs").iterdir()) == [f"R{k}.cfg" for k in range(1, 7)]


def test_leverage_command(capsys):
    code, out = run(capsys, "leverage", "--transcript", FIXTURES / "synthesis_episode.jsonl")
    assert code == OK and out.out.strip() == "automated=12 human=2 leverage=6"


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == ERROR
    assert run(capsys, "synthesize", "--provider", "live")[0] == ERROR
    assert run(capsys, "diff", "/nonexistent/a.cfg", "/nonexistent/b.cfg")[0] == ERROR
    assert run(capsys, "translate", "--input", TR / "source.cfg", "--provider", "bogus")[0] == ERROR
