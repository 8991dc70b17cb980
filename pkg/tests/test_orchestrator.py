from fractions import Fraction

import pytest

import star
from conftest import FIXTURES
from cosynth.frontends import SyntaxDiagnostic
from cosynth.llm import Message, ReplayProvider, ScriptedProvider, load_transcript, save_transcript
from cosynth.orchestrator import (
    PRINT_ALL,
    UNBOUNDED,
    Limits,
    ReplayHuman,
    ScriptedHuman,
    Status,
    compute_leverage,
    no_human,
    run_local_synthesis,
    run_translation,
)
from cosynth.topology import LocalPolicyViolation, generate_star

TR = FIXTURES / "translation"
SOURCE = (TR / "source.cfg").read_text()
SYNTHESIS_LIMITS = Limits(max_semantic_retries=2)


def junos(name: str) -> str:
    return "Here is the configuration:\n```\n" + (TR / f"{name}.junos").read_text() + "```\n"


def reply(router: str, body: str) -> str:
    return f"{router}.cfg\n```\n{body}```\n"


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        Limits(max_syntax_retries=0)


def test_perfect_translation_needs_no_corrections():
    out = run_translation(SOURCE, ScriptedProvider([junos("correct")]))
    assert out.status is Status.VERIFIED
    assert out.leverage.automated_count == 0 and out.leverage.human_count == 1
    # the task prompt itself is the one human prompt
    assert out.leverage.leverage == 0


def test_partial_reply_asks_for_whole_config():
    partial = "Change this:\n```\npolicy-options {\n}\n```\n"
    out = run_translation(SOURCE, ScriptedProvider([partial, junos("correct")]))
    assert out.status is Status.VERIFIED
    users = out.transcript[0].user_messages
    assert users[-1].text == PRINT_ALL and users[-1].origin == "automated"


def test_oscillation_punts_within_limit():
    script = [junos("fault_ge_exact"), junos("fault_redistribution")] * 20
    limits = Limits()
    out = run_translation(SOURCE, ScriptedProvider(script), limits, no_human)
    assert out.status is Status.PUNTED
    assert out.leverage.automated_count <= limits.max_total_automated
    assert out.leverage.automated_count == 2 * limits.max_semantic_retries


def test_syntax_streak_punts():
    script = [junos("fault_prefix_syntax")] * 20
    out = run_translation(SOURCE, ScriptedProvider(script), Limits(max_syntax_retries=3), no_human)
    assert out.status is Status.PUNTED
    assert out.leverage.automated_count == 3


def test_human_reply_resumes_the_loop():
    script = [junos("fault_ge_exact")] * 3 + [junos("correct")]
    out = run_translation(SOURCE, ScriptedProvider(script), Limits(max_semantic_retries=2),
                          ScriptedHuman(["Match 1.2.3.0/24 or longer."]))
    assert out.status is Status.VERIFIED
    assert (out.leverage.automated_count, out.leverage.human_count) == (2, 2)


def test_syntax_is_fixed_before_semantics():
    script = [junos("fault_ge_exact"), junos("fault_prefix_syntax"), junos("correct")]
    out = run_translation(SOURCE, ScriptedProvider(script))
    kinds = [type(f).__name__ for _, _, f in out.findings_history]
    assert kinds == ["PolicyBehaviorDiff", "SyntaxDiagnostic"]
    assert out.status is Status.VERIFIED


def test_source_with_errors_is_rejected():
    with pytest.raises(ValueError):
        run_translation("route-map X permit 10\n match community 100:1\n", ScriptedProvider([]))


def test_reference_synthesis_verifies_without_corrections():
    t = generate_star(6)
    out = run_local_synthesis(t, ScriptedProvider({n: [reply(n, star.text(n))] for n in t.names}))
    assert out.status is Status.VERIFIED
    assert set(out.artifacts) == set(t.names)
    # only the modularizer openings for R2..R6 are automated
    assert (out.leverage.automated_count, out.leverage.human_count) == (5, 1)
    assert out.findings_history == []


def test_and_semantics_produces_semantic_prompt():
    t = generate_star(6)
    script = {n: [reply(n, star.text(n))] for n in t.names}
    script["R1"] = [reply("R1", star.text("R1_and"))] * 5
    out = run_local_synthesis(t, ScriptedProvider(script), SYNTHESIS_LIMITS, no_human)
    assert out.status is Status.PUNTED
    first = out.findings_history[0][2]
    assert isinstance(first, LocalPolicyViolation)
    sent = out.transcript[0].user_messages[1].text
    assert sent == ("The route-map FILTER_COMM_OUT_R2 permits routes that have the community 101:1. "
                    "However, they should be denied.")


def test_per_session_automation_is_bounded():
    t = generate_star(6)
    bad = star.swap(star.text("R3"), "bgp router-id 2.0.0.2", "bgp router-id 2.0.0.1")
    script = {n: [reply(n, star.text(n))] for n in t.names}
    script["R3"] = [reply("R3", bad)] * 50
    limits = Limits(max_semantic_retries=40, max_total_automated=7)
    out = run_local_synthesis(t, ScriptedProvider(script), limits, no_human)
    assert out.status is Status.PUNTED
    for s in out.transcript:
        assert sum(m.origin == "automated" for m in s.user_messages) <= limits.max_total_automated


def test_global_violation_goes_to_human():
    """A config that passes every local check can still break the global policy."""
    t = generate_star(6)
    deaf = star.text("R3").replace(" neighbor 2.0.0.1 remote-as 1\n",
                                   " neighbor 2.0.0.1 remote-as 1\n neighbor 2.0.0.1 route-map DENY_ALL in\n")
    deaf += "route-map DENY_ALL deny 10\n"
    script = {n: [reply(n, star.text(n))] for n in t.names}
    script["R3"] = [reply("R3", deaf)]
    script["R1"] = [reply("R1", star.text("R1")), reply("R1", star.text("R1"))]
    punts = []

    def human(punt):
        punts.append(punt)
        return "Make sure every ISP receives the customer network." if len(punts) == 1 else None

    out = run_local_synthesis(t, ScriptedProvider(script), Limits(), human)
    assert out.status is Status.PUNTED
    assert [p.session for p in punts] == ["R1", "R1"]
    assert punts[0].reason == "network-wide policy violated"
    assert punts[0].prompt.startswith("R3 cannot reach the CUSTOMER network")
    # the human prompt went to the hub session, not to an automated loop
    assert out.transcript[0].user_messages[-1].origin == "human"
    assert out.leverage.human_count == 2


@pytest.mark.parametrize("episode, counts, leverage", [
    ("translation_episode.jsonl", (20, 2), Fraction(10)),
    ("synthesis_episode.jsonl", (12, 2), Fraction(6)),
])
def test_recorded_leverage(episode, counts, leverage):
    report = compute_leverage(load_transcript(FIXTURES / episode))
    assert (report.automated_count, report.human_count) == counts
    assert report.leverage == leverage


def test_leverage_ignores_iip_and_model_messages():
    msgs = [Message(1, "system", "iip", "x"), Message(2, "user", "human", "t"),
            Message(3, "assistant", "model", "r")] + [Message(4 + i, "user", "automated", "a") for i in range(5)]
    report = compute_leverage(msgs)
    assert (report.automated_count, report.human_count, report.leverage) == (5, 1, Fraction(5))
    assert compute_leverage(msgs[2:]).leverage is UNBOUNDED


def test_strict_replay_reproduces_translation(tmp_path):
    path = FIXTURES / "translation_episode.jsonl"
    out = run_translation(SOURCE, ReplayProvider(path, strict=True), Limits(), ReplayHuman(path))
    assert out.status is Status.VERIFIED
    again = tmp_path / "again.jsonl"
    save_transcript(out.transcript, again)
    assert again.read_text() == path.read_text()


def test_strict_replay_reproduces_synthesis(tmp_path):
    path = FIXTURES / "synthesis_episode.jsonl"
    out = run_local_synthesis(generate_star(6), ReplayProvider(path, strict=True), SYNTHESIS_LIMITS,
                              ReplayHuman(path))
    assert out.status is Status.VERIFIED
    assert (out.leverage.automated_count, out.leverage.human_count) == (12, 2)
    again = tmp_path / "again.jsonl"
    save_transcript(out.transcript, again)
    assert again.read_text() == path.read_text()


def test_synthesis_history_follows_stage_order():
    path = FIXTURES / "synthesis_episode.jsonl"
    out = run_local_synthesis(generate_star(6), ReplayProvider(path), SYNTHESIS_LIMITS, ReplayHuman(path))
    r1 = [type(f).__name__ for _, s, f in out.findings_history if s == "R1"]
    assert r1[0] == "SyntaxDiagnostic" and r1[1] == "InterfaceAddressMismatch"
    assert set(r1[2:]) == {"LocalPolicyViolation"}
    assert isinstance(out.findings_history[0][2], SyntaxDiagnostic)
