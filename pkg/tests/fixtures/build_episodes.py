"""Regenerate the recorded episode transcripts from scripted replies.

    python3 tests/fixtures/build_episodes.py

The outputs are checked in; tests replay them in strict mode, so any change
to prompt wording shows up as a replay mismatch.
"""
from __future__ import annotations

from pathlib import Path

from cosynth.llm import ScriptedProvider, save_transcript
from cosynth.orchestrator import Limits, ScriptedHuman, run_local_synthesis, run_translation
from cosynth.topology import generate_star

HERE = Path(__file__).parent
TR = HERE / "translation"
STAR = HERE / "star6"

SYNTHESIS_LIMITS = Limits(max_semantic_retries=2)


def fence(text: str, name: str = "") -> str:
    header = f"{name}\n" if name else ""
    return f"{header}```\n{text}```\n"


def translation_replies() -> list:
    junos = {p.stem: p.read_text() for p in TR.glob("*.junos")}
    partial = "Here is the corrected section:\n" + fence(
        junos["correct"][junos["correct"].index("policy-options {"):])
    full = lambda key: "Here is the Juniper configuration:\n" + fence(junos[key])
    oscillation = []
    for _ in range(5):
        oscillation += [full("fault_ge_exact"), full("fault_redistribution")]
    return [
        full("fault_prefix_syntax"),
        partial,
        full("fault_local_as"),
        full("fault_missing_policy"),
        partial,
        full("fault_ospf_cost"),
        full("fault_ospf_passive"),
        full("fault_med"),
        *oscillation,
        full("fault_ge_exact"),
        full("fault_med"),
        partial,
        full("correct"),
    ]


TRANSLATION_HUMAN = [
    "In policy-statement to_provider, the first term must match only BGP-learned routes "
    "(from protocol bgp) whose prefix is 1.2.3.0/24 or longer (prefix-list-filter our-networks orlonger). "
    "Keep a second term that accepts the exact prefix 1.2.3.0/24 from any protocol.",
]


def _cisco(name: str) -> str:
    return (STAR / f"{name}.cfg").read_text()


def _swap(text: str, old: str, new: str) -> str:
    assert old in text, old
    return text.replace(old, new, 1)


def synthesis_replies() -> dict:
    r1 = _cisco("R1")
    bad_syntax = _swap(r1, "ip community-list 1 permit 100:1\n",
                       "ip community-list 1 permit 100:1\nip community-list standard COMM_LIST_R2_OUT permit .+\n")
    bad_address = _swap(r1, " ip address 2.0.0.1 255.255.255.0", " ip address 2.0.0.2 255.255.255.0")
    r1_and = _cisco("R1_and")

    def reply(name: str, text: str) -> str:
        return f"Here is the configuration.\n\n{name}.cfg\n```\n{text}```\n"

    return {
        "R1": [reply("R1", bad_syntax), reply("R1", bad_address), reply("R1", r1_and), reply("R1", r1_and),
               reply("R1", r1_and), reply("R1", r1)],
        "R2": [reply("R2", _swap(_cisco("R2"), " network 1.0.0.0 mask 255.255.255.0\n", "")),
               reply("R2", _cisco("R2"))],
        "R3": [reply("R3", _swap(_cisco("R3"), "bgp router-id 2.0.0.2", "bgp router-id 2.0.0.1")),
               reply("R3", _cisco("R3"))],
        "R4": [reply("R4", _swap(_cisco("R4"), " neighbor 3.0.0.1 remote-as 1\n",
                                 " neighbor 3.0.0.1 remote-as 1\n neighbor 7.0.0.2 remote-as 7\n")),
               reply("R4", _cisco("R4"))],
        "R5": [reply("R5", _cisco("R5"))],
        "R6": [reply("R6", _cisco("R6"))],
    }


SYNTHESIS_HUMAN = {
    "R1": ["In route-map FILTER_COMM_OUT_R2, the match statements in one stanza must all hold at once. "
           "Declare each match community statement in a separate deny stanza, then end with a permit stanza."],
}


def main() -> None:
    outcome = run_translation((TR / "source.cfg").read_text(), ScriptedProvider(translation_replies()),
                              Limits(), ScriptedHuman(TRANSLATION_HUMAN))
    save_transcript(outcome.transcript, HERE / "translation_episode.jsonl")
    print("translation", outcome.status.value, outcome.leverage)
    outcome = run_local_synthesis(generate_star(6), ScriptedProvider(synthesis_replies()),
                                  SYNTHESIS_LIMITS, ScriptedHuman(SYNTHESIS_HUMAN))
    save_transcript(outcome.transcript, HERE / "synthesis_episode.jsonl")
    print("synthesis", outcome.status.value, outcome.leverage)


if __name__ == "__main__":
    main()
