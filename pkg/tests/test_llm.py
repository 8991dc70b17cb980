import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from conftest import FIXTURES
from cosynth.llm import (
    LiveProvider,
    Message,
    NoConfigFound,
    ProviderError,
    ReplayMismatch,
    ReplayProvider,
    ScriptedProvider,
    configs_by_name,
    extract_configs,
    iips_for,
    load_iip,
    load_transcript,
    open_session,
    provider_from_spec,
    save_transcript,
    send,
)


@pytest.mark.parametrize("role, origin", [
    ("assistant", "human"), ("user", "model"), ("robot", "human"), ("user", "wizard")])
def test_message_role_origin_pairs(role, origin):
    with pytest.raises(ValueError):
        Message(1, role, origin, "x")


def test_message_seq_must_be_positive():
    with pytest.raises(ValueError):
        Message(0, "user", "human", "x")


def test_shipped_iips():
    prompts = load_iip()
    synthesis = iips_for("synthesis", prompts)
    assert len(synthesis) == 4
    assert any("additive" in p.text for p in synthesis)
    assert [p.name for p in iips_for("translation", prompts)] == ["translation-output"]


def test_iip_directory_handling(tmp_path):
    assert load_iip(tmp_path) == []
    with pytest.raises(FileNotFoundError):
        load_iip(tmp_path / "missing")
    (tmp_path / "a.txt").write_text("name: same\nworkflow: both\n\nfirst")
    (tmp_path / "b.txt").write_text("name: same\n\nsecond")
    with pytest.raises(ValueError):
        load_iip(tmp_path)


def test_iips_open_each_session():
    iips = iips_for("synthesis", load_iip())
    s = open_session(ScriptedProvider([]), iips, name="R1")
    assert [m.origin for m in s.messages] == ["iip"] * 4
    assert all(m.role == "system" for m in s.messages)


def test_extract_fenced_blocks_with_names():
    reply = "Here you go.\n\nR1.cfg\n```\nrouter bgp 1\n```\nand\nR2.cfg\n```cisco\nrouter bgp 2\n```\n"
    blocks = extract_configs(reply)
    assert configs_by_name(blocks) == {"R1": "router bgp 1\n", "R2": "router bgp 2\n"}


def test_extract_strips_cli_prompts():
    (block,) = extract_configs("```\nR1(config)# router bgp 1\nR1(config-router)# neighbor 1.0.0.2 remote-as 2\n```")
    assert block.text == "router bgp 1\nneighbor 1.0.0.2 remote-as 2\n"


def test_extract_unfenced_config_after_prose():
    (block,) = extract_configs("Sure, the configuration is:\ninterface eth0/0\n ip address 1.0.0.1 255.255.255.0\n\n")
    assert block.text == "interface eth0/0\n ip address 1.0.0.1 255.255.255.0\n"


def test_extract_without_config():
    with pytest.raises(NoConfigFound):
        extract_configs("I am not sure what you mean.")


def test_scripted_provider_order_and_exhaustion():
    p = ScriptedProvider({"R1": ["a", "b"], "*": ["z"]})
    s1, s2 = open_session(p, name="R1"), open_session(p, name="R9")
    assert send(s1, p, "q", "human").text == "a"
    assert send(s2, p, "q", "automated").text == "z"
    assert send(s1, p, "q", "automated").text == "b"
    with pytest.raises(ProviderError):
        send(s1, p, "q", "automated")


def test_send_rejects_model_origin():
    p = ScriptedProvider(["a"])
    with pytest.raises(ValueError):
        send(open_session(p), p, "q", "model")


def _recorded(tmp_path):
    p = ScriptedProvider(["one", "two"])
    s = open_session(p, iips_for("translation", load_iip()))
    send(s, p, "first", "human")
    send(s, p, "second", "automated")
    path = tmp_path / "t.jsonl"
    save_transcript([s], path)
    return s, path


def test_transcript_is_faithful(tmp_path):
    s, path = _recorded(tmp_path)
    (loaded,) = load_transcript(path)
    assert loaded.messages == s.messages
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["seq"] for r in rows] == list(range(1, len(rows) + 1))
    assert set(rows[0]) == {"seq", "role", "origin", "text"}


def test_replay_returns_recorded_replies(tmp_path):
    _, path = _recorded(tmp_path)
    p = ReplayProvider(path)
    s = open_session(p)
    assert send(s, p, "anything", "human").text == "one"
    assert send(s, p, "else", "automated").text == "two"
    with pytest.raises(ProviderError):
        send(s, p, "more", "automated")


def test_strict_replay_detects_changed_prompt(tmp_path):
    _, path = _recorded(tmp_path)
    p = ReplayProvider(path, strict=True)
    s = open_session(p)
    assert send(s, p, "first", "human").text == "one"
    with pytest.raises(ReplayMismatch):
        send(s, p, "changed", "automated")


def test_recorded_episodes_load():
    for name in ("translation_episode.jsonl", "synthesis_episode.jsonl"):
        sessions = load_transcript(FIXTURES / name)
        assert sessions and all(s.messages for s in sessions)


def test_provider_spec(tmp_path):
    script = tmp_path / "s.json"
    script.write_text('["hi"]')
    assert isinstance(provider_from_spec(f"scripted:{script}"), ScriptedProvider)
    with pytest.raises(ProviderError):
        provider_from_spec("bogus")


class _Chat(BaseHTTPRequestHandler):
    seen: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Chat.seen.append((body, self.headers.get("Authorization")))
        reply = {"choices": [{"message": {"role": "assistant", "content": f"echo {body['messages'][-1]['content']}"}}]}
        data = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def chat_server():
    server = HTTPServer(("127.0.0.1", 0), _Chat)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()


def test_live_provider_round_trip(chat_server):
    p = LiveProvider(url=chat_server, model="m", key="k", retries=0)
    s = open_session(p, iips_for("translation", load_iip()))
    assert send(s, p, "hello", "human").text == "echo hello"
    body, auth = _Chat.seen[-1]
    assert body["model"] == "m" and body["temperature"] == 0
    assert [m["role"] for m in body["messages"]] == ["system", "user"]
    assert auth == "Bearer k"


def test_live_provider_reports_unreachable_endpoint():
    p = LiveProvider(url="http://127.0.0.1:9/none", model="m", timeout=1, retries=1, backoff=0)
    with pytest.raises(ProviderError, match="2 attempts"):
        send(open_session(p), p, "hello", "human")


def test_live_provider_needs_configuration(monkeypatch):
    monkeypatch.delenv("COSYNTH_LLM_URL", raising=False)
    monkeypatch.delenv("COSYNTH_LLM_MODEL", raising=False)
    with pytest.raises(ProviderError):
        LiveProvider()
