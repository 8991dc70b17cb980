"""Chat sessions against a model: live HTTP, transcript replay, or a script.

Transcripts are JSON lines ``{seq, role, origin, text}`` with an optional
``session`` key when one file holds several conversations.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

log = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")
ORIGINS = ("iip", "automated", "human", "model")
WORKFLOWS = ("translation", "synthesis", "both")


class ProviderError(RuntimeError):
    pass


class ReplayMismatch(ProviderError):
    pass


class NoConfigFound(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    seq: int
    role: str
    origin: str
    text: str

    def __post_init__(self) -> None:
        if self.seq < 1:
            raise ValueError("seq must be positive")
        if self.role not in ROLES or self.origin not in ORIGINS:
            raise ValueError(f"bad role/origin {self.role}/{self.origin}")
        if (self.role == "assistant") != (self.origin == "model"):
            raise ValueError("assistant messages and model origin go together")


@dataclass
class Session:
    provider_id: str
    messages: list = field(default_factory=list)
    name: str = ""

    def _append(self, role: str, origin: str, text: str) -> Message:
        msg = Message(len(self.messages) + 1, role, origin, text)
        self.messages.append(msg)
        return msg

    @property
    def user_messages(self) -> list:
        return [m for m in self.messages if m.role == "user"]


@dataclass(frozen=True)
class InstructionPrompt:
    name: str
    text: str
    workflow: str = "both"


# ---------------------------------------------------------------------------
# instruction prompts

def _parse_iip(path: Path, text: str) -> InstructionPrompt:
    header, _, body = text.partition("\n\n")
    meta = {}
    for line in header.splitlines():
        key, sep, value = line.partition(":")
        if not sep:
            raise ValueError(f"{path}: malformed header line {line!r}")
        meta[key.strip()] = value.strip()
    workflow = meta.get("workflow", "both")
    if workflow not in WORKFLOWS:
        raise ValueError(f"{path}: unknown workflow {workflow}")
    return InstructionPrompt(meta.get("name", path.stem), body.strip(), workflow)


def load_iip(directory: Union[str, Path, None] = None) -> list:
    """All prompts in ``directory`` (the shipped set by default), sorted by name."""
    if directory is None:
        entries = [(Path(e.name), e.read_text(encoding="utf-8"))
                   for e in resources.files("cosynth").joinpath("iip").iterdir() if e.name.endswith(".txt")]
    else:
        root = Path(directory)
        if not root.is_dir():
            raise FileNotFoundError(f"IIP directory {root} does not exist")
        entries = [(p, p.read_text(encoding="utf-8")) for p in sorted(root.glob("*.txt"))]
    prompts: dict = {}
    for path, text in entries:
        p = _parse_iip(path, text)
        if p.name in prompts:
            raise ValueError(f"duplicate IIP name {p.name}")
        prompts[p.name] = p
    return [prompts[k] for k in sorted(prompts)]


def iips_for(workflow: str, prompts: Iterable[InstructionPrompt]) -> list:
    return [p for p in prompts if p.workflow in (workflow, "both")]


# ---------------------------------------------------------------------------
# providers

def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ScriptedProvider:
    """Returns programmed replies in order, per session name.

    ``script`` is a list (shared by every session) or a mapping from session
    name to list; the key ``"*"`` is the fallback.
    """

    provider_id = "scripted"

    def __init__(self, script: Union[list, dict]):
        self.script = {"*": list(script)} if isinstance(script, list) else {k: list(v) for k, v in script.items()}
        self._pos: dict = {}

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedProvider":
        return cls(json.loads(Path(path).read_text()))

    def complete(self, session: Session) -> str:
        key = session.name if session.name in self.script else "*"
        replies = self.script.get(key)
        if replies is None:
            raise ProviderError(f"no script for session {session.name!r}")
        i = self._pos.get(key, 0)
        if i >= len(replies):
            raise ProviderError(f"script for session {session.name!r} exhausted after {i} replies")
        self._pos[key] = i + 1
        return replies[i]


class ReplayProvider:
    """Plays back assistant messages from a recorded transcript.

    In strict mode each outgoing prompt must match the recorded one.
    """

    provider_id = "replay"

    def __init__(self, path: Union[str, Path], strict: bool = False):
        self.path = Path(path)
        self.strict = strict
        self.sessions = {s.name: s for s in load_transcript(self.path)}
        self._pos: dict = {}

    def _recorded(self, name: str) -> Session:
        if name not in self.sessions:
            raise ProviderError(f"transcript {self.path} has no session {name!r}")
        return self.sessions[name]

    def complete(self, session: Session) -> str:
        recorded = self._recorded(session.name)
        i = self._pos.get(session.name, 0)
        replies = [(k, m) for k, m in enumerate(recorded.messages) if m.role == "assistant"]
        if i >= len(replies):
            raise ProviderError(f"replay of session {session.name!r} exhausted after {i} replies")
        index, reply = replies[i]
        if self.strict:
            sent = session.messages[-1].text
            want = recorded.messages[index - 1].text if index > 0 else ""
            if digest(sent) != digest(want):
                raise ReplayMismatch(
                    f"prompt {i + 1} of session {session.name!r} differs from the recording: "
                    f"sent {sent[:80]!r}, recorded {want[:80]!r}")
        self._pos[session.name] = i + 1
        return reply.text


class LiveProvider:
    """Chat-completion over HTTP, configured from the environment."""

    provider_id = "live"
    _gates: dict = {}

    def __init__(self, url: Optional[str] = None, model: Optional[str] = None, key: Optional[str] = None,
                 timeout: float = 120.0, retries: int = 3, backoff: float = 2.0, max_concurrent: int = 4):
        self.url = url or os.environ.get("COSYNTH_LLM_URL", "")
        self.model = model or os.environ.get("COSYNTH_LLM_MODEL", "")
        self.key = key if key is not None else os.environ.get("COSYNTH_LLM_KEY", "")
        if not self.url or not self.model:
            raise ProviderError("set COSYNTH_LLM_URL and COSYNTH_LLM_MODEL for the live provider")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._gate = self._gates.setdefault(max_concurrent, threading.BoundedSemaphore(max_concurrent))

    def _post(self, payload: dict) -> dict:
        req = urllib.request.Request(self.url, data=json.dumps(payload).encode("utf-8"), method="POST")
        req.add_header("Content-Type", "application/json")
        if self.key:
            req.add_header("Authorization", f"Bearer {self.key}")
        with self._gate, urllib.request.urlopen(req, timeout=self.timeout) as resp:
            return json.loads(resp.read().decode("utf-8"))

    def complete(self, session: Session) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.text} for m in session.messages],
            "temperature": 0,
        }
        last: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            try:
                data = self._post(payload)
                return data["choices"][0]["message"]["content"]
            except (urllib.error.URLError, TimeoutError, OSError, KeyError, IndexError, ValueError) as exc:
                last = exc
                log.warning("chat request failed (attempt %d/%d): %s", attempt + 1, self.retries + 1, exc)
                if attempt < self.retries:
                    time.sleep(self.backoff * (2 ** attempt))
        raise ProviderError(f"chat request failed after {self.retries + 1} attempts: {last}")


def provider_from_spec(spec: str, strict: bool = False):
    """``live``, ``replay:<file>`` or ``scripted:<file>``."""
    kind, _, arg = spec.partition(":")
    if kind == "live":
        return LiveProvider()
    if kind == "replay" and arg:
        return ReplayProvider(arg, strict=strict)
    if kind == "scripted" and arg:
        return ScriptedProvider.from_file(arg)
    raise ProviderError(f"unknown provider {spec!r}")


# ---------------------------------------------------------------------------
# sessions

def open_session(provider, iips: Iterable[InstructionPrompt] = (), name: str = "") -> Session:
    session = Session(provider.provider_id, name=name)
    for p in iips:
        session._append("system", "iip", p.text)
    return session


def send(session: Session, provider, text: str, origin: str) -> Message:
    if origin not in ("automated", "human"):
        raise ValueError(f"user prompts are automated or human, not {origin}")
    session._append("user", origin, text)
    reply = provider.complete(session)
    return session._append("assistant", "model", reply)


def save_transcript(sessions: Iterable[Session], path: Union[str, Path]) -> None:
    sessions = list(sessions)
    tagged = len(sessions) > 1 or any(s.name for s in sessions)
    with open(path, "w", encoding="utf-8") as fh:
        for s in sessions:
            for m in s.messages:
                row = {"seq": m.seq, "role": m.role, "origin": m.origin, "text": m.text}
                if tagged:
                    row["session"] = s.name
                fh.write(json.dumps(row) + "\n")


def load_transcript(path: Union[str, Path]) -> list:
    sessions: dict = {}
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            row = json.loads(line)
            name = row.get("session", "")
            s = sessions.setdefault(name, Session("transcript", name=name))
            msg = Message(row["seq"], row["role"], row["origin"], row["text"])
            if s.messages and msg.seq <= s.messages[-1].seq:
                raise ValueError(f"{path}:{number}: seq must increase within session {name!r}")
            s.messages.append(msg)
    return list(sessions.values())


# ---------------------------------------------------------------------------
# reply cleaning

_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.S)
_NAME = re.compile(r"\b(R\d+)\.cfg\b")
_CLI_PROMPT = re.compile(r"^\s*[\w.-]+(?:\([\w-]+\))?[#>]\s?")
_CONFIG_START = re.compile(
    r"^\s*(interface|router|route-map|ip |neighbor|network|hostname|system\s*\{|interfaces\s*\{|"
    r"protocols\s*\{|policy-options\s*\{|routing-options\s*\{)")


@dataclass(frozen=True)
class ConfigBlock:
    name: Optional[str]
    text: str


def _strip_prompts(text: str) -> str:
    return "\n".join(_CLI_PROMPT.sub("", line) for line in text.splitlines()).strip("\n") + "\n"


def extract_configs(reply: str) -> list:
    """Configuration blocks in ``reply``, in order, named when a header says so."""
    blocks = []
    last = 0
    for m in _FENCE.finditer(reply):
        before = reply[last:m.start()]
        names = _NAME.findall(before)
        body = m.group(1)
        if body.strip():
            blocks.append(ConfigBlock(names[-1] if names else None, _strip_prompts(body)))
        last = m.end()
    if blocks:
        return blocks
    lines = reply.splitlines()
    start = next((i for i, line in enumerate(lines) if _CONFIG_START.match(line)), None)
    if start is None:
        raise NoConfigFound("no configuration found")
    end = len(lines)
    while end > start and not lines[end - 1].strip():
        end -= 1
    names = _NAME.findall("\n".join(lines[:start]))
    return [ConfigBlock(names[-1] if names else None, _strip_prompts("\n".join(lines[start:end])))]


def configs_by_name(blocks: list) -> dict:
    """Named blocks keyed by router; a lone unnamed block is keyed ``None``."""
    out: dict = {}
    for b in blocks:
        out[b.name] = b.text
    return out
