"""Parsers and printers for the two configuration dialects."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from cosynth.ir import RouterConfig


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


class Vendor(str, enum.Enum):
    CISCO = "cisco"
    JUNIPER = "juniper"


@dataclass(frozen=True)
class SyntaxDiagnostic:
    line_number: int
    line_text: str
    message: str
    severity: Severity = Severity.ERROR
    vendor: Vendor = Vendor.CISCO
    # Junos only: the statement flattened to its full hierarchy path.
    statement: str = ""

    def render(self) -> str:
        return f"line {self.line_number}: {self.message}: '{self.line_text}'"


@dataclass
class ParseResult:
    config: RouterConfig
    diagnostics: list = field(default_factory=list)

    @property
    def errors(self) -> list:
        return [d for d in self.diagnostics if d.severity is Severity.ERROR]


def detect_vendor(text: str) -> Vendor:
    """Brace-structured text is Junos, anything else is IOS-style."""
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.endswith("{") or stripped == "}":
            return Vendor.JUNIPER
    return Vendor.CISCO


def parse(text: str, vendor: Vendor | None = None) -> ParseResult:
    from cosynth.frontends.cisco import parse_cisco
    from cosynth.frontends.juniper import parse_juniper

    vendor = vendor or detect_vendor(text)
    return parse_juniper(text) if vendor is Vendor.JUNIPER else parse_cisco(text)


def render(config: RouterConfig, vendor: Vendor) -> str:
    from cosynth.frontends.cisco import print_cisco
    from cosynth.frontends.juniper import print_juniper

    return print_juniper(config) if vendor is Vendor.JUNIPER else print_cisco(config)


def _preamble(vendor: Vendor, router: str) -> str:
    if vendor is Vendor.JUNIPER:
        return f"system {{\n    host-name {router};\n}}\n"
    return f"hostname {router}\n!\n"


def prepend_preamble(text: str, vendor: Vendor, router: str) -> str:
    """Put the harness-owned setup lines in front of a model-written body."""
    head = _preamble(vendor, router)
    body = text
    while body.startswith(head):
        body = body[len(head):]
    return head + body


__all__ = [
    "ParseResult",
    "Severity",
    "SyntaxDiagnostic",
    "Vendor",
    "detect_vendor",
    "parse",
    "prepend_preamble",
    "render",
]
