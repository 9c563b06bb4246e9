"""Parser and emitter for the SDDL subset used in snapshot files.

Grammar::

    sddl   := ["O:" sid] ["G:" sid] "D:" ["P"] ace* ["S:" <ignored>]
    ace    := "(" ("A"|"D") ";" flag* ";" rights ";" ";" ";" sid ")"
    flag   := "OI" | "CI" | "NP" | "IO" | "ID"
    rights := "0x" hex+ | ("FA"|"FR"|"FW"|"FX"|"GA"|"GR"|"GW"|"GX")+
    sid    := "S-1-" ... | "WD" | "BA" | "SY" | "AU"

Error offsets are 1-based.
"""

from __future__ import annotations

import logging
import re

from .access_mask import FILE_ALL_ACCESS, FILE_GENERIC_EXECUTE, FILE_GENERIC_READ, FILE_GENERIC_WRITE
from .ace import ALLOW, DENY, FLAG_ORDER, Ace, AceFlag, Dacl, SecurityDescriptor
from .errors import NullDaclUnrepresentable, SddlError, UndefinedRightToken, UnknownSidAlias
from .principals import WELL_KNOWN, canonical_sid

log = logging.getLogger(__name__)

RIGHT_ALIASES = {
    "FA": FILE_ALL_ACCESS,
    "FR": FILE_GENERIC_READ,
    "FW": FILE_GENERIC_WRITE,
    "FX": FILE_GENERIC_EXECUTE,
}
GENERIC_ALIASES = {
    "GA": FILE_ALL_ACCESS,
    "GR": FILE_GENERIC_READ,
    "GW": FILE_GENERIC_WRITE,
    "GX": FILE_GENERIC_EXECUTE,
}
_ALL_RIGHT_TOKENS = {**RIGHT_ALIASES, **GENERIC_ALIASES}
_MASK_TO_ALIAS = {v: k for k, v in RIGHT_ALIASES.items()}
_SID_TO_ALIAS = {v: k for k, v in WELL_KNOWN.items()}

_SID_RE = re.compile(r"S-1(?:-\d+)+")
_HEX_RE = re.compile(r"0[xX]([0-9a-fA-F]+)")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str, expected: tuple[str, ...] = (), at: int | None = None,
             cls: type[SddlError] = SddlError):
        raise cls(message, (self.pos if at is None else at) + 1, expected)

    def peek(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str) -> None:
        if not self.peek(literal):
            found = self.text[self.pos:self.pos + len(literal)] or "end of input"
            self.fail(f"unexpected {found!r}", (repr(literal),))
        self.pos += len(literal)

    def sid(self) -> str:
        m = _SID_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            try:
                return canonical_sid(m.group())
            except ValueError:
                self.fail(f"malformed SID {m.group()!r}", at=m.start())
        tok = self.text[self.pos:self.pos + 2]
        if tok in WELL_KNOWN:
            self.pos += 2
            return WELL_KNOWN[tok]
        if len(tok) == 2 and tok.isalpha() and tok.isupper():
            self.fail(f"unknown SID alias {tok!r}", tuple(WELL_KNOWN), cls=UnknownSidAlias)
        self.fail("expected a SID", ("S-1-...",) + tuple(WELL_KNOWN))

    def flags(self) -> frozenset[AceFlag]:
        seen: set[AceFlag] = set()
        while not self.peek(";"):
            tok = self.text[self.pos:self.pos + 2]
            try:
                flag = AceFlag(tok)
            except ValueError:
                self.fail(f"unknown ACE flag {tok!r}" if tok else "unterminated flags",
                          tuple(f.value for f in FLAG_ORDER) + ("';'",))
            if flag in seen:
                self.fail(f"duplicate ACE flag {tok!r}")
            seen.add(flag)
            self.pos += 2
        return frozenset(seen)

    def rights(self) -> int:
        m = _HEX_RE.match(self.text, self.pos)
        if m:
            value = int(m.group(1), 16)
            if value > 0xFFFFFFFF:
                self.fail("access mask exceeds 32 bits")
            self.pos = m.end()
            return value
        mask = 0
        start = self.pos
        while not self.peek(";"):
            tok = self.text[self.pos:self.pos + 2]
            if tok not in _ALL_RIGHT_TOKENS:
                if not tok:
                    self.fail("unterminated rights field", ("';'",))
                self.fail(f"undefined right token {tok!r}", tuple(_ALL_RIGHT_TOKENS) + ("0x...",),
                          cls=UndefinedRightToken)
            mask |= _ALL_RIGHT_TOKENS[tok]
            self.pos += 2
        if self.pos == start:
            self.fail("empty rights field", tuple(_ALL_RIGHT_TOKENS) + ("0x...",),
                      cls=UndefinedRightToken)
        return mask

    def ace(self) -> Ace:
        self.expect("(")
        if self.peek("A"):
            kind = ALLOW
        elif self.peek("D"):
            kind = DENY
        else:
            self.fail("unsupported ACE type", ("A", "D"))
        self.pos += 1
        self.expect(";")
        flags = self.flags()
        self.expect(";")
        mask = self.rights()
        self.expect(";")
        if not self.peek(";"):
            self.fail("object ACE GUID fields must be empty", ("';'",))
        self.expect(";")
        if not self.peek(";"):
            self.fail("object ACE GUID fields must be empty", ("';'",))
        self.expect(";")
        sid = self.sid()
        self.expect(")")
        return Ace(kind, sid, mask, flags)

    def descriptor(self) -> SecurityDescriptor:
        owner = group = None
        if self.peek("O:"):
            self.pos += 2
            owner = self.sid()
        if self.peek("G:"):
            self.pos += 2
            group = self.sid()
        self.expect("D:")
        protected = False
        if self.peek("P"):
            protected = True
            self.pos += 1
        aces = []
        while self.peek("("):
            aces.append(self.ace())
        if self.peek("S:"):
            log.warning("SACL section at offset %d ignored", self.pos + 1)
            self.pos = len(self.text)
        if self.pos != len(self.text):
            self.fail(f"unexpected {self.text[self.pos]!r}", ("'('", "'S:'", "end of input"))
        return SecurityDescriptor(Dacl(True, tuple(aces)), owner, group, protected)


def parse_sddl(text: str) -> SecurityDescriptor:
    if not isinstance(text, str):
        raise TypeError("SDDL text must be str")
    return _Parser(text).descriptor()


def _sid_token(sid: str) -> str:
    return _SID_TO_ALIAS.get(sid, sid)


def emit_sddl(sd: SecurityDescriptor) -> str:
    if not sd.dacl.present:
        raise NullDaclUnrepresentable("a null DACL has no D: form; use dacl_present=false")
    out = []
    if sd.owner is not None:
        out.append("O:" + _sid_token(sd.owner))
    if sd.group is not None:
        out.append("G:" + _sid_token(sd.group))
    out.append("D:P" if sd.protected else "D:")
    for ace in sd.dacl.aces:
        kind = "A" if ace.ace_type == ALLOW else "D"
        rights = _MASK_TO_ALIAS.get(ace.mask, f"0x{ace.mask:x}")
        out.append(f"({kind};{''.join(ace.sorted_flags())};{rights};;;{_sid_token(ace.sid)})")
    return "".join(out)
