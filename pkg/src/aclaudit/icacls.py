"""Reader for ``icacls <root> /t`` text dumps.

Each folder starts at column 0 with its path followed by the first entry;
further entries for the same folder are indented. Only the single-token
simple-rights form is understood (``(F)``, ``(M)``, ``(RX)``, ``(R)``, ``(W)``,
``(D)``); comma-separated specific-rights lists are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .access_mask import FILE_ALL_ACCESS, FILE_GENERIC_READ, FILE_GENERIC_WRITE
from .ace import ALLOW, DENY, Ace, AceFlag, Dacl, SecurityDescriptor
from .errors import AclAuditError, Defect, MalformedEntry, UnknownToken
from .inheritance import build_tree, normalize_path, parent_path
from .principals import EVERYONE, UNRESOLVED, Directory, resolve_principal

SIMPLE_RIGHTS = {
    "F": FILE_ALL_ACCESS,
    "M": 0x1301BF,
    "RX": 0x1200A9,
    "R": FILE_GENERIC_READ,
    "W": FILE_GENERIC_WRITE,
    "D": 0x10000,
}
_FLAG_TOKENS = {"I": AceFlag.ID, "OI": AceFlag.OI, "CI": AceFlag.CI, "IO": AceFlag.IO, "NP": AceFlag.NP}
_TOKEN_FOR_FLAG = {v: k for k, v in _FLAG_TOKENS.items()}
# Display order icacls uses for inheritance tokens.
_FLAG_DISPLAY = (AceFlag.ID, AceFlag.OI, AceFlag.CI, AceFlag.IO, AceFlag.NP)

# Multi-word account domains that would otherwise be split at the space.
_SPACED_DOMAINS = ("NT AUTHORITY", "NT SERVICE", "CREATOR OWNER", "CREATOR GROUP",
                   "APPLICATION PACKAGE AUTHORITY")

_ENTRY_TAIL = re.compile(r":((?:\([^()]*\))+)\s*$")
_TOKEN = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class IcaclsEntry:
    path: str
    account: str
    deny: bool
    flags: frozenset[AceFlag]
    right_token: str

    @property
    def mask(self) -> int:
        return simple_right_mask(self.right_token)

    def render(self) -> str:
        tokens = [_TOKEN_FOR_FLAG[f] for f in _FLAG_DISPLAY if f in self.flags]
        if self.deny:
            tokens.append("DENY")
        tokens.append(self.right_token)
        return f"{self.account}:" + "".join(f"({t})" for t in tokens)


def simple_right_mask(token: str) -> int:
    try:
        return SIMPLE_RIGHTS[token]
    except KeyError:
        raise UnknownToken(token) from None


def _parse_tokens(text: str, lineno: int, col: int) -> tuple[bool, frozenset[AceFlag], str]:
    deny = False
    flags: set[AceFlag] = set()
    right = None
    for m in _TOKEN.finditer(text):
        tok = m.group(1)
        where = col + m.start(1) + 1
        if tok in _FLAG_TOKENS:
            flags.add(_FLAG_TOKENS[tok])
        elif tok == "DENY":
            deny = True
        elif tok in SIMPLE_RIGHTS:
            if right is not None:
                raise MalformedEntry(f"second rights token {tok!r}", lineno, where)
            right = tok
        else:
            raise UnknownToken(tok, lineno, where)
    if right is None:
        raise MalformedEntry("entry has no rights token", lineno, col + 1)
    return deny, frozenset(flags), right


def _split_head(head: str, indent_hint: int | None) -> tuple[str, str]:
    """Split ``"<path> <account>"`` from a folder's first line."""
    if indent_hint and 0 < indent_hint - 1 < len(head) and head[indent_hint - 1] == " ":
        path, account = head[:indent_hint - 1].rstrip(), head[indent_hint:]
        if path and account:
            return path, account
    for domain in _SPACED_DOMAINS:
        i = head.upper().rfind(" " + domain)
        if i > 0:
            return head[:i].rstrip(), head[i + 1:]
    words = head.split(" ")
    # The account begins at the last word holding a domain backslash; with no
    # such word past the path, it is the final word.
    for i in range(len(words) - 1, 0, -1):
        if "\\" in words[i]:
            return " ".join(words[:i]).rstrip(), " ".join(words[i:])
    if len(words) < 2:
        raise ValueError(head)
    return " ".join(words[:-1]).rstrip(), words[-1]


def parse_icacls(text: str) -> dict[str, list[IcaclsEntry]]:
    """Entries grouped by folder path, in file order."""
    lines = text.splitlines()
    grouped: dict[str, list[IcaclsEntry]] = {}
    current: str | None = None
    for idx, raw in enumerate(lines):
        lineno = idx + 1
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith(("Successfully processed", "Failed processing")):
            continue
        m = _ENTRY_TAIL.search(line)
        if m is None:
            raise MalformedEntry("expected '<account>:(...)' entry", lineno, 1)
        tokens_col = m.start(1)
        deny, flags, right = _parse_tokens(m.group(1), lineno, tokens_col)
        head = line[:m.start()]
        if line[0] in " \t":
            if current is None:
                raise MalformedEntry("indented entry before any folder line", lineno, 1)
            account = head.strip()
        else:
            hint = None
            for nxt in lines[idx + 1:]:
                if nxt.strip():
                    if nxt[0] in " \t":
                        hint = len(nxt) - len(nxt.lstrip(" "))
                    break
            try:
                current, account = _split_head(head, hint)
            except ValueError:
                raise MalformedEntry("folder line has no account after the path", lineno, 1) from None
        if not account:
            raise MalformedEntry("empty account name", lineno, 1)
        grouped.setdefault(current, []).append(IcaclsEntry(current, account, deny, flags, right))
    return grouped


def render_icacls(grouped: Mapping[str, list[IcaclsEntry]]) -> str:
    out = []
    for path, entries in grouped.items():
        pad = " " * (len(path) + 1)
        for i, e in enumerate(entries):
            out.append((path + " " if i == 0 else pad) + e.render())
        out.append("")
    out.append(f"Successfully processed {len(grouped)} files; Failed processing 0 files")
    return "\r\n".join(out) + "\r\n"


def resolve_account(directory: Directory, account: str,
                    aliases: Mapping[str, str] | None = None) -> str | None:
    if aliases:
        folded = {k.casefold(): v for k, v in aliases.items()}
        account = folded.get(account.casefold(), account)
    if account.casefold() in ("everyone", "\\everyone"):
        return EVERYONE
    try:
        return resolve_principal(directory, account).sid
    except AclAuditError:
        return None


def entry_ace(entry: IcaclsEntry, sid: str) -> Ace:
    return Ace(DENY if entry.deny else ALLOW, sid, entry.mask, entry.flags)


def to_snapshot(grouped: Mapping[str, list[IcaclsEntry]], directory: Directory,
                aliases: Mapping[str, str] | None = None):
    """Build a Snapshot from parsed entries.

    Returns ``(snapshot, defects)``. Unresolvable accounts keep their ACE under a
    SID that matches nobody; ancestors missing from the dump are added with an
    empty DACL.
    """
    from .snapshot import Snapshot

    defects: list[Defect] = []
    folders: dict[str, tuple[str, SecurityDescriptor]] = {}
    for raw_path, entries in grouped.items():
        path = normalize_path(raw_path)
        aces = []
        for i, e in enumerate(entries):
            sid = resolve_account(directory, e.account, aliases)
            if sid is None:
                defects.append(Defect("UnresolvedAccount", f"{path}#{i}", e.account))
                sid = UNRESOLVED
            aces.append(entry_ace(e, sid))
        folders[path.casefold()] = (path, SecurityDescriptor(Dacl(True, tuple(aces))))
    if not folders:
        raise MalformedEntry("dump contains no entries", 1, 1)

    keys = list(folders)
    common = keys[0].split("/")
    for k in keys[1:]:
        parts = k.split("/")
        n = 0
        while n < min(len(common), len(parts)) and common[n] == parts[n]:
            n += 1
        common = common[:n]
    if not common or not common[0]:
        raise MalformedEntry("folders do not share a common root", 1, 1)
    root_key = "/".join(common)
    for k in keys:
        cur = parent_path(folders[k][0])
        while cur is not None and len(cur) >= len(root_key) and cur.casefold() not in folders:
            folders[cur.casefold()] = (cur, SecurityDescriptor(Dacl(True, ())))
            defects.append(Defect("SynthesizedFolder", cur, "ancestor absent from dump; empty DACL"))
            cur = parent_path(cur)
    root = build_tree(folders.values())
    return Snapshot(directory.domain, directory, root), defects

