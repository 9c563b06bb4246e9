"""SIDs, users, nested groups and transitive membership resolution."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import AmbiguousName, Defect, UnknownPrincipal

EVERYONE = "S-1-1-0"
# Never matches a membership closure; stands in for accounts that failed to resolve.
UNRESOLVED = "S-1-0-0"

# SDDL two-letter aliases for the well-known SIDs this package understands.
WELL_KNOWN = {
    "WD": EVERYONE,
    "BA": "S-1-5-32-544",
    "SY": "S-1-5-18",
    "AU": "S-1-5-11",
}
WELL_KNOWN_SIDS = frozenset(WELL_KNOWN.values()) | {UNRESOLVED}

_SID_RE = re.compile(r"^S-1(-\d+)+$")

USER = "user"
GROUP = "group"


def is_valid_sid(text: str) -> bool:
    return bool(_SID_RE.match(text)) and text.count("-") >= 2


def canonical_sid(text: str) -> str:
    """Return ``text`` with leading zeros stripped from every component.

    Raises ValueError for anything that is not ``S-1-<authority>[-<subauth>...]``.
    """
    text = text.strip()
    if not is_valid_sid(text):
        raise ValueError(f"malformed SID {text!r}")
    parts = text.split("-")
    return "-".join(["S"] + [str(int(p)) for p in parts[1:]])


def short_name(name: str) -> str:
    """``"CORUH\\User-B"`` -> ``"User-B"``."""
    return name.rsplit("\\", 1)[-1]


@dataclass(frozen=True)
class Principal:
    sid: str
    name: str
    kind: str = USER
    members: tuple[str, ...] = ()

    @property
    def is_group(self) -> bool:
        return self.kind == GROUP

    @property
    def short_name(self) -> str:
        return short_name(self.name)


EVERYONE_PRINCIPAL = Principal(EVERYONE, "Everyone", GROUP)


@dataclass(frozen=True)
class Directory:
    """Immutable principal store. Everyone is implicit and never stored."""

    domain: str
    principals: Mapping[str, Principal] = field(default_factory=dict)

    @classmethod
    def from_principals(cls, domain: str, principals: Iterable[Principal]) -> Directory:
        table: dict[str, Principal] = {}
        for p in principals:
            table[p.sid] = p
        return cls(domain, table)

    def __iter__(self):
        return iter(self.principals.values())

    def __len__(self) -> int:
        return len(self.principals)

    def __contains__(self, sid: object) -> bool:
        return sid in self.principals or sid == EVERYONE

    @cached_property
    def name_index(self) -> dict[str, list[str]]:
        index: dict[str, list[str]] = defaultdict(list)
        for p in self.principals.values():
            index[p.name.casefold()].append(p.sid)
        return dict(index)

    @cached_property
    def short_index(self) -> dict[str, list[str]]:
        index: dict[str, list[str]] = defaultdict(list)
        for p in self.principals.values():
            index[p.short_name.casefold()].append(p.sid)
        return dict(index)

    @cached_property
    def member_of(self) -> dict[str, tuple[str, ...]]:
        """Reverse membership edges: member SID -> groups that list it directly."""
        reverse: dict[str, list[str]] = defaultdict(list)
        for p in self.principals.values():
            for m in p.members:
                reverse[m].append(p.sid)
        return {k: tuple(v) for k, v in reverse.items()}

    @property
    def users(self) -> list[Principal]:
        return [p for p in self.principals.values() if p.kind == USER]

    @property
    def groups(self) -> list[Principal]:
        return [p for p in self.principals.values() if p.kind == GROUP]

    def get(self, sid: str) -> Principal | None:
        if sid == EVERYONE:
            return self.principals.get(EVERYONE, EVERYONE_PRINCIPAL)
        return self.principals.get(sid)

    def display_name(self, sid: str) -> str:
        p = self.get(sid)
        return p.name if p is not None else sid


def resolve_principal(directory: Directory, key: str) -> Principal:
    """Look ``key`` up as a SID, a ``DOMAIN\\name`` or a bare name.

    SIDs match exactly; names match case-insensitively. A bare name is tried
    in the directory's default domain first, then against every domain.
    """
    key = key.strip()
    if key.startswith("S-1-"):
        p = directory.get(key)
        if p is None:
            raise UnknownPrincipal(key)
        return p
    if key.casefold() == "everyone":
        return directory.get(EVERYONE)

    folded = key.casefold()
    if "\\" in key:
        hits = directory.name_index.get(folded, [])
    else:
        hits = directory.name_index.get(f"{directory.domain}\\{key}".casefold(), [])
        if not hits:
            hits = directory.short_index.get(folded, [])
    if not hits:
        raise UnknownPrincipal(key)
    if len(hits) > 1:
        names = sorted(directory.principals[s].name for s in hits)
        raise AmbiguousName(f"{key!r} matches {', '.join(names)}")
    return directory.principals[hits[0]]


def membership_closure(directory: Directory, user: str) -> frozenset[str]:
    """Return the user's SID, every group it reaches by nested membership, and Everyone.

    Cycles are tolerated: each group is expanded at most once.
    """
    if user not in directory:
        raise UnknownPrincipal(user)
    seen = {user, EVERYONE}
    stack = [user, EVERYONE]
    reverse = directory.member_of
    while stack:
        sid = stack.pop()
        for group in reverse.get(sid, ()):
            if group not in seen:
                seen.add(group)
                stack.append(group)
    return frozenset(seen)


def validate_directory(directory: Directory) -> list[Defect]:
    defects: list[Defect] = []
    for sid, p in directory.principals.items():
        if sid != p.sid:
            defects.append(Defect("KeyMismatch", sid, f"stored under {sid} but carries {p.sid}"))
        if not is_valid_sid(p.sid):
            defects.append(Defect("MalformedSid", p.sid, p.name))
        elif canonical_sid(p.sid) != p.sid:
            defects.append(Defect("MalformedSid", p.sid, "non-canonical (leading zeros)"))
        if p.kind not in (USER, GROUP):
            defects.append(Defect("UnknownKind", p.sid, p.kind))
        if p.kind == USER and p.members:
            defects.append(Defect("UserWithMembers", p.sid, p.name))
        for m in p.members:
            if m not in directory.principals and m not in WELL_KNOWN_SIDS:
                defects.append(Defect("DanglingMember", p.sid, m))
    for name, sids in directory.name_index.items():
        if len(sids) > 1:
            defects.append(Defect("DuplicateName", name, ", ".join(sids)))
    return defects
