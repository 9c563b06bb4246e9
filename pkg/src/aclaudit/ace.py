"""ACEs, DACLs, security descriptors and canonical ACE ordering."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .access_mask import format_mask, undefined_bits
from .errors import Defect, NullDacl
from .principals import WELL_KNOWN_SIDS, Directory


class AceFlag(str, Enum):
    OI = "OI"  # object inherit
    CI = "CI"  # container inherit
    NP = "NP"  # no propagate
    IO = "IO"  # inherit only
    ID = "ID"  # inherited copy


FLAG_ORDER: tuple[AceFlag, ...] = tuple(AceFlag)

ALLOW = "allow"
DENY = "deny"


def flag_set(flags: Iterable[str | AceFlag]) -> frozenset[AceFlag]:
    return frozenset(AceFlag(f) for f in flags)


@dataclass(frozen=True)
class Ace:
    ace_type: str
    sid: str
    mask: int
    flags: frozenset[AceFlag] = frozenset()

    def __post_init__(self):
        if self.ace_type not in (ALLOW, DENY):
            raise ValueError(f"ace_type must be 'allow' or 'deny', got {self.ace_type!r}")
        if not isinstance(self.flags, frozenset):
            object.__setattr__(self, "flags", flag_set(self.flags))

    @property
    def is_deny(self) -> bool:
        return self.ace_type == DENY

    @property
    def inherited(self) -> bool:
        return AceFlag.ID in self.flags

    @property
    def inherit_only(self) -> bool:
        return AceFlag.IO in self.flags

    def sorted_flags(self) -> list[str]:
        return [f.value for f in FLAG_ORDER if f in self.flags]

    def with_flags(self, flags: Iterable[AceFlag]) -> Ace:
        return Ace(self.ace_type, self.sid, self.mask, frozenset(flags))

    def __str__(self) -> str:
        return f"{self.ace_type}({self.sid}, {format_mask(self.mask)}, {''.join(self.sorted_flags())})"


@dataclass(frozen=True)
class Dacl:
    present: bool = True
    aces: tuple[Ace, ...] = ()

    def __post_init__(self):
        if not isinstance(self.aces, tuple):
            object.__setattr__(self, "aces", tuple(self.aces))
        if not self.present and self.aces:
            raise ValueError("a null DACL cannot carry ACEs")

    def __iter__(self):
        return iter(self.aces)

    def __len__(self) -> int:
        return len(self.aces)


NULL_DACL = Dacl(present=False)


@dataclass(frozen=True)
class SecurityDescriptor:
    dacl: Dacl = field(default_factory=Dacl)
    owner: str | None = None
    group: str | None = None
    protected: bool = False

    def __post_init__(self):
        if not self.dacl.present and self.protected:
            object.__setattr__(self, "protected", False)


def block_index(ace: Ace) -> int:
    """0 explicit deny, 1 explicit allow, 2 inherited deny, 3 inherited allow."""
    return (2 if ace.inherited else 0) + (0 if ace.is_deny else 1)


def canonicalize(dacl: Dacl) -> Dacl:
    """Stable reorder into explicit deny, explicit allow, inherited deny, inherited allow."""
    if not dacl.present:
        raise NullDacl("cannot canonicalize a null DACL")
    blocks: list[list[Ace]] = [[], [], [], []]
    for ace in dacl.aces:
        blocks[block_index(ace)].append(ace)
    return Dacl(True, tuple(blocks[0] + blocks[1] + blocks[2] + blocks[3]))


def is_canonical(dacl: Dacl) -> bool:
    idx = [block_index(a) for a in dacl.aces]
    return all(a <= b for a, b in zip(idx, idx[1:]))


def validate_sd(sd: SecurityDescriptor, directory: Directory, where: str = "") -> list[Defect]:
    defects: list[Defect] = []
    for i, ace in enumerate(sd.dacl.aces):
        subject = f"{where}#{i}" if where else f"#{i}"
        if ace.mask == 0:
            defects.append(Defect("ZeroMask", subject, str(ace)))
        if undefined_bits(ace.mask):
            defects.append(Defect("UndefinedBits", subject, format_mask(undefined_bits(ace.mask))))
        if AceFlag.IO in ace.flags and not ace.flags & {AceFlag.OI, AceFlag.CI}:
            defects.append(Defect("OrphanInheritOnly", subject, str(ace)))
        if ace.sid not in directory and ace.sid not in WELL_KNOWN_SIDS:
            defects.append(Defect("UnknownSid", subject, ace.sid))
    for label, sid in (("owner", sd.owner), ("group", sd.group)):
        if sid is not None and sid not in directory and sid not in WELL_KNOWN_SIDS:
            defects.append(Defect("UnknownSid", f"{where}:{label}" if where else label, sid))
    return defects
