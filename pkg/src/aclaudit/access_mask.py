"""NTFS folder access-mask layout, the 19 report rights and the basic-permission table."""

from __future__ import annotations

from enum import Enum, IntFlag


class FileRight(IntFlag):
    LIST_DIRECTORY = 0x1
    WRITE_DATA = 0x2
    APPEND_DATA = 0x4
    READ_EA = 0x8
    WRITE_EA = 0x10
    TRAVERSE = 0x20
    DELETE_CHILD = 0x40
    READ_ATTRIBUTES = 0x80
    WRITE_ATTRIBUTES = 0x100
    DELETE = 0x10000
    READ_CONTROL = 0x20000
    WRITE_DAC = 0x40000
    WRITE_OWNER = 0x80000
    SYNCHRONIZE = 0x100000


DEFINED_BITS = 0x1F01FF

# Standard file-rights aliases (FILE_GENERIC_*) used by SDDL and icacls.
FILE_ALL_ACCESS = 0x1F01FF
FILE_GENERIC_READ = 0x120089
FILE_GENERIC_WRITE = 0x120116
FILE_GENERIC_EXECUTE = 0x1200A0


class ReportRight(Enum):
    """Report columns, in output order."""

    ListDirectory = 0x1
    WriteData = 0x2
    AppendData = 0x4
    ReadExtendedAttributes = 0x8
    WriteExtendedAttributes = 0x10
    Traverse = 0x20
    DeleteSubdirectoriesAndFiles = 0x40
    ReadAttributes = 0x80
    WriteAttributes = 0x100
    Write = 0x116
    Delete = 0x10000
    ReadPermissions = 0x20000
    Read = 0x20089
    ReadAndExecute = 0x200A9
    Modify = 0x301BF
    ChangePermissions = 0x40000
    TakeOwnership = 0x80000
    Synchronize = 0x100000
    FullControl = 0x1F01FF

    @property
    def mask(self) -> int:
        return self.value

    @property
    def is_atomic(self) -> bool:
        return self in ATOMIC_RIGHTS

    @classmethod
    def parse(cls, name: str) -> ReportRight:
        for r in cls:
            if r.name.casefold() == name.strip().casefold():
                return r
        raise KeyError(name)


REPORT_RIGHTS: tuple[ReportRight, ...] = tuple(ReportRight)
ATOMIC_RIGHTS: tuple[ReportRight, ...] = tuple(r for r in ReportRight if r.value & (r.value - 1) == 0)
COMPOSITE_RIGHTS: tuple[ReportRight, ...] = tuple(r for r in ReportRight if r not in ATOMIC_RIGHTS)


class BasicPermission(Enum):
    FullControl = "Full Control"
    Modify = "Modify"
    ReadAndExecute = "Read & Execute"
    ListFolderContents = "List Folder Contents"
    Read = "Read"
    Write = "Write"


_R = ReportRight
_READ_SET = frozenset({_R.ListDirectory, _R.ReadAttributes, _R.ReadExtendedAttributes, _R.ReadPermissions})
_RX_SET = _READ_SET | {_R.Traverse}
_WRITE_SET = frozenset({_R.WriteData, _R.AppendData, _R.WriteAttributes, _R.WriteExtendedAttributes,
                        _R.ReadPermissions})

# Checked cells of the folder special-permissions table. The Full Control column
# leaves Take Ownership blank and Synchronize is not listed at all; right_mask()
# still folds both into FullControl.
_BASIC_TABLE: dict[BasicPermission, frozenset[ReportRight]] = {
    BasicPermission.FullControl: _RX_SET | _WRITE_SET
    | {_R.DeleteSubdirectoriesAndFiles, _R.Delete, _R.ChangePermissions},
    BasicPermission.Modify: _RX_SET | _WRITE_SET | {_R.Delete},
    BasicPermission.ReadAndExecute: _RX_SET,
    BasicPermission.ListFolderContents: _RX_SET,
    BasicPermission.Read: _READ_SET,
    BasicPermission.Write: _WRITE_SET,
}


def right_mask(right: ReportRight) -> int:
    return right.value


def expand_basic(basic: BasicPermission) -> frozenset[ReportRight]:
    return _BASIC_TABLE[basic]


def decompose(mask: int) -> frozenset[ReportRight]:
    """Atomic rights whose bits are set in ``mask``. Undefined bits are dropped."""
    return frozenset(r for r in ATOMIC_RIGHTS if mask & r.value)


def undefined_bits(mask: int) -> int:
    return mask & ~DEFINED_BITS


def format_mask(mask: int) -> str:
    return f"0x{mask:x}"


def parse_mask(text: str) -> int:
    text = text.strip()
    if not text.lower().startswith("0x"):
        raise ValueError(f"mask must be hex text '0x...', got {text!r}")
    value = int(text, 16)
    if not 0 <= value <= 0xFFFFFFFF:
        raise ValueError(f"mask {text!r} exceeds 32 bits")
    return value
