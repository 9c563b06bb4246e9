"""Exception hierarchy and the defect record shared by the validators."""

from __future__ import annotations

from dataclasses import dataclass


class AclAuditError(Exception):
    """Base class for every error raised by this package."""


class UnknownPrincipal(AclAuditError, LookupError):
    pass


class AmbiguousName(AclAuditError, LookupError):
    pass


class UnknownPath(AclAuditError, LookupError):
    pass


class NullDacl(AclAuditError, ValueError):
    pass


class EmptyRequest(AclAuditError, ValueError):
    pass


class UnknownColumn(AclAuditError, KeyError):
    pass


class InvalidParams(AclAuditError, ValueError):
    pass


class SddlError(AclAuditError, ValueError):
    """Positioned SDDL parse failure. ``position`` is a 1-based character offset."""

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at offset {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownSidAlias(SddlError):
    pass


class UndefinedRightToken(SddlError):
    pass


class NullDaclUnrepresentable(AclAuditError, ValueError):
    pass


class IcaclsError(AclAuditError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class MalformedEntry(IcaclsError):
    pass


class UnknownToken(IcaclsError):
    def __init__(self, token: str, line: int = 0, column: int = 0):
        self.token = token
        super().__init__(f"unknown icacls token {token!r}", line, column)


class SchemaError(AclAuditError, ValueError):
    def __init__(self, message: str, where: str = "$"):
        self.where = where
        super().__init__(f"{where}: {message}")


class ConflictingSecurityForm(SchemaError):
    pass


class ValidationFailure(AclAuditError, ValueError):
    def __init__(self, defects: list[Defect]):
        self.defects = list(defects)
        lines = "; ".join(str(d) for d in self.defects[:10])
        more = f" (+{len(self.defects) - 10} more)" if len(self.defects) > 10 else ""
        super().__init__(f"{len(self.defects)} validation defect(s): {lines}{more}")


@dataclass(frozen=True)
class Defect:
    """A data problem found by a validator. Defects are reported, never raised."""

    kind: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        tail = f": {self.detail}" if self.detail else ""
        return f"{self.kind}[{self.subject}]{tail}"
