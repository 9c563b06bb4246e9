"""Ordered access check and the user x folder x right effective-rights matrix."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .access_mask import COMPOSITE_RIGHTS, REPORT_RIGHTS, ReportRight, decompose
from .ace import Dacl
from .errors import EmptyRequest, UnknownPath
from .inheritance import EffectiveDacl, path_key, propagate_step
from .principals import membership_closure, resolve_principal

if TYPE_CHECKING:
    from .snapshot import Snapshot

ALLOWED = "allowed"
DENIED = "denied"


@dataclass(frozen=True)
class AccessDecision:
    outcome: str
    # (ACE index, source folder) of the ACE that settled the request; None for
    # a null-DACL grant or an implicit end-of-list denial.
    deciding: tuple[int, str] | None = None

    @property
    def allowed(self) -> bool:
        return self.outcome == ALLOWED

    def __bool__(self) -> bool:
        return self.allowed


def access_check(closure: frozenset[str] | set[str], dacl: EffectiveDacl | Dacl,
                 requested: int) -> AccessDecision:
    """Walk the ACEs in stored order until every requested bit is granted or one is denied.

    ACEs for SIDs outside ``closure`` and inherit-only ACEs are skipped. A deny
    only matters if it touches a bit that is still outstanding.
    """
    if requested == 0:
        raise EmptyRequest("requested access mask is zero")
    if not dacl.present:
        return AccessDecision(ALLOWED)
    sources = getattr(dacl, "sources", None)
    remaining = requested
    for i, ace in enumerate(dacl.aces):
        if ace.inherit_only or ace.sid not in closure:
            continue
        if ace.is_deny:
            if ace.mask & remaining:
                return AccessDecision(DENIED, (i, sources[i] if sources else ""))
        else:
            remaining &= ~ace.mask
            if not remaining:
                return AccessDecision(ALLOWED, (i, sources[i] if sources else ""))
    return AccessDecision(DENIED)


def _granted(relevant: tuple[tuple[bool, int], ...], requested: int) -> bool:
    # Same walk as access_check over a pre-filtered (is_deny, mask) list.
    remaining = requested
    for is_deny, mask in relevant:
        if is_deny:
            if mask & remaining:
                return False
        else:
            remaining &= ~mask
            if not remaining:
                return True
    return False


@dataclass(frozen=True)
class EffectiveRightsRow:
    user: str
    folder: str
    values: Mapping[ReportRight, bool]

    def __getitem__(self, right: ReportRight) -> bool:
        return self.values[right]

    def as_list(self, rights: Sequence[ReportRight] = REPORT_RIGHTS) -> list[bool]:
        return [self.values[r] for r in rights]


@dataclass(frozen=True)
class RightsMatrix:
    rows: tuple[EffectiveRightsRow, ...]
    rights: tuple[ReportRight, ...] = REPORT_RIGHTS

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)


def composite_violations(row: EffectiveRightsRow) -> list[ReportRight]:
    """Composite columns whose value differs from the AND of their atomic columns."""
    bad = []
    for c in COMPOSITE_RIGHTS:
        parts = decompose(c.mask)
        if c in row.values and all(p in row.values for p in parts):
            if row.values[c] != all(row.values[p] for p in parts):
                bad.append(c)
    return bad


class Evaluator:
    """Evaluation over one immutable snapshot with write-once caches.

    Membership closures are computed once per user and effective DACLs once per
    folder; the two counters expose how often each was actually computed.
    """

    def __init__(self, snapshot: Snapshot):
        self.snapshot = snapshot
        self._closures: dict[str, frozenset[str]] = {}
        self._dacls: dict[str, EffectiveDacl] = {}
        self._compiled_dacls: dict[str, tuple | None] = {}
        self._rows: dict[tuple, tuple[bool, ...]] = {}
        self.closure_computations = 0
        self.dacl_computations = 0

    def resolve_user(self, key: str) -> str:
        return resolve_principal(self.snapshot.directory, key).sid

    def closure(self, sid: str) -> frozenset[str]:
        got = self._closures.get(sid)
        if got is None:
            got = membership_closure(self.snapshot.directory, sid)
            self.closure_computations += 1
            self._closures[sid] = got
        return got

    def effective_dacl(self, path: str) -> EffectiveDacl:
        key = path_key(path)
        got = self._dacls.get(key)
        if got is not None:
            return got
        index = self.snapshot.folders
        if key not in index:
            raise UnknownPath(path)
        # Walk up to the nearest cached ancestor, then fill in top-down.
        pending = []
        cur: str | None = key
        while cur is not None and cur not in self._dacls:
            pending.append(cur)
            cur = self.snapshot.parent_key(cur)
        parent = self._dacls[cur] if cur is not None else None
        for k in reversed(pending):
            node = index[k]
            parent = propagate_step(parent, node.sd, node.path)
            self._dacls[k] = parent
            self.dacl_computations += 1
        return parent

    def check(self, user: str, folder: str, requested: int) -> AccessDecision:
        return access_check(self.closure(user), self.effective_dacl(folder), requested)

    def _compiled(self, path: str) -> tuple[tuple[str, bool, int], ...] | None:
        """(sid, is_deny, mask) of the folder's non-inherit-only ACEs; None for a null DACL."""
        key = path_key(path)
        got = self._compiled_dacls.get(key, False)
        if got is False:
            eff = self.effective_dacl(key)
            got = None if not eff.present else tuple(
                (a.sid, a.is_deny, a.mask) for a in eff.aces if not a.inherit_only)
            self._compiled_dacls[key] = got
        return got

    def _values(self, closure: frozenset[str], path: str, masks: tuple[int, ...]) -> tuple[bool, ...]:
        compiled = self._compiled(path)
        if compiled is None:
            return (True,) * len(masks)
        relevant = tuple((d, m) for s, d, m in compiled if s in closure)
        cache_key = (relevant, masks)
        values = self._rows.get(cache_key)
        if values is None:
            values = tuple(_granted(relevant, m) for m in masks)
            self._rows[cache_key] = values
        return values

    def row_values(self, user: str, folder: str,
                   rights: Sequence[ReportRight] = REPORT_RIGHTS) -> dict[ReportRight, bool]:
        rights = tuple(rights)
        values = self._values(self.closure(user), folder, tuple(r.mask for r in rights))
        return dict(zip(rights, values))

    def effective_rights(self, user: str, folder: str) -> EffectiveRightsRow:
        sid = self.resolve_user(user)
        node = self.snapshot.folder(folder)
        return EffectiveRightsRow(sid, node.path, self.row_values(sid, node.path))

    def build_matrix(self, users: Iterable[str], folders: Iterable[str],
                     rights: Iterable[ReportRight] = REPORT_RIGHTS) -> RightsMatrix:
        wanted = set(rights)
        rights = tuple(r for r in REPORT_RIGHTS if r in wanted)
        user_sids = list(dict.fromkeys(self.resolve_user(u) for u in users))
        nodes = {}
        for f in folders:
            node = self.snapshot.folder(f)
            nodes[node.path.casefold()] = node.path
        paths = sorted(nodes.values(), key=lambda p: (p.casefold(), p))
        if not user_sids or not paths or not rights:
            raise ValueError("build_matrix needs at least one user, folder and right")
        masks = tuple(r.mask for r in rights)
        # Rows with identical answers share one read-only mapping.
        shared: dict[tuple[bool, ...], MappingProxyType] = {}
        rows = []
        for sid in user_sids:
            closure = self.closure(sid)
            for path in paths:
                values = self._values(closure, path, masks)
                mapping = shared.get(values)
                if mapping is None:
                    mapping = shared[values] = MappingProxyType(dict(zip(rights, values)))
                rows.append(EffectiveRightsRow(sid, path, mapping))
        return RightsMatrix(tuple(rows), rights)

    def explain(self, user: str, folder: str, right: ReportRight) -> AccessDecision:
        """Decision for one column with the deciding ACE and its source folder."""
        sid = self.resolve_user(user)
        return self.check(sid, self.snapshot.folder(folder).path, right.mask)


def effective_rights(snapshot: Snapshot, user: str, folder: str) -> EffectiveRightsRow:
    return Evaluator(snapshot).effective_rights(user, folder)


def build_matrix(snapshot: Snapshot, users: Iterable[str], folders: Iterable[str],
                 rights: Iterable[ReportRight] = REPORT_RIGHTS) -> RightsMatrix:
    return Evaluator(snapshot).build_matrix(users, folders, rights)

