import random

import pytest
from hypothesis import given, settings, strategies as st

from aclaudit.access_mask import REPORT_RIGHTS, ReportRight as R
from aclaudit.ace import ALLOW, DENY, Ace, AceFlag as F, Dacl, SecurityDescriptor
from aclaudit.errors import EmptyRequest, UnknownPath, UnknownPrincipal
from aclaudit.evaluator import (Evaluator, access_check, build_matrix, composite_violations,
                                effective_rights)
from aclaudit.fixtures import (GUESS_SID, LIBRARY_ROOT, LIBRARY_SUBFOLDERS, LIBRARY_USERS, GenParams, gen_random,
                               library_directory)
from aclaudit.inheritance import EffectiveDacl, build_tree
from aclaudit.oracle import oracle_rights
from aclaudit.principals import EVERYONE
from aclaudit.snapshot import Snapshot

U = "S-1-5-21-4-4-4-1"
CLOSURE = frozenset({U, EVERYONE})
# Published row for User-B, minus ReadAndExecute (see test below).
USER_B_ROW = "No Yes Yes No Yes Yes No No Yes Yes No No No - No No No Yes No".split()


def dacl(*aces):
    return Dacl(True, aces)


def test_allow_full_control():
    assert access_check(CLOSURE, dacl(Ace(ALLOW, U, 0x1F01FF)), 0x1).allowed


def test_deny_wins_when_first():
    d = dacl(Ace(DENY, U, 0x1), Ace(ALLOW, U, 0x1F01FF))
    decision = access_check(CLOSURE, d, 0x1)
    assert not decision.allowed and decision.deciding == (0, "")


def test_allow_first_wins_in_noncanonical_list():
    assert access_check(CLOSURE, dacl(Ace(ALLOW, U, 0x1), Ace(DENY, U, 0x1)), 0x1).allowed


def test_partial_allows_accumulate():
    d = dacl(Ace(ALLOW, U, 0x1), Ace(DENY, U, 0x2), Ace(ALLOW, U, 0x2))
    assert access_check(CLOSURE, d, 0x1).allowed
    assert not access_check(CLOSURE, d, 0x3).allowed


def test_deny_outside_request_is_ignored():
    d = dacl(Ace(DENY, U, 0x2), Ace(ALLOW, U, 0x1))
    assert access_check(CLOSURE, d, 0x1).allowed


def test_everyone_ace_grants_synchronize():
    d = dacl(Ace(DENY, U, 0x20089), Ace(ALLOW, EVERYONE, 0x1200A9))
    assert access_check(CLOSURE, d, 0x100000).allowed


def test_foreign_sid_and_inherit_only_skipped():
    d = dacl(Ace(DENY, "S-1-5-21-9", 0x1), Ace(DENY, U, 0x1, {F.IO, F.CI}), Ace(ALLOW, U, 0x1))
    assert access_check(CLOSURE, d, 0x1).allowed


def test_null_and_empty_dacl():
    assert access_check(CLOSURE, Dacl(False), 0x1F01FF).allowed
    assert not access_check(CLOSURE, Dacl(True), 0x1).allowed


def test_empty_request():
    with pytest.raises(EmptyRequest):
        access_check(CLOSURE, dacl(), 0)


def test_user_b_row(table3):
    row = effective_rights(table3, "CORUH\\User-B", f"{LIBRARY_ROOT}/Finance")
    got = ["Yes" if v else "No" for v in row.as_list()]
    for right, want, have in zip(REPORT_RIGHTS, USER_B_ROW, got):
        if right is not R.ReadAndExecute:
            assert have == want, right.name
    # Forced by the AND of its atomic columns, which are No.
    assert row[R.ReadAndExecute] is False
    assert composite_violations(row) == []


def test_user_without_own_aces_gets_everyone_grant(table3):
    row = effective_rights(table3, "User-A", f"{LIBRARY_ROOT}/HR")
    want = {R.ListDirectory, R.ReadExtendedAttributes, R.Traverse, R.ReadAttributes, R.ReadPermissions,
            R.Read, R.ReadAndExecute, R.Synchronize}
    assert {r for r in REPORT_RIGHTS if row[r]} == want


def test_nobody_outside_everyone_grant():
    tree = build_tree([("C:/r", SecurityDescriptor(dacl(Ace(ALLOW, GUESS_SID, 0x1F01FF))))])
    snap = Snapshot("CORUH", library_directory(), tree)
    assert not any(effective_rights(snap, "User-A", "C:/r").as_list())


def test_guess_has_everything(table3):
    for name in LIBRARY_SUBFOLDERS:
        assert all(effective_rights(table3, GUESS_SID, f"{LIBRARY_ROOT}/{name}").as_list())


def test_matrix_shape_and_order(table3):
    users = ["User-D", "User-A", "User-B", "User-C", "User-A"]
    folders = [f"{LIBRARY_ROOT}/{n}" for n in reversed(LIBRARY_SUBFOLDERS)]
    m = build_matrix(table3, users, folders)
    assert len(m) == 40
    assert [r.user for r in m.rows[::10]] == [LIBRARY_USERS[u] for u in ("User-D", "User-A", "User-B", "User-C")]
    assert [r.folder for r in m.rows[:10]] == sorted(folders, key=str.casefold)
    assert build_matrix(table3, users, folders) == m


def test_single_cell_matrix(table3):
    m = build_matrix(table3, ["User-A"], [LIBRARY_ROOT], [R.Delete])
    assert len(m) == 1 and m.rights == (R.Delete,)


def test_unknowns(table3):
    with pytest.raises(UnknownPrincipal):
        effective_rights(table3, "nobody", LIBRARY_ROOT)
    with pytest.raises(UnknownPath):
        effective_rights(table3, "User-A", "C:/Elsewhere")


def test_explain_names_source(table3):
    d = Evaluator(table3).explain("User-C", f"{LIBRARY_ROOT}/HR", R.ListDirectory)
    assert not d.allowed and d.deciding == (0, LIBRARY_ROOT)


def test_caches_compute_each_thing_once():
    snap = gen_random(GenParams(seed=11, folders=40, users=6))
    ev = Evaluator(snap)
    users = [p.sid for p in snap.directory.users]
    ev.build_matrix(users, snap.paths())
    ev.build_matrix(users, snap.paths())
    assert ev.closure_computations == len(users)
    assert ev.dacl_computations == len(snap.paths())


@settings(max_examples=60)
@given(st.integers(0, 100_000))
def test_matches_per_bit_oracle(seed):
    snap = gen_random(GenParams(seed=seed, folders=15, users=4, groups=3, null_dacl_fraction=0.05))
    ev = Evaluator(snap)
    for u in snap.directory.users:
        for path in snap.paths():
            assert ev.row_values(u.sid, path) == oracle_rights(snap, u.sid, path)


@settings(max_examples=60)
@given(st.integers(0, 100_000))
def test_composites_consistent(seed):
    snap = gen_random(GenParams(seed=seed, folders=15, users=4))
    users = [p.sid for p in snap.directory.users]
    for row in build_matrix(snap, users, snap.paths()):
        assert composite_violations(row) == []


@settings(max_examples=100)
@given(st.integers(0, 100_000))
def test_prepended_deny_always_wins(seed):
    rng = random.Random(seed)
    others = ["S-1-5-21-4-4-4-2", EVERYONE, U]
    aces = tuple(Ace(rng.choice([ALLOW, DENY]), rng.choice(others), rng.randint(1, 0x1F01FF))
                 for _ in range(rng.randint(0, 8)))
    right = rng.choice(REPORT_RIGHTS)
    d = Dacl(True, (Ace(DENY, U, right.mask),) + aces)
    assert not access_check(CLOSURE, d, right.mask).allowed


def test_effective_dacl_sources_reported():
    eff = EffectiveDacl((Ace(ALLOW, U, 1, {F.ID}),), ("C:/top",))
    assert access_check(CLOSURE, eff, 1).deciding == (0, "C:/top")
