import json

import pytest
from hypothesis import given, settings, strategies as st

from aclaudit.errors import ConflictingSecurityForm, InvalidParams, SchemaError, ValidationFailure
from aclaudit.evaluator import Evaluator, build_matrix
from aclaudit.fixtures import GenParams, LIBRARY_ROOT, gen_paper_fixture, gen_random, sized_params
from aclaudit.snapshot import load_snapshot, save_snapshot, subtree_paths, to_document, validate_snapshot

MINIMAL = {
    "version": 1, "domain": "D",
    "principals": [{"sid": "S-1-5-21-1-1", "name": "D\\u", "kind": "user"}],
    "folders": [{"path": "C:/r", "dacl_present": False}],
}


def doc_with(**folder):
    d = json.loads(json.dumps(MINIMAL))
    d["folders"] = [{"path": "C:/r", **folder}]
    return d


def test_fixture_shape(table3):
    assert len(table3.paths()) == 11
    assert len(table3.root.children) == 10
    assert len(table3.directory) == 8


def test_minimal_null_dacl_loads():
    snap = load_snapshot(json.dumps(MINIMAL))
    assert not snap.root.sd.dacl.present
    assert all(Evaluator(snap).row_values("S-1-5-21-1-1", "C:/r").values())


def test_sddl_folder_form():
    snap = load_snapshot(json.dumps(doc_with(sddl="D:P(A;OICI;FA;;;S-1-5-21-1-1)")))
    assert snap.root.sd.protected and len(snap.root.sd.dacl.aces) == 1


def test_sddl_plus_aces_conflicts():
    with pytest.raises(ConflictingSecurityForm):
        load_snapshot(json.dumps(doc_with(sddl="D:", aces=[])))


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("version"),
    lambda d: d.update(version=2),
    lambda d: d["principals"][0].update(kind="robot"),
    lambda d: d["folders"].append({"path": "C:/r"}),
    lambda d: d["folders"].__setitem__(0, {"path": "C:/r", "aces": [{"type": "audit", "sid": "S-1-1-0",
                                                                       "mask": "0x1"}]}),
    lambda d: d["folders"].__setitem__(0, {"path": "C:/r", "aces": [{"type": "allow", "sid": "S-1-1-0",
                                                                       "mask": "1"}]}),
    lambda d: d["folders"].__setitem__(0, {"path": "C:/r", "sddl": "D:("}),
])
def test_schema_errors(mutate):
    d = json.loads(json.dumps(MINIMAL))
    mutate(d)
    with pytest.raises(SchemaError):
        load_snapshot(json.dumps(d))


def test_invalid_json():
    with pytest.raises(SchemaError):
        load_snapshot("{not json")


def test_hard_defect_fails_load():
    d = doc_with(aces=[{"type": "allow", "sid": "S-1-5-21-9-9", "mask": "0x1"}])
    with pytest.raises(ValidationFailure) as info:
        load_snapshot(json.dumps(d))
    assert [x.kind for x in info.value.defects] == ["UnknownSid"]
    assert load_snapshot(json.dumps(d), validate=False).root.sd.dacl.aces[0].sid == "S-1-5-21-9-9"


def test_undefined_bits_only_warn(caplog):
    d = doc_with(aces=[{"type": "allow", "sid": "S-1-1-0", "mask": "0x80000001"}])
    load_snapshot(json.dumps(d))
    assert "UndefinedBits" in caplog.text


@pytest.mark.parametrize("variant", ["table3", "icacls"])
def test_fixture_roundtrip(variant):
    snap = gen_paper_fixture(variant)
    data = save_snapshot(snap)
    again = load_snapshot(data)
    assert again == snap
    assert save_snapshot(again) == data
    assert data.endswith(b"\n")


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_random_roundtrip(seed):
    snap = gen_random(GenParams(seed=seed, null_dacl_fraction=0.1))
    assert load_snapshot(save_snapshot(snap)) == snap


def test_generation_deterministic():
    assert save_snapshot(gen_random(GenParams(seed=1))) == save_snapshot(gen_random(GenParams(seed=1)))
    assert save_snapshot(gen_random(GenParams(seed=1))) != save_snapshot(gen_random(GenParams(seed=2)))


def test_no_aces_means_no_rights():
    snap = gen_random(GenParams(seed=3, users=1, groups=0, aces_per_folder=(0, 0)))
    m = build_matrix(snap, [p.sid for p in snap.directory.users], snap.paths())
    assert not any(v for row in m for v in row.values.values())


@pytest.mark.parametrize("seed", [7, 100, 555])
def test_generated_snapshots_validate(seed):
    assert validate_snapshot(gen_random(sized_params(seed))) == []


def test_table3_rows_uniform_across_subfolders(table3):
    users = [p.sid for p in table3.directory.users]
    m = build_matrix(table3, users, table3.select_folders(LIBRARY_ROOT))
    by_user = {}
    for row in m:
        by_user.setdefault(row.user, set()).add(tuple(row.as_list()))
    assert all(len(v) == 1 for v in by_user.values())


@pytest.mark.parametrize("params", [
    GenParams(folders=0), GenParams(users=0), GenParams(deny_fraction=1.5),
    GenParams(aces_per_folder=(3, 1)), GenParams(flag_probabilities={"XX": 0.5}),
])
def test_invalid_params(params):
    with pytest.raises(InvalidParams):
        gen_random(params)


def test_sized_params_bounds():
    for seed in range(1, 300):
        p = sized_params(seed)
        assert 1 <= p.folders <= 200 and 1 <= p.users <= 50 and 0 <= p.groups <= 20
    assert sized_params(100).folders == 200


def test_select_folders(table3):
    assert len(table3.select_folders()) == 10
    assert table3.select_folders(include_root=True)[0] == LIBRARY_ROOT
    assert subtree_paths(table3, f"{LIBRARY_ROOT}/HR") == [f"{LIBRARY_ROOT}/HR"]


def test_document_sorted_principals(table3):
    names = [p["name"] for p in to_document(table3)["principals"]]
    assert names == sorted(names, key=str.casefold)
