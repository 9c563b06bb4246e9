import logging
import random

import pytest
from hypothesis import given, strategies as st

from conftest import random_sd
from aclaudit.ace import ALLOW, DENY, Ace, AceFlag as F, Dacl, SecurityDescriptor
from aclaudit.errors import NullDaclUnrepresentable, SddlError, UndefinedRightToken, UnknownSidAlias
from aclaudit.principals import EVERYONE
from aclaudit.sddl import emit_sddl, parse_sddl


def test_parse_single_allow():
    sd = parse_sddl("D:(A;OICI;FA;;;WD)")
    assert sd.dacl.aces == (Ace(ALLOW, EVERYONE, 0x1F01FF, {F.OI, F.CI}),)
    assert not sd.protected


def test_parse_protected_empty():
    sd = parse_sddl("D:P")
    assert sd.protected and sd.dacl.present and sd.dacl.aces == ()


def test_parse_hex_literal_sid():
    sd = parse_sddl("D:(D;;0x20089;;;S-1-5-21-1-2-3-2001)")
    assert sd.dacl.aces[0] == Ace(DENY, "S-1-5-21-1-2-3-2001", 0x20089)


def test_owner_group_and_concatenated_rights():
    sd = parse_sddl("O:BAG:SYD:(A;ID;FRFW;;;AU)")
    assert sd.owner == "S-1-5-32-544" and sd.group == "S-1-5-18"
    assert sd.dacl.aces[0].mask == 0x120089 | 0x120116


def test_emit_uses_aliases_only_on_exact_match():
    sd = SecurityDescriptor(Dacl(True, (Ace(ALLOW, EVERYONE, 0x1F01FF, {F.CI, F.OI}),
                                        Ace(DENY, "S-1-5-21-7", 0x20089))))
    assert emit_sddl(sd) == "D:(A;OICI;FA;;;WD)(D;;0x20089;;;S-1-5-21-7)"


def test_emit_flag_order():
    sd = SecurityDescriptor(Dacl(True, (Ace(ALLOW, EVERYONE, 1, {F.ID, F.IO, F.NP, F.CI, F.OI}),)))
    assert emit_sddl(sd) == "D:(A;OICINPIOID;0x1;;;WD)"


@pytest.mark.parametrize("text, pos", [
    ("D:(", 4),
    ("D:(A;OICI;FA;;;WD", 18),
    ("X:", 1),
    ("D:(A;;FA;;;WD)junk", 15),
    ("D:(A;XX;FA;;;WD)", 6),
])
def test_errors_carry_position(text, pos):
    with pytest.raises(SddlError) as info:
        parse_sddl(text)
    assert info.value.position == pos


def test_unknown_alias_and_right_token():
    with pytest.raises(UnknownSidAlias):
        parse_sddl("D:(A;;FA;;;ZZ)")
    with pytest.raises(UndefinedRightToken):
        parse_sddl("D:(A;;QQ;;;WD)")


def test_guid_fields_rejected():
    with pytest.raises(SddlError):
        parse_sddl("D:(A;;FA;abc;;WD)")


def test_duplicate_flag_rejected():
    with pytest.raises(SddlError):
        parse_sddl("D:(A;OIOI;FA;;;WD)")


def test_sacl_dropped_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        sd = parse_sddl("D:(A;;FA;;;WD)S:(AU;SA;FA;;;WD)")
    assert len(sd.dacl.aces) == 1
    assert "SACL" in caplog.text


def test_null_dacl_unrepresentable():
    with pytest.raises(NullDaclUnrepresentable):
        emit_sddl(SecurityDescriptor(Dacl(False)))


def test_roundtrip_thousand_descriptors():
    rng = random.Random(2024)
    for _ in range(1000):
        sd = random_sd(rng)
        text = emit_sddl(sd)
        assert parse_sddl(text) == sd
        assert emit_sddl(parse_sddl(text)) == text


@given(st.text(alphabet="DAOGPSW:();0x1FICNI-5", max_size=40))
def test_fuzz_never_crashes_unexpectedly(text):
    try:
        sd = parse_sddl(text)
    except SddlError as exc:
        assert 1 <= exc.position <= len(text) + 1
    else:
        assert parse_sddl(emit_sddl(sd)) == sd
