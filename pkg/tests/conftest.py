import random
from pathlib import Path

import hypothesis
import pytest

from aclaudit.ace import ALLOW, DENY, Ace, AceFlag, Dacl, SecurityDescriptor
from aclaudit.fixtures import gen_paper_fixture
from aclaudit.principals import WELL_KNOWN

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

DATA = Path(__file__).parent / "data"

# Criterion id -> (passed, detail); filled in by test_acceptance.py.
ACCEPTANCE: dict[str, tuple[bool, str]] = {}

FLAGS = list(AceFlag)
MASK_POOL = [0x1F01FF, 0x120089, 0x120116, 0x1200A0, 0x116, 0x20089, 0x1, 0x10000, 0x100000, 0x80000001]


def random_ace(rng: random.Random, sids=None) -> Ace:
    sids = sids or [f"S-1-5-21-9-9-9-{rng.randint(500, 520)}"] + list(WELL_KNOWN.values())
    flags = frozenset(f for f in FLAGS if rng.random() < 0.3)
    mask = rng.choice(MASK_POOL) if rng.random() < 0.4 else rng.randint(0, 0xFFFFFFFF)
    return Ace(rng.choice([ALLOW, DENY]), rng.choice(sids), mask, flags)


def random_sd(rng: random.Random) -> SecurityDescriptor:
    aces = tuple(random_ace(rng) for _ in range(rng.randint(0, 8)))
    owner = rng.choice([None, "S-1-5-32-544", f"S-1-5-21-1-{rng.randint(0, 99)}"])
    group = rng.choice([None, "S-1-5-18", f"S-1-5-21-2-{rng.randint(0, 99)}"])
    return SecurityDescriptor(Dacl(True, aces), owner, group, rng.random() < 0.3)


@pytest.fixture(scope="session")
def table3():
    return gen_paper_fixture("table3")


@pytest.fixture(scope="session")
def icacls_variant():
    return gen_paper_fixture("icacls")


@pytest.fixture(scope="session")
def snippet_text():
    return (DATA / "icacls_snippet.txt").read_text()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
