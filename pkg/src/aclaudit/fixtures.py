"""Experiment fixtures (the C:/Library setup) and seeded random snapshots."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .access_mask import ATOMIC_RIGHTS, FILE_ALL_ACCESS, FILE_GENERIC_EXECUTE, FILE_GENERIC_READ, \
    FILE_GENERIC_WRITE
from .ace import ALLOW, DENY, Ace, AceFlag, Dacl, SecurityDescriptor
from .errors import InvalidParams
from .inheritance import build_tree
from .principals import EVERYONE, GROUP, USER, Directory, Principal
from .snapshot import Snapshot

LIBRARY_DOMAIN = "CORUH"
LIBRARY_ROOT = "C:/Library"
LIBRARY_SUBFOLDERS = ("Accounts", "Archive", "Finance", "HR", "Management",
                    "Meetings", "Projects", "R&D", "Surveys", "Working")
_BASE = "S-1-5-21-1-2-3-"
LIBRARY_USERS = {f"User-{c}": _BASE + str(1101 + i) for i, c in enumerate("ABCDEF")}
GUESS_SID = _BASE + "1107"
SAMPLE_GROUP_SID = _BASE + "2001"

# Read without SYNCHRONIZE, Read&Execute with it, and the bare Write composite.
# These are the masks under which the setup's DACL yields User-B's published row.
FIXTURE_DENY_READ = 0x20089
FIXTURE_EVERYONE_RX = 0x1200A9
FIXTURE_GROUP_WRITE = 0x116

# icacls prints accounts by logon name; the directory stores display names.
LIBRARY_ACCOUNT_ALIASES = {f"Coruh\\user{c.lower()}": f"{LIBRARY_DOMAIN}\\User-{c}" for c in "ABCDEF"}

_INHERIT = frozenset({AceFlag.OI, AceFlag.CI})


def library_directory() -> Directory:
    principals = [Principal(sid, f"{LIBRARY_DOMAIN}\\{name}", USER) for name, sid in LIBRARY_USERS.items()]
    principals.append(Principal(GUESS_SID, f"{LIBRARY_DOMAIN}\\guess", USER))
    principals.append(Principal(SAMPLE_GROUP_SID, f"{LIBRARY_DOMAIN}\\Sample Group", GROUP,
                                (LIBRARY_USERS["User-B"], LIBRARY_USERS["User-C"])))
    return Directory.from_principals(LIBRARY_DOMAIN, principals)


def library_root_aces() -> tuple[Ace, ...]:
    return (
        Ace(DENY, SAMPLE_GROUP_SID, FIXTURE_DENY_READ, _INHERIT),
        Ace(DENY, LIBRARY_USERS["User-C"], FIXTURE_DENY_READ, _INHERIT),
        Ace(ALLOW, EVERYONE, FIXTURE_EVERYONE_RX, _INHERIT),
        Ace(ALLOW, GUESS_SID, FILE_ALL_ACCESS, _INHERIT),
        Ace(ALLOW, SAMPLE_GROUP_SID, FIXTURE_GROUP_WRITE, _INHERIT),
    )


def gen_paper_fixture(variant: str = "table3") -> Snapshot:
    """The ten-folder C:/Library experiment.

    ``table3``: all ACEs live on the root and flow down by inheritance.
    ``icacls``: additionally each subfolder stores one materialized inherited
    Full Control entry for a user, cycling User-A..User-F.
    """
    if variant not in ("table3", "icacls"):
        raise ValueError(f"unknown fixture variant {variant!r}")
    folders = [(LIBRARY_ROOT, SecurityDescriptor(Dacl(True, library_root_aces())))]
    users = list(LIBRARY_USERS.values())
    for i, name in enumerate(LIBRARY_SUBFOLDERS):
        aces: tuple[Ace, ...] = ()
        if variant == "icacls":
            aces = (Ace(ALLOW, users[i % len(users)], FILE_ALL_ACCESS, _INHERIT | {AceFlag.ID}),)
        folders.append((f"{LIBRARY_ROOT}/{name}", SecurityDescriptor(Dacl(True, aces))))
    return Snapshot(LIBRARY_DOMAIN, library_directory(), build_tree(folders))


ALIAS_MASKS = (FILE_ALL_ACCESS, FILE_GENERIC_READ, FILE_GENERIC_WRITE, FILE_GENERIC_EXECUTE,
               0x1301BF, 0x1200A9, 0x20089, 0x200A9, 0x116, 0x301BF, 0x10000)


@dataclass
class GenParams:
    seed: int = 0
    folders: int = 20
    max_depth: int = 6
    users: int = 5
    groups: int = 3
    membership_probability: float = 0.3
    nesting_probability: float = 0.2
    aces_per_folder: tuple[int, int] = (0, 3)
    deny_fraction: float = 0.3
    protected_fraction: float = 0.1
    null_dacl_fraction: float = 0.0
    inherited_fraction: float = 0.1
    flag_probabilities: dict[str, float] = field(
        default_factory=lambda: {"OI": 0.5, "CI": 0.7, "NP": 0.15, "IO": 0.15})

    def validate(self) -> None:
        probs = [self.membership_probability, self.nesting_probability, self.deny_fraction,
                 self.protected_fraction, self.null_dacl_fraction, self.inherited_fraction,
                 *self.flag_probabilities.values()]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise InvalidParams("probabilities must lie in [0, 1]")
        if self.folders < 1 or self.users < 1 or self.max_depth < 0 or self.groups < 0:
            raise InvalidParams("folders and users must be >= 1, groups and max_depth >= 0")
        lo, hi = self.aces_per_folder
        if lo < 0 or hi < lo:
            raise InvalidParams(f"bad aces_per_folder range {self.aces_per_folder}")
        unknown = set(self.flag_probabilities) - {"OI", "CI", "NP", "IO"}
        if unknown:
            raise InvalidParams(f"unknown flags in flag_probabilities: {sorted(unknown)}")
        if self.folders > 1 and self.max_depth == 0:
            raise InvalidParams("max_depth=0 allows only the root folder")


def _random_mask(rng: random.Random) -> int:
    if rng.random() < 0.5:
        return rng.choice(ALIAS_MASKS)
    mask = 0
    while not mask:
        for r in ATOMIC_RIGHTS:
            if rng.random() < 0.3:
                mask |= r.mask
    return mask


def _random_flags(rng: random.Random, params: GenParams) -> frozenset[AceFlag]:
    flags = {AceFlag(f) for f, p in params.flag_probabilities.items() if rng.random() < p}
    if AceFlag.IO in flags and not flags & _INHERIT:
        flags.add(AceFlag.CI)
    if rng.random() < params.inherited_fraction:
        flags.add(AceFlag.ID)
    return frozenset(flags)


def gen_random(params: GenParams) -> Snapshot:
    """Deterministic random snapshot for the given parameters."""
    params.validate()
    rng = random.Random(params.seed)
    domain = "GEN"
    base = f"S-1-5-21-{params.seed % 4294967296}-77-88-"
    user_sids = [base + str(1000 + i) for i in range(params.users)]
    group_sids = [base + str(5000 + j) for j in range(params.groups)]

    principals = [Principal(sid, f"{domain}\\user{i:03d}", USER) for i, sid in enumerate(user_sids)]
    for j, gsid in enumerate(group_sids):
        members = [u for u in user_sids if rng.random() < params.membership_probability]
        # Any group may contain any other, so cycles occur.
        members += [g for g in group_sids if g != gsid and rng.random() < params.nesting_probability]
        principals.append(Principal(gsid, f"{domain}\\group{j:02d}", GROUP, tuple(members)))
    directory = Directory.from_principals(domain, principals)
    trustees = user_sids + group_sids + [EVERYONE]

    paths = ["C:/Root"]
    depth = {"C:/Root": 0}
    open_parents = ["C:/Root"] if params.max_depth > 0 else []
    for i in range(1, params.folders):
        parent = rng.choice(open_parents)
        path = f"{parent}/f{i}"
        paths.append(path)
        depth[path] = depth[parent] + 1
        if depth[path] < params.max_depth:
            open_parents.append(path)

    lo, hi = params.aces_per_folder
    folders = []
    for path in paths:
        if rng.random() < params.null_dacl_fraction:
            folders.append((path, SecurityDescriptor(Dacl(False))))
            continue
        aces = []
        for _ in range(rng.randint(lo, hi)):
            kind = DENY if rng.random() < params.deny_fraction else ALLOW
            aces.append(Ace(kind, rng.choice(trustees), _random_mask(rng), _random_flags(rng, params)))
        protected = rng.random() < params.protected_fraction
        folders.append((path, SecurityDescriptor(Dacl(True, tuple(aces)), protected=protected)))
    return Snapshot(domain, directory, build_tree(folders))


def sized_params(seed: int, max_folders: int = 200, max_users: int = 50,
                 max_groups: int = 20, max_depth: int = 6) -> GenParams:
    """Per-seed parameters for differential runs.

    Sizes are drawn log-uniformly up to the maxima so that most snapshots are
    small; every 100th seed uses the maxima outright.
    """
    rng = random.Random(seed * 7919 + 13)

    def logu(top: int, bottom: int = 1) -> int:
        return int(round(math.exp(rng.uniform(math.log(bottom), math.log(top)))))

    if seed % 100 == 0:
        folders, users, groups = max_folders, max_users, max_groups
    else:
        folders, users, groups = logu(max_folders), logu(max_users), logu(max_groups + 1) - 1
    return GenParams(
        seed=seed, folders=folders, max_depth=max_depth, users=users, groups=groups,
        membership_probability=rng.uniform(0.05, 0.5), nesting_probability=rng.uniform(0.0, 0.3),
        aces_per_folder=(0, rng.randint(1, 5)), deny_fraction=0.3, protected_fraction=0.1,
        null_dacl_fraction=0.02, inherited_fraction=0.1,
    )
