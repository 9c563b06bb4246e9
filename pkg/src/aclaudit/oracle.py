"""Brute-force reference evaluator for differential testing.

Deliberately naive and cache-free. It shares no code with the evaluator or the
inheritance module: membership is a full-directory fixpoint, the ancestor chain
is re-walked on every call, and each atomic right is decided separately by the
first matching ACE that mentions its bit.
"""

from __future__ import annotations

from .access_mask import REPORT_RIGHTS, ReportRight
from .errors import UnknownPath, UnknownPrincipal

EVERYONE = "S-1-1-0"
ATOMIC_BITS = (0x1, 0x2, 0x4, 0x8, 0x10, 0x20, 0x40, 0x80, 0x100,
               0x10000, 0x20000, 0x40000, 0x80000, 0x100000)


def oracle_closure(directory, user: str) -> set[str]:
    if user != EVERYONE and user not in directory.principals:
        raise UnknownPrincipal(user)
    found = {user, EVERYONE}
    changed = True
    while changed:
        changed = False
        for p in directory.principals.values():
            if p.sid not in found and any(m in found for m in p.members):
                found.add(p.sid)
                changed = True
    return found


def oracle_chain(root, folder: str) -> list:
    want = folder.replace("\\", "/").rstrip("/").lower()
    chain = [root]
    while chain[-1].path.lower() != want:
        for child in chain[-1].children:
            if want == child.path.lower() or want.startswith(child.path.lower() + "/"):
                chain.append(child)
                break
        else:
            raise UnknownPath(folder)
    return chain


def _names(ace) -> set[str]:
    return {f.value for f in ace.flags}


def _sections(node) -> tuple[list, list]:
    explicit = [a for a in node.sd.dacl.aces if "ID" not in _names(a)]
    stored = [a for a in node.sd.dacl.aces if "ID" in _names(a)]
    explicit.sort(key=lambda a: 0 if a.ace_type == "deny" else 1)
    return explicit, stored


def _reaching(chain, i: int, target: int) -> list:
    """ACEs of chain[i]'s effective list that land on chain[target], in order.

    A folder's list is its explicit ACEs, then whatever reaches it from its
    parent, then its stored inherited ACEs. An ACE from chain[i] (i < target)
    reaches chain[target] only if it has CI, and with NP only one level down;
    an ACE first stored at chain[j] counts its distance from chain[j].
    """
    node = chain[i]
    if not node.sd.dacl.present:
        return []
    explicit, stored = _sections(node)
    out = [(a, i) for a in explicit]
    if i > 0 and not node.sd.protected:
        out += _reaching(chain, i - 1, target)
    out += [(a, i) for a in stored]
    if i == target:
        return out
    # Filter to what passes from chain[i] down to chain[target].
    kept = []
    for a, origin in out:
        names = _names(a)
        if "CI" not in names:
            continue  # object-only or non-inheritable: never lands on a folder
        if "NP" in names and target - origin > 1:
            continue
        kept.append((a, origin))
    return kept


def oracle_aces(root, folder: str) -> list[tuple[str, str, int]] | None:
    """(type, sid, mask) of every ACE that applies to the folder, in order; None = null DACL."""
    chain = oracle_chain(root, folder)
    if not chain[-1].sd.dacl.present:
        return None
    t = len(chain) - 1
    out = []
    for a, origin in _reaching(chain, t, t):
        if origin == t and "IO" in _names(a):
            continue
        out.append((a.ace_type, a.sid, a.mask))
    return out


def oracle_rights(snapshot, user: str, folder: str) -> dict[ReportRight, bool]:
    closure = oracle_closure(snapshot.directory, user)
    aces = oracle_aces(snapshot.root, folder)
    bits = {}
    for bit in ATOMIC_BITS:
        if aces is None:
            bits[bit] = True
            continue
        bits[bit] = False
        for kind, sid, mask in aces:
            if sid in closure and mask & bit:
                bits[bit] = kind == "allow"
                break
    return {r: all(bits[b] for b in ATOMIC_BITS if r.value & b) for r in REPORT_RIGHTS}
