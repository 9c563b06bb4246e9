"""Folder tree and top-down propagation of inheritable ACEs."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .ace import Ace, AceFlag, Dacl, SecurityDescriptor, canonicalize
from .errors import SchemaError, UnknownPath

_INHERIT = {AceFlag.OI, AceFlag.CI}


def normalize_path(path: str) -> str:
    """Forward slashes, no duplicate or trailing slash, case preserved."""
    path = re.sub(r"[\\/]+", "/", path.strip())
    if len(path) > 1:
        path = path.rstrip("/")
    return path


def path_key(path: str) -> str:
    return normalize_path(path).casefold()


def parent_path(path: str) -> str | None:
    if "/" not in path:
        return None
    parent = path.rsplit("/", 1)[0]
    return parent or None


@dataclass(frozen=True)
class FolderNode:
    path: str
    sd: SecurityDescriptor = field(default_factory=SecurityDescriptor)
    children: tuple[FolderNode, ...] = ()

    @property
    def name(self) -> str:
        return self.path.rsplit("/", 1)[-1]

    def walk(self) -> Iterator[FolderNode]:
        """Pre-order traversal; parents are always yielded before their children."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def build_tree(folders: Iterable[tuple[str, SecurityDescriptor]]) -> FolderNode:
    """Assemble a single rooted tree from ``(path, sd)`` pairs given in any order."""
    by_key: dict[str, tuple[str, SecurityDescriptor]] = {}
    for path, sd in folders:
        path = normalize_path(path)
        key = path.casefold()
        if key in by_key:
            raise SchemaError(f"duplicate folder path {path!r}", "folders")
        by_key[key] = (path, sd)
    if not by_key:
        raise SchemaError("snapshot has no folders", "folders")

    children: dict[str, list[str]] = {k: [] for k in by_key}
    roots = []
    for key, (path, _) in by_key.items():
        parent = parent_path(key)
        if parent is not None and parent in by_key:
            children[parent].append(key)
        else:
            roots.append(path)
    if len(roots) != 1:
        raise SchemaError(f"folder paths must form one rooted tree, found roots {sorted(roots)}", "folders")

    # Deepest first, so every child node exists before its parent is built.
    built: dict[str, FolderNode] = {}
    for key in sorted(by_key, key=lambda k: k.count("/"), reverse=True):
        path, sd = by_key[key]
        kids = sorted(children[key], key=lambda k: (k, by_key[k][0]))
        built[key] = FolderNode(path, sd, tuple(built[k] for k in kids))
    return built[roots[0].casefold()]


def find_node(tree: FolderNode, path: str) -> FolderNode:
    target = path_key(path)
    for node in tree.walk():
        if node.path.casefold() == target:
            return node
    raise UnknownPath(path)


def ancestry(tree: FolderNode, path: str) -> list[FolderNode]:
    """Nodes from the root down to ``path`` inclusive."""
    target = path_key(path)
    root_key = tree.path.casefold()
    if target != root_key and not target.startswith(root_key + "/"):
        raise UnknownPath(path)
    chain = [tree]
    node = tree
    while node.path.casefold() != target:
        nxt = target[len(node.path) + 1:].split("/", 1)[0]
        for child in node.children:
            if child.name.casefold() == nxt:
                node = child
                break
        else:
            raise UnknownPath(path)
        chain.append(node)
    return chain


@dataclass(frozen=True)
class EffectiveDacl:
    """A folder's ACEs after inheritance, with the folder each ACE came from.

    ``present=False`` is a null DACL: every request is granted.
    """

    aces: tuple[Ace, ...] = ()
    sources: tuple[str, ...] = ()
    present: bool = True

    def __iter__(self):
        return iter(self.aces)

    def __len__(self) -> int:
        return len(self.aces)

    def source_of(self, index: int) -> str:
        return self.sources[index]


def inherited_copy(ace: Ace) -> Ace | None:
    """The copy of a parent ACE a child folder receives, or None."""
    flags = ace.flags
    if AceFlag.CI in flags:
        if AceFlag.NP in flags:
            return ace.with_flags({AceFlag.ID})
        return ace.with_flags((flags - {AceFlag.IO}) | {AceFlag.ID})
    if AceFlag.OI in flags:
        # Object-only: inert on folders, keeps flowing toward files.
        if AceFlag.NP in flags:
            return None
        return ace.with_flags(flags | {AceFlag.IO, AceFlag.ID})
    return None


def split_stored(dacl: Dacl) -> tuple[tuple[Ace, ...], tuple[Ace, ...]]:
    """(canonicalized explicit ACEs, stored ID-flagged ACEs in stored order).

    ID-flagged ACEs were materialized by whatever produced the dump; re-sorting
    them would change decisions.
    """
    explicit = canonicalize(Dacl(True, tuple(a for a in dacl.aces if not a.inherited))).aces
    return explicit, tuple(a for a in dacl.aces if a.inherited)


def propagate_step(parent: EffectiveDacl | None, child_sd: SecurityDescriptor,
                   child_path: str = "") -> EffectiveDacl:
    """Effective DACL of a child given its parent's effective DACL.

    Order: the child's explicit ACEs, copies of the parent's effective ACEs, then
    the child's own stored ID ACEs (the inherited section as a dump lists it).
    ``parent=None`` means the child is the root.
    """
    if not child_sd.dacl.present:
        return EffectiveDacl(present=False)
    explicit, materialized = split_stored(child_sd.dacl)
    aces = list(explicit)
    sources = [child_path] * len(explicit)
    if parent is not None and parent.present and not child_sd.protected:
        for ace, src in zip(parent.aces, parent.sources):
            copy = inherited_copy(ace)
            if copy is not None:
                aces.append(copy)
                sources.append(src)
    aces.extend(materialized)
    sources.extend([child_path] * len(materialized))
    return EffectiveDacl(tuple(aces), tuple(sources))


def effective_dacl(tree: FolderNode, path: str) -> EffectiveDacl:
    """Fold propagate_step from the root down to ``path``. Uncached."""
    current: EffectiveDacl | None = None
    for node in ancestry(tree, path):
        current = propagate_step(current, node.sd, node.path)
    return current


def effective_dacls(tree: FolderNode) -> dict[str, EffectiveDacl]:
    """Effective DACL of every folder in one top-down pass, keyed by casefolded path."""
    out: dict[str, EffectiveDacl] = {}
    stack: list[tuple[FolderNode, EffectiveDacl | None]] = [(tree, None)]
    while stack:
        node, parent = stack.pop()
        eff = propagate_step(parent, node.sd, node.path)
        out[node.path.casefold()] = eff
        stack.extend((c, eff) for c in node.children)
    return out


def materialize(tree: FolderNode, protect: bool = False) -> FolderNode:
    """Rewrite the tree so every folder stores its full effective ACE list.

    With ``protect=True`` each non-root folder is marked protected, so the result
    depends on stored ACEs only; otherwise inherited copies are stored alongside
    live propagation (duplicates never change a first-match decision).
    """
    effective = effective_dacls(tree)

    def rebuild(node: FolderNode, is_root: bool) -> FolderNode:
        eff = effective[node.path.casefold()]
        if not eff.present:
            sd = node.sd
        else:
            sd = SecurityDescriptor(Dacl(True, eff.aces), node.sd.owner, node.sd.group,
                                    node.sd.protected or (protect and not is_root))
        return FolderNode(node.path, sd, tuple(rebuild(c, False) for c in node.children))

    return rebuild(tree, True)
