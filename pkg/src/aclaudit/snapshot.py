"""JSON snapshot format: a principal directory plus a folder tree with descriptors."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any

from .access_mask import format_mask, parse_mask
from .ace import Ace, AceFlag, Dacl, SecurityDescriptor, validate_sd
from .errors import (ConflictingSecurityForm, Defect, SchemaError, SddlError, UnknownPath,
                     ValidationFailure)
from .inheritance import FolderNode, build_tree, path_key
from .principals import GROUP, USER, Directory, Principal, canonical_sid, validate_directory
from .sddl import parse_sddl

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
SOFT_DEFECTS = frozenset({"UndefinedBits"})


@dataclass(frozen=True)
class Snapshot:
    domain: str
    directory: Directory
    root: FolderNode
    version: int = FORMAT_VERSION

    @cached_property
    def folders(self) -> dict[str, FolderNode]:
        """Casefolded path -> node, in pre-order."""
        return {n.path.casefold(): n for n in self.root.walk()}

    @cached_property
    def _parents(self) -> dict[str, str | None]:
        out: dict[str, str | None] = {self.root.path.casefold(): None}
        for node in self.root.walk():
            for c in node.children:
                out[c.path.casefold()] = node.path.casefold()
        return out

    def parent_key(self, key: str) -> str | None:
        return self._parents[key]

    def folder(self, path: str) -> FolderNode:
        try:
            return self.folders[path_key(path)]
        except KeyError:
            raise UnknownPath(path) from None

    def paths(self) -> list[str]:
        return [n.path for n in self.folders.values()]

    def select_folders(self, root: str | None = None, recurse: bool = False,
                       include_root: bool = False) -> list[str]:
        """Immediate subfolders of ``root`` (all descendants with ``recurse``)."""
        base = self.folder(root) if root else self.root
        if recurse:
            picked = [n.path for n in base.walk()][1:]
        else:
            picked = [c.path for c in base.children]
        if include_root:
            picked.insert(0, base.path)
        return picked


def validate_snapshot(snapshot: Snapshot) -> list[Defect]:
    defects = validate_directory(snapshot.directory)
    for node in snapshot.root.walk():
        defects.extend(validate_sd(node.sd, snapshot.directory, node.path))
    return defects


def _require(obj: dict, key: str, kind: type, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", where)
    value = obj[key]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise SchemaError(f"field {key!r} must be {kind.__name__}", where)
    return value


def _optional(obj: dict, key: str, kind: type, default: Any, where: str) -> Any:
    if key not in obj or obj[key] is None:
        return default
    return _require(obj, key, kind, where)


def _sid_field(text: str, where: str) -> str:
    try:
        return canonical_sid(text)
    except ValueError:
        # Left as-is so validation reports it as MalformedSid.
        return text


def _load_ace(doc: Any, where: str) -> Ace:
    if not isinstance(doc, dict):
        raise SchemaError("ACE must be an object", where)
    kind = _require(doc, "type", str, where)
    if kind not in ("allow", "deny"):
        raise SchemaError(f"ACE type must be 'allow' or 'deny', got {kind!r}", where)
    sid = _sid_field(_require(doc, "sid", str, where), where)
    try:
        mask = parse_mask(_require(doc, "mask", str, where))
    except ValueError as exc:
        raise SchemaError(str(exc), where) from None
    flags = _optional(doc, "flags", list, [], where)
    try:
        flagset = frozenset(AceFlag(f) for f in flags)
    except ValueError:
        raise SchemaError(f"unknown ACE flag in {flags!r}", where) from None
    if len(flagset) != len(flags):
        raise SchemaError("duplicate ACE flags", where)
    return Ace(kind, sid, mask, flagset)


def _load_folder(doc: Any, where: str) -> tuple[str, SecurityDescriptor]:
    if not isinstance(doc, dict):
        raise SchemaError("folder must be an object", where)
    path = _require(doc, "path", str, where)
    if "sddl" in doc and ("aces" in doc or "dacl_present" in doc or "protected" in doc):
        raise ConflictingSecurityForm("folder gives both 'sddl' and structured DACL fields", where)
    if "sddl" in doc:
        text = _require(doc, "sddl", str, where)
        try:
            return path, parse_sddl(text)
        except SddlError as exc:
            raise SchemaError(f"bad sddl: {exc}", where + ".sddl") from None
    present = _optional(doc, "dacl_present", bool, True, where)
    protected = _optional(doc, "protected", bool, False, where)
    ace_docs = _optional(doc, "aces", list, [], where)
    if not present and ace_docs:
        raise SchemaError("dacl_present=false cannot carry aces", where)
    aces = tuple(_load_ace(a, f"{where}.aces[{i}]") for i, a in enumerate(ace_docs))
    owner = _optional(doc, "owner", str, None, where)
    group = _optional(doc, "group", str, None, where)
    return path, SecurityDescriptor(
        Dacl(present, aces),
        _sid_field(owner, where) if owner else None,
        _sid_field(group, where) if group else None,
        protected,
    )


def _load_principal(doc: Any, where: str) -> Principal:
    if not isinstance(doc, dict):
        raise SchemaError("principal must be an object", where)
    sid = _sid_field(_require(doc, "sid", str, where), where)
    name = _require(doc, "name", str, where)
    kind = _require(doc, "kind", str, where)
    if kind not in (USER, GROUP):
        raise SchemaError(f"kind must be 'user' or 'group', got {kind!r}", where)
    members = _optional(doc, "members", list, [], where)
    if not all(isinstance(m, str) for m in members):
        raise SchemaError("members must be SID strings", where)
    return Principal(sid, name, kind, tuple(_sid_field(m, where) for m in members))


def from_document(doc: Any, validate: bool = True) -> Snapshot:
    if not isinstance(doc, dict):
        raise SchemaError("snapshot must be a JSON object")
    version = _require(doc, "version", int, "$")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported version {version}", "$.version")
    domain = _require(doc, "domain", str, "$")
    principals = [_load_principal(p, f"$.principals[{i}]")
                  for i, p in enumerate(_require(doc, "principals", list, "$"))]
    sids = [p.sid for p in principals]
    if len(set(sids)) != len(sids):
        raise SchemaError("duplicate principal SID", "$.principals")
    folders = [_load_folder(f, f"$.folders[{i}]") for i, f in enumerate(_require(doc, "folders", list, "$"))]
    snapshot = Snapshot(domain, Directory.from_principals(domain, principals), build_tree(folders), version)
    if validate:
        defects = validate_snapshot(snapshot)
        for d in defects:
            if d.kind in SOFT_DEFECTS:
                log.warning("snapshot: %s", d)
        hard = [d for d in defects if d.kind not in SOFT_DEFECTS]
        if hard:
            raise ValidationFailure(hard)
    return snapshot


def load_snapshot(data: bytes | str, validate: bool = True) -> Snapshot:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return from_document(doc, validate)


def _ace_doc(ace: Ace) -> dict:
    return {"type": ace.ace_type, "sid": ace.sid, "mask": format_mask(ace.mask), "flags": ace.sorted_flags()}


def to_document(snapshot: Snapshot) -> dict:
    principals = []
    for p in sorted(snapshot.directory, key=lambda p: (p.name.casefold(), p.sid)):
        entry = {"sid": p.sid, "name": p.name, "kind": p.kind}
        if p.kind == GROUP or p.members:
            entry["members"] = list(p.members)
        principals.append(entry)
    folders = []
    for node in snapshot.root.walk():
        sd = node.sd
        entry: dict[str, Any] = {"path": node.path}
        if not sd.dacl.present:
            entry["dacl_present"] = False
        else:
            entry["protected"] = sd.protected
            entry["aces"] = [_ace_doc(a) for a in sd.dacl.aces]
        if sd.owner is not None:
            entry["owner"] = sd.owner
        if sd.group is not None:
            entry["group"] = sd.group
        folders.append(entry)
    return {"version": snapshot.version, "domain": snapshot.domain,
            "principals": principals, "folders": folders}


def save_snapshot(snapshot: Snapshot) -> bytes:
    return (json.dumps(to_document(snapshot), indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode()


def subtree_paths(snapshot: Snapshot, path: str) -> list[str]:
    return [n.path for n in snapshot.folder(path).walk()]

