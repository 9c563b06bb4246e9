"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input parse/schema error,
3 unknown principal or path, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import TextIO

from . import __version__
from .access_mask import ATOMIC_RIGHTS, REPORT_RIGHTS, ReportRight, format_mask
from .errors import (AclAuditError, AmbiguousName, IcaclsError, SchemaError, SddlError, UnknownColumn,
                     UnknownPath, UnknownPrincipal, ValidationFailure)
from .evaluator import Evaluator
from .fixtures import LIBRARY_ACCOUNT_ALIASES, GenParams, gen_paper_fixture, gen_random, sized_params
from .icacls import parse_icacls, to_snapshot
from .oracle import oracle_rights
from .principals import Directory
from .reporting import sort_table, table_csv, to_table
from .sddl import emit_sddl, parse_sddl
from .snapshot import load_snapshot, save_snapshot

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_UNKNOWN, EXIT_MISMATCH = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _rights(text: str) -> tuple[ReportRight, ...]:
    if text == "all":
        return REPORT_RIGHTS
    if text == "atomic":
        return ATOMIC_RIGHTS
    picked = []
    for name in text.split(","):
        try:
            picked.append(ReportRight.parse(name))
        except KeyError:
            raise UsageError(f"unknown right {name!r}; choose from {', '.join(r.name for r in REPORT_RIGHTS)}")
    return tuple(picked)


def _seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return seeds


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None


def _emit(data: bytes, out: str | None, stdout: TextIO) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        stdout.write(data.decode("utf-8"))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aclaudit", description="Effective NTFS permission audit over folder-tree snapshots.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ins = sub.add_parser("inspect", help="report effective rights of users on folders as CSV",
                         epilog="The CSV opens directly in Excel (Data > From Text/CSV).")
    ins.add_argument("--snapshot", required=True, help="snapshot JSON file")
    who = ins.add_mutually_exclusive_group(required=True)
    who.add_argument("--users", help="comma-separated user names or SIDs, in report order")
    who.add_argument("--all-users", action="store_true", help="every user in the directory, sorted by name")
    ins.add_argument("--root", help="folder whose subfolders are inspected (default: snapshot root)")
    ins.add_argument("--recurse", action="store_true", help="inspect all descendants, not just immediate subfolders")
    ins.add_argument("--include-root", action="store_true", help="also inspect the --root folder itself")
    ins.add_argument("--rights", default="all", help="all | atomic | comma-separated right names (default: all)")
    ins.add_argument("--sort", metavar="COLUMN[:asc|desc]", help="sort rows by a report column")
    ins.add_argument("--out", help="write CSV here instead of stdout")

    imp = sub.add_parser("import-icacls", help="convert an 'icacls <root> /t' dump into a snapshot")
    imp.add_argument("dump", help="icacls text output file")
    imp.add_argument("--principals", help="snapshot JSON whose principal directory resolves account names")
    imp.add_argument("--domain", help="default domain for bare names (default: from --principals)")
    imp.add_argument("--alias", action="append", default=[], metavar="ACCOUNT=KEY",
                     help="map an icacls account to a directory name or SID; repeatable")
    imp.add_argument("--library-aliases", action="store_true", help="add the Coruh\\userX -> CORUH\\User-X aliases")
    imp.add_argument("--entries", action="store_true", help="print parsed entries as JSON instead of a snapshot")
    imp.add_argument("--out", help="write output here instead of stdout")

    sd = sub.add_parser("sddl", help="parse or normalize SDDL text")
    sd.add_argument("action", choices=["parse", "normalize"],
                    help="parse: print the descriptor as JSON; normalize: print canonical SDDL")
    sd.add_argument("text", help="SDDL string, e.g. 'D:(A;OICI;FA;;;WD)'")

    fx = sub.add_parser("fixture", help="write a built-in or random snapshot")
    fx.add_argument("variant", choices=["table3", "icacls", "random"])
    fx.add_argument("--seed", type=int, default=0, help="random: generator seed")
    fx.add_argument("--folders", type=int, default=20, help="random: folder count")
    fx.add_argument("--users", type=int, default=5, help="random: user count")
    fx.add_argument("--groups", type=int, default=3, help="random: group count")
    fx.add_argument("--max-depth", type=int, default=6, help="random: maximum folder depth")
    fx.add_argument("--out", help="write JSON here instead of stdout")

    vf = sub.add_parser("verify", help="differential check of the evaluator against the brute-force oracle")
    vf.add_argument("--seeds", default="1..100", help="seed list, e.g. 1..100 or 1,5,9 (default: 1..100)")
    vf.add_argument("--snapshot", help="check this snapshot instead of random ones")
    vf.add_argument("--dump", help="write the first counterexample snapshot to this file")

    bn = sub.add_parser("bench", help="time a full matrix build on a generated snapshot")
    bn.add_argument("--users", type=int, default=100, help="user count (default: 100)")
    bn.add_argument("--folders", type=int, default=1000, help="folder count (default: 1000)")
    bn.add_argument("--groups", type=int, default=20, help="group count (default: 20)")
    bn.add_argument("--rights", default="all", help="all | atomic | comma-separated right names")
    bn.add_argument("--seed", type=int, default=0, help="generator seed")
    return p


def _cmd_inspect(args, stdout, stderr) -> int:
    snapshot = load_snapshot(_read(args.snapshot))
    rights = _rights(args.rights)
    if args.all_users:
        users = [u.sid for u in sorted(snapshot.directory.users, key=lambda u: (u.name.casefold(), u.sid))]
    else:
        users = [u.strip() for u in args.users.split(",") if u.strip()]
    if not users:
        raise UsageError("no users selected")
    folders = snapshot.select_folders(args.root, args.recurse, args.include_root)
    if not folders:
        raise UsageError(f"no folders selected under {args.root or snapshot.root.path}"
                         " (use --include-root or --recurse)")
    matrix = Evaluator(snapshot).build_matrix(users, folders, rights)
    table = to_table(matrix, rights, snapshot.directory)
    if args.sort:
        column, _, direction = args.sort.partition(":")
        match = [h for h in table.header if h.casefold() == column.casefold()]
        if not match:
            raise UnknownColumn(column)
        table = sort_table(table, match[0], direction or "asc")
    _emit(table_csv(table), args.out, stdout)
    return EXIT_OK


def _cmd_import(args, stdout, stderr) -> int:
    text = _read(args.dump).decode("utf-8-sig")
    grouped = parse_icacls(text)
    if args.entries:
        doc = [{"path": e.path, "account": e.account, "deny": e.deny,
                "flags": sorted(f.value for f in e.flags), "right": e.right_token,
                "mask": format_mask(e.mask)} for entries in grouped.values() for e in entries]
        _emit((json.dumps(doc, indent=2) + "\n").encode(), args.out, stdout)
        return EXIT_OK
    if args.principals:
        directory = load_snapshot(_read(args.principals), validate=False).directory
        if args.domain:
            directory = Directory(args.domain, directory.principals)
    else:
        directory = Directory(args.domain or "WORKGROUP", {})
    aliases = dict(LIBRARY_ACCOUNT_ALIASES) if args.library_aliases else {}
    for item in args.alias:
        account, sep, key = item.partition("=")
        if not sep:
            raise UsageError(f"--alias expects ACCOUNT=KEY, got {item!r}")
        aliases[account] = key
    snapshot, defects = to_snapshot(grouped, directory, aliases)
    for d in defects:
        print(f"warning: {d}", file=stderr)
    _emit(save_snapshot(snapshot), args.out, stdout)
    return EXIT_OK


def _cmd_sddl(args, stdout, stderr) -> int:
    sd = parse_sddl(args.text)
    if args.action == "normalize":
        stdout.write(emit_sddl(sd) + "\n")
        return EXIT_OK
    doc = {
        "owner": sd.owner, "group": sd.group, "protected": sd.protected,
        "aces": [{"type": a.ace_type, "sid": a.sid, "mask": format_mask(a.mask), "flags": a.sorted_flags()}
                 for a in sd.dacl.aces],
    }
    stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_fixture(args, stdout, stderr) -> int:
    if args.variant == "random":
        snapshot = gen_random(GenParams(seed=args.seed, folders=args.folders, users=args.users,
                                        groups=args.groups, max_depth=args.max_depth))
    else:
        snapshot = gen_paper_fixture(args.variant)
    _emit(save_snapshot(snapshot), args.out, stdout)
    return EXIT_OK


def first_mismatch(snapshot) -> tuple[str, str, ReportRight, bool, bool] | None:
    """First (user, folder, right, engine, oracle) disagreement, or None."""
    ev = Evaluator(snapshot)
    users = [p.sid for p in snapshot.directory.users]
    for path in snapshot.paths():
        for sid in users:
            engine = ev.row_values(sid, path)
            oracle = oracle_rights(snapshot, sid, path)
            for r in REPORT_RIGHTS:
                if engine[r] != oracle[r]:
                    return sid, path, r, engine[r], oracle[r]
    return None


def _cmd_verify(args, stdout, stderr) -> int:
    if args.snapshot:
        cases = [("snapshot", load_snapshot(_read(args.snapshot)))]
    else:
        cases = ((f"seed {s}", None, s) for s in _seeds(args.seeds))
    checked = 0
    for case in cases:
        label, snapshot = case[0], case[1]
        if snapshot is None:
            snapshot = gen_random(sized_params(case[2]))
        bad = first_mismatch(snapshot)
        checked += 1
        if bad is not None:
            sid, path, right, engine, oracle = bad
            print(f"mismatch in {label}: user={sid} folder={path} right={right.name} "
                  f"engine={engine} oracle={oracle}", file=stderr)
            if args.dump:
                Path(args.dump).write_bytes(save_snapshot(snapshot))
                print(f"counterexample written to {args.dump}", file=stderr)
            else:
                stderr.write(save_snapshot(snapshot).decode())
            return EXIT_MISMATCH
    stdout.write(f"ok: {checked} snapshot(s), engine agrees with oracle\n")
    return EXIT_OK


def _cmd_bench(args, stdout, stderr) -> int:
    rights = _rights(args.rights)
    snapshot = gen_random(GenParams(seed=args.seed, folders=args.folders, users=args.users,
                                    groups=args.groups, aces_per_folder=(0, 3)))
    users = [p.sid for p in snapshot.directory.users]
    start = time.perf_counter()
    Evaluator(snapshot).build_matrix(users, snapshot.paths(), rights)
    elapsed = (time.perf_counter() - start) * 1000
    stdout.write(f"users={len(users)} folders={len(snapshot.paths())} rights={len(rights)} "
                 f"elapsed_ms={elapsed:.0f}\n")
    return EXIT_OK


_COMMANDS = {
    "inspect": _cmd_inspect,
    "import-icacls": _cmd_import,
    "sddl": _cmd_sddl,
    "fixture": _cmd_fixture,
    "verify": _cmd_verify,
    "bench": _cmd_bench,
}


def run(argv: list[str], stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, stdout, stderr)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(str(exc).rstrip(), file=stderr)
        return EXIT_USAGE
    except (UnknownPrincipal, UnknownPath, AmbiguousName) as exc:
        what = {UnknownPrincipal: "unknown principal", UnknownPath: "unknown folder",
                AmbiguousName: "ambiguous name"}[type(exc)]
        print(f"error: {what}: {exc}", file=stderr)
        return EXIT_UNKNOWN
    except UnknownColumn as exc:
        print(f"error: unknown sort column {exc}", file=stderr)
        return EXIT_USAGE
    except (SchemaError, ValidationFailure, SddlError, IcaclsError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except AclAuditError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
