"""User-centric effective NTFS permission audit over folder-tree snapshots."""

__version__ = "0.1.0"

from .access_mask import ATOMIC_RIGHTS, REPORT_RIGHTS, BasicPermission, ReportRight, decompose, \
    expand_basic, right_mask
from .ace import Ace, AceFlag, Dacl, SecurityDescriptor, canonicalize, validate_sd
from .evaluator import AccessDecision, EffectiveRightsRow, Evaluator, RightsMatrix, access_check, \
    build_matrix, effective_rights
from .fixtures import GenParams, gen_paper_fixture, gen_random
from .inheritance import EffectiveDacl, FolderNode, effective_dacl, propagate_step
from .principals import EVERYONE, Directory, Principal, membership_closure, resolve_principal, \
    validate_directory
from .reporting import ReportTable, render_csv, sort_table
from .sddl import emit_sddl, parse_sddl
from .snapshot import Snapshot, load_snapshot, save_snapshot
