"""Print the User-B effective-rights rows for the ten library subfolders as CSV."""

import sys

from aclaudit.evaluator import Evaluator
from aclaudit.fixtures import LIBRARY_ROOT, gen_paper_fixture
from aclaudit.reporting import table_csv, to_table


def main():
    variant = sys.argv[1] if len(sys.argv) > 1 else "table3"
    snap = gen_paper_fixture(variant)
    matrix = Evaluator(snap).build_matrix(["User-B"], snap.select_folders(LIBRARY_ROOT))
    sys.stdout.write(table_csv(to_table(matrix, directory=snap.directory)).decode())


if __name__ == "__main__":
    main()
