"""Run acceptance criteria 1-13 outside pytest and print one line each.

Usage: python scripts/run_acceptance.py [criterion ...]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import test_acceptance as acc  # noqa: E402


def main(argv):
    wanted = [int(a) for a in argv] or list(range(1, 14))
    failed = 0
    for n in wanted:
        failed += not getattr(acc, f"check_{n}")()
        print(acc.RESULTS[n], flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
