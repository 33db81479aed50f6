"""Run the built-in validation checks, then optionally the acceptance criteria.

Usage: python3 scripts/run_validate.py [--acceptance]
"""

import argparse
import runpy
import sys
from pathlib import Path

from tlsrelax.cli import main as cli_main


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--acceptance", action="store_true", help="also run all acceptance criteria (a few minutes)")
    args = ap.parse_args(argv)
    rc = cli_main(["validate"])
    if args.acceptance:
        path = Path(__file__).resolve().parents[1] / "tests" / "test_acceptance.py"
        sys.path.insert(0, str(path.parent))
        try:
            runpy.run_path(str(path), run_name="__main__")
        except SystemExit as exc:
            rc = rc or int(exc.code or 0)
    return rc


if __name__ == "__main__":
    sys.exit(main())
