"""
Main application entry point.

    qtiming sql --config scenarios/reference.ini
    qtiming fisher --out fisher.csv
    qtiming simulate --seed 7 --dump outcomes.bin
"""

import sys
from typing import List, Optional

from src.cli import run


def main(argv: Optional[List[str]] = None) -> int:
    """Console script entry point."""
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
