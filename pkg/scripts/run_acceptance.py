"""Run the acceptance suite and print one PASS/FAIL line per criterion."""

import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    root = Path(__file__).resolve().parents[1]
    sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q", "-rx", *sys.argv[1:]]))
