#!/usr/bin/env python3
"""
Simple runner script for the qae_lab package.
This allows running the CLI without needing to install it.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from qae_lab.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
