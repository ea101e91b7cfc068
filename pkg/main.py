#!/usr/bin/env python3
"""
Spectral band repair: command-line entry point.
"""

import sys
from pathlib import Path

# Allow running from repo root without installing package
sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from band_repair.cli import main

if __name__ == "__main__":
    sys.exit(main())
