#!/usr/bin/env python3
"""
Write the built-in sensor table as an SRF JSON library (one Gaussian response per band).

Run from repo root: python scripts/export_sensor_library.py --out sensors.json
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO_ROOT / "src"))

from band_repair.sensorlib.library import builtin_sensors  # noqa: E402
from band_repair.sensorlib.srf import load_library, save_library  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description="Export the built-in sensor library")
    parser.add_argument("--out", type=Path, default=REPO_ROOT / "sensors.json")
    args = parser.parse_args()

    sensors = builtin_sensors()
    save_library(sensors, args.out)
    names = [s.name for s in load_library(args.out)]
    print(f"Wrote {len(names)} sensors to {args.out}: {', '.join(names)}")


if __name__ == "__main__":
    main()
