#!/usr/bin/env python3
"""Regenerate the slider-bound constants from the engine's tuning ranges.

Writes src/bounds.gen.ts and test/fixtures/bounds.json.  Run from the
repository root after changing fsolink.config.TUNING_RANGES:

    python3 frontend/scripts/gen_bounds.py
"""

import json
import os
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, os.path.join(ROOT, "src"))

from fsolink.config import TUNING_RANGES  # noqa: E402

HEADER = "// Generated by scripts/gen_bounds.py from the engine's tuning ranges.\n// Do not edit by hand.\n"


def main():
    frontend = os.path.join(ROOT, "frontend")
    lines = [HEADER, "export const PARAM_BOUNDS = {"]
    for name, (lo, hi) in TUNING_RANGES.items():
        lines.append(f"    {name}: {{ min: {lo!r}, max: {hi!r} }},")
    lines.append("} as const;\n")
    lines.append("export type TunableParam = keyof typeof PARAM_BOUNDS;\n")
    with open(os.path.join(frontend, "src", "bounds.gen.ts"), "w") as fh:
        fh.write("\n".join(lines))
    with open(os.path.join(frontend, "test", "fixtures", "bounds.json"), "w") as fh:
        json.dump({k: {"min": lo, "max": hi} for k, (lo, hi) in TUNING_RANGES.items()}, fh, indent=2)
        fh.write("\n")
    print("wrote src/bounds.gen.ts and test/fixtures/bounds.json")


if __name__ == "__main__":
    main()
