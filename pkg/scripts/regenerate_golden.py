"""Rewrite tests/golden/<case>.out from the current CLI.

Run from the repository root after an intentional output change:

    python3 scripts/regenerate_golden.py
"""

import json
import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"


def run_case(case):
    env = dict(os.environ, GMINK_THREADS="1")
    return subprocess.run([sys.executable, "-m", "gmink", *case["args"]], cwd=ROOT, env=env,
                          capture_output=True)


def main():
    cases = json.loads((GOLDEN / "cases.json").read_text())
    for case in cases:
        res = run_case(case)
        if res.returncode != case["exit"]:
            sys.exit(f"{case['name']}: exit {res.returncode}, expected {case['exit']}\n"
                     f"{res.stderr.decode()}")
        (GOLDEN / f"{case['name']}.out").write_bytes(res.stdout)
        print(f"{case['name']}: exit {res.returncode}, {len(res.stdout)} bytes")


if __name__ == "__main__":
    main()
