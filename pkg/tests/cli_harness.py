"""Run CLI golden cases in-process (fast) or as a subprocess."""

import contextlib
import io
import json
import os
import subprocess
import sys
from pathlib import Path

from gmink.cli import run

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"


def load_cases():
    return json.loads((GOLDEN / "cases.json").read_text())


def run_in_process(args):
    """(exit code, stdout bytes, stderr text) with the working directory at the repo root."""
    buf = io.BytesIO()
    out = io.TextIOWrapper(buf, encoding="utf-8", newline="")
    err = io.StringIO()
    cwd = os.getcwd()
    os.chdir(ROOT)
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = run(list(args))
            out.flush()
    finally:
        os.chdir(cwd)
    return code, buf.getvalue(), err.getvalue()


def run_subprocess(args, stdin=None):
    env = dict(os.environ, GMINK_THREADS="1")
    res = subprocess.run([sys.executable, "-m", "gmink", *args], cwd=ROOT, env=env,
                         input=stdin, capture_output=True)
    return res.returncode, res.stdout, res.stderr.decode()
