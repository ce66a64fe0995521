"""Run a rendered script tree in a subprocess and collect its trace."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path


class RuntimeFailure(RuntimeError):
    """Execution failed; carries the diagnostic text verbatim."""

    def __init__(self, diagnostic: str, returncode: int):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic
        self.returncode = returncode


def execute(tree_dir: str | Path, steps: int, out_name: str = "trace.jsonl",
            timeout: float = 600.0) -> Path:
    tree_dir = Path(tree_dir)
    trace_path = tree_dir / out_name
    proc = subprocess.run(
        [sys.executable, "main.py", "--steps", str(steps), "--out", out_name],
        cwd=tree_dir,
        capture_output=True,
        text=True,
        timeout=timeout,
    )
    if proc.returncode != 0:
        diagnostic = proc.stderr.strip() or proc.stdout.strip() or "unknown failure"
        raise RuntimeFailure(diagnostic, proc.returncode)
    return trace_path
