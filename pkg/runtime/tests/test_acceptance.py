"""Secondary acceptance: wire compatibility, sabotage localization, shared
Poisson bound (run with -v -s for the pass/fail lines).
"""

import json

import pytest

from pinn_runtime.execute import RuntimeFailure, execute
from pinn_runtime.render import render

from test_execute import SABOTAGES, sabotage

_RESULTS = []


def record(name, ok, detail=""):
    line = f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else "")
    _RESULTS.append(line)
    print(line)
    assert ok, line


def teardown_module(module):
    print()
    for line in _RESULTS:
        print(line)


def test_wire_compatibility_heat_50_steps(tmp_path, heat_bundle):
    from pinnforge.trainer import validate_trace_text

    tree = render(heat_bundle, tmp_path / "tree")
    trace = execute(tree, steps=50)
    lines = trace.read_text().splitlines()
    problems = validate_trace_text(trace.read_text())
    record(
        "external runtime wire compatibility (50 steps, trace validates)",
        len(lines) == 50 and problems == [],
        f"{len(lines)} records, {len(problems)} problems",
    )


def test_all_four_sabotages_localize(tmp_path, heat_bundle):
    import re

    from pinnforge.feedback import SIGNATURE_TABLE, localize_error

    outcomes = []
    for i, (filename, original, replacement, target) in enumerate(SABOTAGES):
        tree = render(heat_bundle, tmp_path / f"tree{i}")
        sabotage(tree, filename, original, replacement)
        try:
            execute(tree, steps=5)
            outcomes.append((filename, "no failure", False))
        except RuntimeFailure as err:
            directive = localize_error(err.diagnostic)
            rows = [
                sig for sig, pattern, _ in SIGNATURE_TABLE
                if re.search(pattern, err.diagnostic.lower())
            ]
            ok = directive.target == target and len(rows) == 1
            outcomes.append((filename, f"{directive.target}({len(rows)} rows)", ok))
    record(
        "sabotage fixtures each match exactly one intended signature",
        all(ok for *_, ok in outcomes),
        "; ".join(f"{f}->{got}" for f, got, _ in outcomes),
    )


def test_shared_poisson_case_meets_builtin_bound(tmp_path, poisson_bundle):
    tree = render(poisson_bundle, tmp_path / "tree")
    execute(tree, steps=2000)
    metrics = json.loads((tree / "metrics.json").read_text())
    record(
        "shared 1D Poisson case (autodiff runtime, MSE <= 1e-2)",
        metrics["final_mse"] <= 1e-2,
        f"mse={metrics['final_mse']:.2e}",
    )
