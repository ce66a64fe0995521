import json
import subprocess
import sys

import pytest

from pinn_runtime.execute import RuntimeFailure, execute
from pinn_runtime.render import render

# sabotages: (module file, original fragment, replacement, intended localization target)
SABOTAGES = [
    (
        "model.py",
        "LAYER_DIMS = [(2, 16), (16, 16), (16, 1)]",
        "LAYER_DIMS = [(2, 16), (8, 16), (16, 1)]",
        "model",
    ),
    (
        "pde_loss.py",
        "    u = forward(model, coords)",
        "    u_renamed = forward(model, coords)",
        "pde_loss",
    ),
    (
        "preprocessing.py",
        "    generator = torch.Generator().manual_seed(SEED)",
        "    open('collocation_cache.csv')\n    generator = torch.Generator().manual_seed(SEED)",
        "preprocessing",
    ),
    (
        "training_loop.py",
        "        total = loss(model, batch)",
        "        total = loss(model, batch) * float('nan')",
        "training_loop",
    ),
]


def sabotage(tree, filename, original, replacement):
    path = tree / filename
    text = path.read_text()
    assert original in text, f"sabotage anchor missing in {filename}"
    path.write_text(text.replace(original, replacement))


class TestExecute:
    def test_heat_bundle_runs_50_steps(self, tmp_path, heat_bundle):
        tree = render(heat_bundle, tmp_path / "tree")
        trace = execute(tree, steps=50)
        lines = [json.loads(line) for line in trace.read_text().splitlines()]
        assert len(lines) == 50
        assert [d["t"] for d in lines] == list(range(1, 51))
        assert all(d["loss"] >= 0 and d["grad_norm"] >= 0 for d in lines)

    def test_trace_passes_primary_validator(self, tmp_path, heat_bundle):
        from pinnforge.trainer import validate_trace_text

        tree = render(heat_bundle, tmp_path / "tree")
        trace = execute(tree, steps=20)
        assert validate_trace_text(trace.read_text()) == []

    def test_trace_scored_by_primary_cli(self, tmp_path, heat_bundle):
        tree = render(heat_bundle, tmp_path / "tree")
        trace = execute(tree, steps=20)
        proc = subprocess.run(
            [sys.executable, "-m", "pinnforge.cli", "score-trace", str(trace),
             "--param-count", "100", "--mse", "0.1"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        assert 0.0 <= payload["overall"] <= 1.0

    @pytest.mark.parametrize("filename,original,replacement,target", SABOTAGES)
    def test_sabotage_diagnostics_localize(self, tmp_path, heat_bundle,
                                           filename, original, replacement, target):
        from pinnforge.feedback import localize_error

        tree = render(heat_bundle, tmp_path / "tree")
        sabotage(tree, filename, original, replacement)
        with pytest.raises(RuntimeFailure) as err:
            execute(tree, steps=5)
        directive = localize_error(err.value.diagnostic)
        assert directive.target == target, (
            f"{filename}: {err.value.diagnostic!r} -> {directive.target}"
        )

    def test_deterministic_traces(self, tmp_path, heat_bundle):
        tree1 = render(heat_bundle, tmp_path / "t1")
        tree2 = render(heat_bundle, tmp_path / "t2")
        a = execute(tree1, steps=15).read_text()
        b = execute(tree2, steps=15).read_text()
        assert a == b
