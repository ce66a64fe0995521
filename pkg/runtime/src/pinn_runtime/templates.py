"""Torch source templates for the six rendered modules."""

from __future__ import annotations

from dataclasses import dataclass

from .compile import CoordinateLayout


@dataclass
class RenderContext:
    manifest: dict
    layout: CoordinateLayout
    residual_code: str
    faces: list            # (column, coordinate, value expression code)
    ic_code: str | None
    reference_code: str | None


def _header(kind: str, interfaces: dict) -> str:
    declared = interfaces.get(kind, {})
    provides = ", ".join(declared.get("provides", []))
    requires = ", ".join(declared.get("requires", []))
    return (
        f"# module: {kind}\n"
        f"# provides: {provides}\n"
        f"# requires: {requires}\n"
        "# rendered by pinn-runtime; edits are overwritten on re-render\n"
    )


def _model(ctx: RenderContext) -> str:
    net = ctx.manifest["net"]
    depth = int(net.get("depth", 3))
    width = int(net.get("width", 32))
    activation = net.get("activation", "tanh")
    act_expr = "torch.tanh" if activation == "tanh" else "torch.sin"
    dims = [ctx.layout.dim] + [width] * depth + [1]
    pairs = ", ".join(f"({a}, {b})" for a, b in zip(dims, dims[1:]))
    return f'''import torch
from torch import nn

LAYER_DIMS = [{pairs}]
ACTIVATION = {act_expr}


class Net(nn.Module):
    def __init__(self):
        super().__init__()
        self.layers = nn.ModuleList([nn.Linear(a, b) for a, b in LAYER_DIMS])

    def forward(self, coords):
        h = coords
        for layer in self.layers[:-1]:
            h = ACTIVATION(layer(h))
        return self.layers[-1](h)


def init_params(seed):
    torch.manual_seed(seed)
    return Net()


def forward(model, coords):
    return model(coords).squeeze(-1)
'''


def _pde_loss(ctx: RenderContext) -> str:
    weight = float(ctx.manifest["trainer_config"].get("boundary_weight", 100.0))
    return f'''import torch

from model import forward

PENALTY_WEIGHT = {weight!r}


def partial(u, coords, axis, order):
    grad = u
    for _ in range(order):
        grad = torch.autograd.grad(grad.sum(), coords, create_graph=True)[0][:, axis]
    return grad


def residual(model, coords):
    coords = coords.detach().requires_grad_(True)
    u = forward(model, coords)
    return {ctx.residual_code}


def loss(model, batch):
    r = residual(model, batch["interior"])
    total = (r * r).mean()
    points = batch["penalty_points"]
    if points.shape[0] > 0:
        u_b = forward(model, points)
        v = u_b - batch["penalty_targets"]
        total = total + PENALTY_WEIGHT * (v * v).mean()
    return total
'''


def _preprocessing(ctx: RenderContext) -> str:
    pde = ctx.manifest["pde"]
    cfg = ctx.manifest["trainer_config"]
    extents = [list(map(float, e)) for e in pde["domain"]["extents"][: len(ctx.layout.axes)]]
    time_extent = pde["domain"].get("time_extent") or [0.0, 1.0]
    faces_literal = ",\n    ".join(
        f"({column}, {coordinate!r}, lambda coords: ({code}) * torch.ones(coords.shape[0]))"
        for column, coordinate, code in ctx.faces
    )
    ic_line = (
        f"lambda coords: ({ctx.ic_code}) * torch.ones(coords.shape[0])"
        if ctx.ic_code is not None
        else "None"
    )
    return f'''import torch

SPATIAL_EXTENTS = {extents!r}
HAS_TIME = {ctx.layout.has_time!r}
TIME_EXTENT = {[float(time_extent[0]), float(time_extent[1])]!r}
INTERIOR_POINTS = {int(cfg.get("interior_points", 128))}
BOUNDARY_POINTS = {int(cfg.get("boundary_points", 64))}
SEED = {int(cfg.get("seed", 0))}

FACES = [
    {faces_literal}
]
INITIAL_CONDITION = {ic_line}


def _uniform(generator, n, lo, hi):
    return lo + (hi - lo) * torch.rand(n, generator=generator)


def _fill_columns(generator, n, fixed=None):
    columns = []
    for i, (lo, hi) in enumerate(SPATIAL_EXTENTS):
        if fixed is not None and i == fixed[0]:
            columns.append(torch.full((n,), float(fixed[1])))
        else:
            columns.append(_uniform(generator, n, lo, hi))
    if HAS_TIME:
        if fixed is not None and fixed[0] == "t"  :
            columns.append(torch.full((n,), float(fixed[1])))
        else:
            columns.append(_uniform(generator, n, TIME_EXTENT[0], TIME_EXTENT[1]))
    return torch.stack(columns, dim=1)


def sample_points(manifest):
    generator = torch.Generator().manual_seed(SEED)
    interior = _fill_columns(generator, INTERIOR_POINTS)
    pts = []
    targets = []
    per_face = max(1, BOUNDARY_POINTS // max(1, len(FACES)))
    for column, coordinate, value_fn in FACES:
        face = _fill_columns(generator, per_face, fixed=(column, coordinate))
        pts.append(face)
        targets.append(value_fn(face))
    if INITIAL_CONDITION is not None:
        face = _fill_columns(generator, BOUNDARY_POINTS, fixed=("t", TIME_EXTENT[0]))
        pts.append(face)
        targets.append(INITIAL_CONDITION(face))
    if pts:
        penalty_points = torch.cat(pts, dim=0)
        penalty_targets = torch.cat(targets, dim=0)
    else:
        penalty_points = torch.zeros((0, interior.shape[1]))
        penalty_targets = torch.zeros(0)
    return {{
        "interior": interior,
        "penalty_points": penalty_points,
        "penalty_targets": penalty_targets,
    }}
'''


def _training_loop(ctx: RenderContext) -> str:
    cfg = ctx.manifest["trainer_config"]
    return f'''import math

import torch

from pde_loss import loss

LEARNING_RATE = {float(cfg.get("learning_rate", 2e-3))!r}
DIVERGENCE_THRESHOLD = {float(cfg.get("divergence_threshold", 1e7))!r}


def train(model, batch, steps):
    optimizer = torch.optim.Adam(model.parameters(), lr=LEARNING_RATE)
    records = []
    for step in range(1, steps + 1):
        optimizer.zero_grad()
        total = loss(model, batch)
        value = float(total.item())
        if not math.isfinite(value) or value > DIVERGENCE_THRESHOLD:
            raise RuntimeError(f"non-finite loss encountered at step {{step}}")
        total.backward()
        grad_sq = 0.0
        for p in model.parameters():
            if p.grad is not None:
                grad_sq += float((p.grad * p.grad).sum().item())
        records.append({{"t": step, "loss": value, "grad_norm": math.sqrt(grad_sq)}})
        optimizer.step()
    return records
'''


def _validation(ctx: RenderContext) -> str:
    reference = (
        f"lambda coords: ({ctx.reference_code}) * torch.ones(coords.shape[0])"
        if ctx.reference_code is not None
        else "None"
    )
    return f'''import torch

from model import forward
from pde_loss import residual
from preprocessing import HAS_TIME, SPATIAL_EXTENTS, TIME_EXTENT

REFERENCE = {reference}
EVAL_POINTS = {int(ctx.manifest["trainer_config"].get("eval_points", 256))}


def _grid():
    lines = [torch.linspace(lo, hi, EVAL_POINTS) for lo, hi in SPATIAL_EXTENTS]
    if HAS_TIME:
        lines.append(torch.linspace(TIME_EXTENT[0], TIME_EXTENT[1], EVAL_POINTS))
    if len(lines) == 1:
        return lines[0].unsqueeze(1)
    mesh = torch.meshgrid(*lines, indexing="ij")
    return torch.stack([m.reshape(-1) for m in mesh], dim=1)


def evaluate(model, manifest):
    if REFERENCE is not None:
        grid = _grid()
        with torch.no_grad():
            predicted = forward(model, grid)
        diff = predicted - REFERENCE(grid)
        return float((diff * diff).mean().item())
    from preprocessing import sample_points

    batch = sample_points(manifest)
    r = residual(model, batch["interior"])
    return float((r * r).mean().item())
'''


def _main(ctx: RenderContext) -> str:
    cfg = ctx.manifest["trainer_config"]
    return f'''import argparse
import json
import sys
from pathlib import Path

from model import init_params
from preprocessing import sample_points
from training_loop import train
from validation import evaluate

DEFAULT_STEPS = {int(cfg.get("steps", 2000))}
SEED = {int(cfg.get("seed", 0))}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    parser.add_argument("--out", default="trace.jsonl")
    args = parser.parse_args()

    manifest = json.loads((Path(__file__).parent / "manifest.json").read_text())
    model = init_params(SEED)
    batch = sample_points(manifest)
    records = train(model, batch, args.steps)
    with open(args.out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\\n")
    final_mse = evaluate(model, manifest)
    metrics_path = Path(args.out).with_name("metrics.json")
    metrics_path.write_text(json.dumps({{"final_mse": final_mse}}))
    print(f"wrote {{len(records)}} records to {{args.out}}; final_mse={{final_mse}}")


if __name__ == "__main__":
    try:
        main()
    except Exception as err:  # noqa: BLE001 - diagnostics go to stderr verbatim
        print(f"{{type(err).__name__}}: {{err}}", file=sys.stderr)
        sys.exit(1)
'''


_RENDERERS = {
    "model": _model,
    "pde_loss": _pde_loss,
    "preprocessing": _preprocessing,
    "training_loop": _training_loop,
    "validation": _validation,
    "main": _main,
}


def render_module(kind: str, ctx: RenderContext) -> str:
    interfaces = ctx.manifest.get("interfaces", {})
    return _header(kind, interfaces) + "\n" + _RENDERERS[kind](ctx)
