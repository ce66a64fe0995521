"""Render a program bundle directory into a runnable torch script tree.

One source file per module kind, wired through the interfaces the manifest
declares.  Rendering is deterministic: the same bundle yields byte-identical
trees.  The residual string is validated by shelling out to the primary CLI's
expression check before any code is written.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

from . import templates
from .compile import CompileError, CoordinateLayout, emit, emit_coordinate_expression
from .sexpr import SexprError, field_names, has_time_derivative, parse, spatial_axes

MODULE_KINDS = ("model", "pde_loss", "preprocessing", "training_loop", "validation", "main")


class ManifestInvalid(ValueError):
    pass


def _check_residual_with_primary_cli(residual: str) -> None:
    """The primary's `formulate --check-expr` is the authority on the grammar."""
    try:
        proc = subprocess.run(
            [sys.executable, "-m", "pinnforge.cli", "formulate", "--check-expr", residual],
            capture_output=True,
            text=True,
            timeout=60,
        )
    except (OSError, subprocess.TimeoutExpired) as err:
        raise ManifestInvalid(f"cannot validate residual via primary CLI: {err}") from err
    if proc.returncode != 0:
        raise ManifestInvalid(
            f"residual rejected by primary grammar: {proc.stderr.strip()}"
        )


def load_manifest(bundle_dir: str | Path) -> dict:
    path = Path(bundle_dir) / "manifest.json"
    if not path.exists():
        raise ManifestInvalid(f"no manifest.json in {bundle_dir}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ManifestInvalid(f"manifest is not valid JSON: {err}") from err
    if not manifest.get("residual"):
        raise ManifestInvalid("manifest missing residual string")
    for key in ("net", "trainer_config", "pde"):
        if key not in manifest:
            raise ManifestInvalid(f"manifest missing {key!r}")
    return manifest


def _boundary_faces(pde: dict, layout: CoordinateLayout) -> list[tuple[int, float, str]]:
    """(column, fixed coordinate, compiled value expression) per dirichlet face."""
    extents = pde["domain"]["extents"]
    faces = []
    for bc in pde.get("bc", []):
        if bc["kind"] != "dirichlet":
            raise ManifestInvalid(
                f"unsupported boundary kind {bc['kind']!r} for the external runtime"
            )
        axis = int(bc["axis"])
        column = axis - 1
        lo, hi = extents[column]
        value_code = (
            emit_coordinate_expression(bc["value"], layout) if bc.get("value") else "0.0"
        )
        segment = str(bc.get("segment", ""))
        if "=" in segment:
            try:
                coordinate = float(segment.split("=", 1)[1])
                faces.append((column, coordinate, value_code))
                continue
            except ValueError:
                pass
        faces.append((column, float(lo), value_code))
        faces.append((column, float(hi), value_code))
    return faces


def render(bundle_dir: str | Path, out_dir: str | Path) -> Path:
    manifest = load_manifest(bundle_dir)
    _check_residual_with_primary_cli(manifest["residual"])

    try:
        residual_tree = parse(manifest["residual"])
    except SexprError as err:
        raise ManifestInvalid(f"residual does not parse: {err}") from err

    fields = field_names(residual_tree)
    if fields != {"u"}:
        raise ManifestInvalid(
            f"external runtime supports a single field 'u', manifest has {sorted(fields)}"
        )
    axes = sorted(spatial_axes(residual_tree))
    has_time = has_time_derivative(residual_tree)
    layout = CoordinateLayout(axes, has_time)

    pde = manifest["pde"]
    if len(axes) > len(pde["domain"]["extents"]):
        raise ManifestInvalid("residual references more axes than the domain declares")

    try:
        residual_code = emit(residual_tree, layout)
        faces = _boundary_faces(pde, layout)
        ic_code = None
        if has_time and pde.get("ic"):
            ic_code = emit_coordinate_expression(pde["ic"], layout)
        reference_code = None
        if manifest.get("reference_solution"):
            reference_code = emit_coordinate_expression(
                manifest["reference_solution"], layout
            )
    except CompileError as err:
        raise ManifestInvalid(str(err)) from err

    context = templates.RenderContext(
        manifest=manifest,
        layout=layout,
        residual_code=residual_code,
        faces=faces,
        ic_code=ic_code,
        reference_code=reference_code,
    )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for kind in MODULE_KINDS:
        (out / f"{kind}.py").write_text(templates.render_module(kind, context), encoding="utf-8")
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
    )
    return out
