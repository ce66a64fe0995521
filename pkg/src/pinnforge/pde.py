"""Canonical PDE representation and the JSON interchange format.

Every inter-module boundary and fixture uses the same serialization:
{"residual": <prefix expression>, "bc": [...], "ic": <string|null>,
 "domain": {...}, "metadata": {...}}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import expr as ex
from .errors import ConfigInvalid

BC_KINDS = ("dirichlet", "neumann", "periodic", "robin")

GEOMETRY_CODES = ("rectilinear", "curved", "multi-component", "highly-irregular")
DISCRETIZATION_CODES = ("cartesian", "curvilinear", "unstructured")

# canonical axis naming: position i (1-based) of an axis letter in this tuple
AXIS_NAMES = ("x", "y", "z", "w")


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str                 # one of BC_KINDS
    axis: int                 # 1-based spatial axis the condition applies to
    segment: str              # label like "x=0", "x=1", or "all" for periodic
    value: ex.ExprTree | None  # prescribed value expression (None for periodic)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "axis": self.axis,
            "segment": self.segment,
            "value": ex.to_prefix(self.value) if self.value is not None else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "BoundaryCondition":
        kind = str(d.get("kind", "")).lower()
        if kind not in BC_KINDS:
            raise ConfigInvalid(f"unknown BC kind {d.get('kind')!r}")
        raw = d.get("value")
        value = _load_expr(raw) if raw is not None else None
        return BoundaryCondition(kind, int(d["axis"]), str(d.get("segment", "")), value)


@dataclass(frozen=True)
class Domain:
    dims: int
    extents: tuple[tuple[float, float], ...]   # per spatial axis
    periodic_axes: frozenset[int] = frozenset()  # 1-based
    geometry: str = "rectilinear"
    discretization: str = "cartesian"
    time_extent: tuple[float, float] | None = None

    def __post_init__(self):
        if self.dims < 1:
            raise ConfigInvalid("domain needs at least one spatial dimension")
        if len(self.extents) != self.dims:
            raise ConfigInvalid("extents must list one interval per spatial axis")
        if any(a < 1 or a > self.dims for a in self.periodic_axes):
            raise ConfigInvalid("periodic axis outside 1..dims")
        if self.geometry not in GEOMETRY_CODES:
            raise ConfigInvalid(f"unknown geometry code {self.geometry!r}")
        if self.discretization not in DISCRETIZATION_CODES:
            raise ConfigInvalid(f"unknown discretization code {self.discretization!r}")

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "extents": [list(e) for e in self.extents],
            "periodic_axes": sorted(self.periodic_axes),
            "geometry": self.geometry,
            "discretization": self.discretization,
            "time_extent": list(self.time_extent) if self.time_extent else None,
        }

    @staticmethod
    def from_dict(d: dict) -> "Domain":
        return Domain(
            dims=int(d["dims"]),
            extents=tuple((float(a), float(b)) for a, b in d["extents"]),
            periodic_axes=frozenset(int(a) for a in d.get("periodic_axes", [])),
            geometry=d.get("geometry", "rectilinear"),
            discretization=d.get("discretization", "cartesian"),
            time_extent=tuple(d["time_extent"]) if d.get("time_extent") else None,
        )


@dataclass(frozen=True)
class PdeMetadata:
    linear: bool
    order: int                    # max derivative order in the residual
    reynolds: float | None = None
    peclet: float | None = None
    nonlocal_terms: bool = False

    def to_dict(self) -> dict:
        return {
            "linear": self.linear,
            "order": self.order,
            "reynolds": self.reynolds,
            "peclet": self.peclet,
            "nonlocal_terms": self.nonlocal_terms,
        }


@dataclass(frozen=True)
class CanonicalPde:
    residual: ex.ExprTree
    boundary_conditions: tuple[BoundaryCondition, ...]
    initial_condition: ex.ExprTree | None
    domain: Domain
    metadata: PdeMetadata

    def to_dict(self) -> dict:
        return {
            "residual": ex.to_prefix(self.residual),
            "bc": [bc.to_dict() for bc in self.boundary_conditions],
            "ic": ex.to_prefix(self.initial_condition) if self.initial_condition else None,
            "domain": self.domain.to_dict(),
            "metadata": self.metadata.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _load_expr(text: str) -> ex.ExprTree:
    stripped = text.strip()
    if stripped.startswith("("):
        return ex.from_prefix(stripped)
    return ex.parse(stripped)


def make_pde(
    residual: ex.ExprTree | str,
    boundary_conditions=(),
    initial_condition: ex.ExprTree | str | None = None,
    domain: Domain | None = None,
    reynolds: float | None = None,
    peclet: float | None = None,
    nonlocal_terms: bool = False,
) -> CanonicalPde:
    """Build a CanonicalPde: canonicalizes the residual and derives metadata."""
    tree = _load_expr(residual) if isinstance(residual, str) else residual
    tree = ex.canonicalize(tree)
    if isinstance(initial_condition, str):
        initial_condition = ex.canonicalize(_load_expr(initial_condition))
    elif initial_condition is not None:
        initial_condition = ex.canonicalize(initial_condition)
    if domain is None:
        axes = sorted(ex.spatial_axes(tree))
        dims = max(1, len(axes))
        domain = Domain(dims=dims, extents=tuple((0.0, 1.0) for _ in range(dims)))
    bcs = []
    for bc in boundary_conditions:
        if isinstance(bc, BoundaryCondition):
            bcs.append(bc)
        else:
            bcs.append(BoundaryCondition.from_dict(bc))
    meta = PdeMetadata(
        linear=ex.is_linear(tree),
        order=ex.max_derivative_order(tree),
        reynolds=reynolds,
        peclet=peclet,
        nonlocal_terms=nonlocal_terms,
    )
    return CanonicalPde(tree, tuple(bcs), initial_condition, domain, meta)


def from_dict(d: dict) -> CanonicalPde:
    """Load the interchange format; recomputes and checks derived metadata."""
    residual = ex.canonicalize(_load_expr(d["residual"]))
    meta_in = d.get("metadata") or {}
    domain = Domain.from_dict(d["domain"]) if d.get("domain") else None
    pde = make_pde(
        residual,
        boundary_conditions=[BoundaryCondition.from_dict(b) for b in d.get("bc", [])],
        initial_condition=d.get("ic"),
        domain=domain,
        reynolds=meta_in.get("reynolds"),
        peclet=meta_in.get("peclet"),
        nonlocal_terms=bool(meta_in.get("nonlocal_terms", False)),
    )
    if "order" in meta_in and int(meta_in["order"]) != pde.metadata.order:
        raise ConfigInvalid(
            f"metadata order {meta_in['order']} != residual order {pde.metadata.order}"
        )
    return pde


def from_json(text: str) -> CanonicalPde:
    return from_dict(json.loads(text))
