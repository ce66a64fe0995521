"""Normalized PDE summaries and the semantic consistency score.

A summary is a pure function of a canonical PDE's structure and metadata, so
two PDEs that differ only in variable names summarize identically.  The
baseline scorer is deterministic; embedding providers are optional and score
the free-text rendering instead.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from . import expr as ex
from .pde import CanonicalPde

# closed tag vocabulary; summarize() never emits anything else
TAG_VOCABULARY = (
    "diffusion",
    "advection",
    "advection-nonlinear",
    "reaction",
    "wave",
    "biharmonic",
    "dispersion",
    "forcing",
    "steady",
)

BASELINE_WEIGHTS = {"tags": 0.5, "linearity": 0.2, "order": 0.2, "dims": 0.1}


@dataclass(frozen=True)
class SemanticSummary:
    tags: frozenset[str]
    dimensionality: int
    order: int
    linearity: bool
    forcing_present: bool
    bc_kinds: tuple[tuple[str, int], ...]   # sorted (kind, multiplicity) pairs
    domain_class: str

    def render(self) -> str:
        """Deterministic prose rendering (for embedding providers)."""
        tag_text = ", ".join(sorted(self.tags)) if self.tags else "none"
        bc_text = (
            "; ".join(f"{k} x{n}" for k, n in self.bc_kinds) if self.bc_kinds else "none"
        )
        return (
            f"{'linear' if self.linearity else 'nonlinear'} PDE of order {self.order} "
            f"in {self.dimensionality} spatial dimension(s); operators: {tag_text}; "
            f"forcing: {'present' if self.forcing_present else 'absent'}; "
            f"boundary conditions: {bc_text}; domain: {self.domain_class}"
        )


def _terms(residual: ex.ExprTree):
    return residual.children if residual.kind == ex.KIND_SUM else (residual,)


def _term_parts(term: ex.ExprTree):
    """Non-numeric factors of an additive term."""
    if term.kind == ex.KIND_PROD:
        return [c for c in term.children if c.kind != ex.KIND_NUM]
    return [term]


def _max_space_order(tree: ex.ExprTree) -> int:
    best = tree.order if tree.kind == ex.KIND_SPACE else 0
    for c in tree.children:
        best = max(best, _max_space_order(c))
    return best


def summarize(pde: CanonicalPde) -> SemanticSummary:
    residual = pde.residual
    time_order = ex.max_time_order(residual)
    tags: set[str] = set()
    forcing = False

    for term in _terms(residual):
        if not ex.depends_on_field(term):
            if not (term.kind == ex.KIND_NUM and term.value == 0.0):
                forcing = True
                tags.add("forcing")
            continue
        parts = _term_parts(term)
        space_order = _max_space_order(term)
        field_factors = [p for p in parts if ex.depends_on_field(p)]
        has_first_space = any(
            p.kind == ex.KIND_SPACE and p.order == 1 for p in parts
        )
        if space_order >= 4:
            tags.add("biharmonic")
        elif space_order == 3:
            tags.add("dispersion")
        elif space_order == 2:
            tags.add("wave" if time_order >= 2 else "diffusion")
        elif has_first_space:
            if len(field_factors) > 1:
                tags.add("advection-nonlinear")
            else:
                tags.add("advection")
        elif space_order == 0 and term.kind != ex.KIND_TIME:
            tags.add("reaction")

    if time_order >= 2:
        tags.add("wave")
    if time_order == 0:
        tags.add("steady")

    bc_counts = Counter(bc.kind for bc in pde.boundary_conditions)
    return SemanticSummary(
        tags=frozenset(tags),
        dimensionality=pde.domain.dims,
        order=pde.metadata.order,
        linearity=pde.metadata.linear,
        forcing_present=forcing,
        bc_kinds=tuple(sorted(bc_counts.items())),
        domain_class=pde.domain.geometry,
    )


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


class BaselineSimilarityProvider:
    """Weighted structural agreement; deterministic and dependency-free."""

    def __init__(self, weights: dict | None = None):
        self.weights = dict(BASELINE_WEIGHTS)
        if weights:
            self.weights.update(weights)

    def score(self, s1: SemanticSummary, s2: SemanticSummary) -> float:
        jac = _jaccard(s1.tags, s2.tags)
        lin = s1.linearity == s2.linearity
        order = s1.order == s2.order
        dims = s1.dimensionality == s2.dimensionality
        if jac == 1.0 and lin and order and dims:
            return 1.0  # exact on full agreement regardless of weight rounding
        w = self.weights
        value = w["tags"] * jac + w["linearity"] * lin + w["order"] * order + w["dims"] * dims
        return min(1.0, max(0.0, value))


def sem_score(s1: SemanticSummary, s2: SemanticSummary, provider=None) -> float:
    provider = provider or BaselineSimilarityProvider()
    return provider.score(s1, s2)
