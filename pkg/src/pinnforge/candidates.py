"""PDE agent: sample candidate formulations, validate, select by consensus.

Provider completions carry their final answer in a fenced block containing the
interchange JSON; cleaning is a deterministic extraction of that block.  The
surviving candidates vote through the composite symbolic-semantic score and
the one with the highest average pairwise similarity wins.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from . import expr as ex
from .errors import AllParsesFailed, EmptyCandidateSet, PinnforgeError
from .pde import CanonicalPde, from_dict
from .similarity import sym_score
from .summary import sem_score, summarize

_FENCE_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


def build_formulate_prompt(description: str, k: int, total: int) -> str:
    return (
        "Translate the following task description into a canonical PDE.\n"
        "Reason step by step, then give one line 'Normalized: <one-sentence "
        "restatement>' followed by a fenced json block with keys residual, bc, "
        "ic, domain.\n"
        f"Sample {k + 1} of {total}.\n"
        f"Task:\n{description.strip()}\n"
    )


@dataclass
class RawCandidate:
    trajectory: str
    normalized_description: str
    pde: CanonicalPde | None
    rejection: str | None = None

    def to_dict(self) -> dict:
        return {
            "normalized_description": self.normalized_description,
            "pde": self.pde.to_dict() if self.pde else None,
            "rejection": self.rejection,
        }


@dataclass
class CandidateSet:
    raw: list[RawCandidate]
    alpha: float
    surviving: list[CanonicalPde] = field(default_factory=list)
    surviving_indices: list[int] = field(default_factory=list)
    score_matrix: list[list[float]] = field(default_factory=list)
    chosen_index: int = -1  # index into surviving

    def report(self) -> dict:
        return {
            "alpha": self.alpha,
            "candidates": [c.to_dict() for c in self.raw],
            "surviving_indices": list(self.surviving_indices),
            "score_matrix": [list(row) for row in self.score_matrix],
            "chosen_index": self.chosen_index,
        }


def clean_trajectory(text: str) -> tuple[str, dict | None, str | None]:
    """Extract (normalized description, parsed json block, failure reason)."""
    blocks = _FENCE_RE.findall(text)
    normalized = ""
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.lower().startswith("normalized:"):
            normalized = stripped.split(":", 1)[1].strip()
            break
    if not normalized:
        for line in text.splitlines():
            if line.strip():
                normalized = line.strip()
                break
    if not blocks:
        return normalized, None, "no fenced equation block in trajectory"
    try:
        payload = json.loads(blocks[-1])
    except json.JSONDecodeError as err:
        return normalized, None, f"fenced block is not valid JSON: {err}"
    if not isinstance(payload, dict) or "residual" not in payload:
        return normalized, None, "fenced block lacks a residual field"
    return normalized, payload, None


def formulate_candidates(description: str, k: int, provider) -> list[RawCandidate]:
    if k < 1:
        raise ValueError("K must be >= 1")
    out: list[RawCandidate] = []
    for i in range(k):
        prompt = build_formulate_prompt(description, i, k)
        trajectory = provider.complete(prompt, {"temperature": 0.7})
        normalized, payload, reason = clean_trajectory(trajectory)
        pde = None
        if payload is not None:
            try:
                pde = from_dict(payload)
            except (PinnforgeError, KeyError, TypeError, ValueError) as err:
                reason = f"candidate does not parse: {err}"
        out.append(RawCandidate(trajectory, normalized, pde, reason))
    if all(c.pde is None for c in out):
        reasons = "; ".join(c.rejection or "?" for c in out)
        raise AllParsesFailed(f"no candidate yielded a tree ({reasons})")
    return out


def validate_template(candidate: CanonicalPde) -> str | None:
    """None when valid; otherwise the rejection reason."""
    residual = candidate.residual
    if residual.kind == ex.KIND_NUM and residual.value == 0.0:
        return "empty residual"
    if ex.canonicalize(residual) != residual:
        return "residual not canonical"
    dims = candidate.domain.dims
    for bc in candidate.boundary_conditions:
        if bc.axis < 1 or bc.axis > dims:
            return "axis out of range"
    if ex.max_time_order(residual) >= 1 and candidate.initial_condition is None:
        return "missing initial condition"
    return None


def composite_score(e1: CanonicalPde, e2: CanonicalPde, alpha: float, sim_provider=None) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    sym = sym_score(e1, e2)
    sem = sem_score(summarize(e1), summarize(e2), sim_provider)
    return alpha * sym + (1.0 - alpha) * sem


def score_candidates(
    raw: list[RawCandidate], alpha: float, sim_provider=None
) -> CandidateSet:
    cset = CandidateSet(raw=raw, alpha=alpha)
    for i, cand in enumerate(raw):
        if cand.pde is None:
            continue
        reason = validate_template(cand.pde)
        if reason is not None:
            cand.rejection = reason
            continue
        cset.surviving.append(cand.pde)
        cset.surviving_indices.append(i)
    m = len(cset.surviving)
    matrix = [[1.0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            s = composite_score(cset.surviving[i], cset.surviving[j], alpha, sim_provider)
            matrix[i][j] = s
            matrix[j][i] = s
    cset.score_matrix = matrix
    return cset


def consensus_select(cset: CandidateSet) -> CanonicalPde:
    """Argmax of average pairwise similarity (diagonal excluded, ties -> lowest index)."""
    m = len(cset.surviving)
    if m == 0:
        raise EmptyCandidateSet("no surviving candidates")
    if m == 1:
        cset.chosen_index = 0
        return cset.surviving[0]
    best_idx = 0
    best_avg = -1.0
    for i in range(m):
        avg = sum(cset.score_matrix[i][j] for j in range(m) if j != i) / (m - 1)
        if avg > best_avg:
            best_avg = avg
            best_idx = i
    cset.chosen_index = best_idx
    return cset.surviving[best_idx]
