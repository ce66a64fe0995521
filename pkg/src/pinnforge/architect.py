"""Architecture selection: feature extraction, capability matching, history reuse.

Features live in [0,1]^3 (periodicity, geometry complexity, multi-scale
demand); capabilities in [0.1, 0.9]^3.  Matching is the weighted cosine of the
two vectors and the pick is the registry argmax, unless a sufficiently similar
equation in the history cache short-circuits the search.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .candidates import composite_score
from .errors import DegenerateVector, UnknownArchitecture
from .pde import CanonicalPde, from_dict

GEOMETRY_IRREGULARITY = {
    "rectilinear": 0.0,
    "curved": 0.3,
    "multi-component": 0.6,
    "highly-irregular": 0.9,
}
DISCRETIZATION_IRREGULARITY = {
    "cartesian": 0.0,
    "curvilinear": 0.5,
    "unstructured": 0.8,
}

# published capability table; order is the tie-break order
DEFAULT_CAPABILITIES = (
    ("Fourier-MLP", 0.9, 0.2, 0.5),
    ("GNN", 0.1, 0.8, 0.5),
    ("Transformer", 0.2, 0.5, 0.7),
    ("CNN", 0.2, 0.4, 0.3),
    ("MLP", 0.1, 0.2, 0.4),
)


@dataclass(frozen=True)
class PdeFeatures:
    f_per: float
    f_geo: float
    f_ms: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f_per, self.f_geo, self.f_ms], dtype=float)


@dataclass(frozen=True)
class ArchCapability:
    name: str
    a_per: float
    a_geo: float
    a_ms: float

    def __post_init__(self):
        for v in (self.a_per, self.a_geo, self.a_ms):
            if not 0.1 <= v <= 0.9:
                raise ValueError(f"capability component {v} outside [0.1, 0.9]")

    def as_array(self) -> np.ndarray:
        return np.array([self.a_per, self.a_geo, self.a_ms], dtype=float)


@dataclass(frozen=True)
class MatchWeights:
    w_per: float = 1.0
    w_geo: float = 2.0
    w_ms: float = 3.0

    def __post_init__(self):
        if min(self.w_per, self.w_geo, self.w_ms) <= 0:
            raise ValueError("match weights must be strictly positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.w_per, self.w_geo, self.w_ms], dtype=float)


@dataclass(frozen=True)
class FeatureCoefficients:
    """Knobs of the multi-scale sigmoid and the geometry mix."""

    lambda_geom: float = 0.5
    lambda_disc: float = 0.5
    order_weight: float = 2.0      # on 1{order >= 3}
    nonlinear_weight: float = 2.0  # on 1{nonlinear}
    number_weight: float = 1.0     # on log(1 + Re/Pe)
    nonlocal_weight: float = 2.0   # on 1{nonlocal}
    attenuation: float = 0.5       # eta


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def extract_features(pde: CanonicalPde, coeffs: FeatureCoefficients | None = None) -> PdeFeatures:
    coeffs = coeffs or FeatureCoefficients()
    dom = pde.domain
    meta = pde.metadata

    f_per = len(dom.periodic_axes) / dom.dims

    c_geom = GEOMETRY_IRREGULARITY[dom.geometry]
    c_disc = DISCRETIZATION_IRREGULARITY[dom.discretization]
    f_geo = min(1.0, max(0.0, coeffs.lambda_geom * c_geom + coeffs.lambda_disc * c_disc))

    number = max(meta.reynolds or 0.0, meta.peclet or 0.0)
    arg = (
        coeffs.order_weight * (meta.order >= 3)
        + coeffs.nonlinear_weight * (not meta.linear)
        + coeffs.number_weight * math.log1p(number)
        + coeffs.nonlocal_weight * meta.nonlocal_terms
    )
    f_ms = _sigmoid(arg) * coeffs.attenuation
    return PdeFeatures(f_per, f_geo, f_ms)


class CapabilityRegistry:
    """Ordered architecture -> capability table; extensible, JSON-overridable."""

    def __init__(self, entries=DEFAULT_CAPABILITIES):
        self._entries: dict[str, ArchCapability] = {}
        for name, a_per, a_geo, a_ms in entries:
            self._entries[name] = ArchCapability(name, a_per, a_geo, a_ms)

    def names(self) -> list[str]:
        return list(self._entries)

    def capability_of(self, arch: str) -> ArchCapability:
        if arch not in self._entries:
            raise UnknownArchitecture(arch)
        return self._entries[arch]

    def register(self, cap: ArchCapability):
        self._entries[cap.name] = cap

    @staticmethod
    def from_json_file(path) -> "CapabilityRegistry":
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)
        return CapabilityRegistry(
            [(r["name"], r["a_per"], r["a_geo"], r["a_ms"]) for r in rows]
        )


def capability_of(arch: str, registry: CapabilityRegistry | None = None) -> ArchCapability:
    return (registry or CapabilityRegistry()).capability_of(arch)


def match_score(phi: PdeFeatures, psi: ArchCapability, weights: MatchWeights) -> float:
    weighted = weights.as_array() * phi.as_array()
    cap = psi.as_array()
    n1 = float(np.linalg.norm(weighted))
    n2 = float(np.linalg.norm(cap))
    if n1 == 0.0 or n2 == 0.0:
        raise DegenerateVector("zero-norm vector in match_score")
    return float(weighted @ cap / (n1 * n2))


@dataclass
class HistoryRecord:
    pde: dict                # canonical serialization
    architecture: str
    score: float
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError("history score must be finite")

    def to_json(self) -> str:
        return json.dumps(
            {
                "pde": self.pde,
                "architecture": self.architecture,
                "score": self.score,
                "timestamp": self.timestamp,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(line: str) -> "HistoryRecord":
        d = json.loads(line)
        return HistoryRecord(d["pde"], d["architecture"], d["score"], d["timestamp"])


class HistoryStore:
    """JSONL cache of past runs; appends take an exclusive advisory lock."""

    def __init__(self, path):
        from pathlib import Path

        self.path = Path(path)

    def append(self, record: HistoryRecord):
        from filelock import FileLock

        self.path.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(str(self.path) + ".lock"):
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(record.to_json() + "\n")

    def load(self) -> list[HistoryRecord]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(HistoryRecord.from_json(line))
        return records


@dataclass
class Selection:
    architecture: str
    provenance: str            # "reused" | "matched"
    scores: dict[str, float]   # per-registry match scores (empty when reused)
    features: PdeFeatures
    reused_from_score: float | None = None


def select_architecture(
    pde: CanonicalPde,
    registry: CapabilityRegistry | None = None,
    weights: MatchWeights | None = None,
    history: list[HistoryRecord] | None = None,
    reuse_threshold: float = 0.95,
    alpha: float = 0.6,
    coeffs: FeatureCoefficients | None = None,
) -> Selection:
    registry = registry or CapabilityRegistry()
    weights = weights or MatchWeights()
    if not registry.names():
        raise UnknownArchitecture("registry is empty")
    features = extract_features(pde, coeffs)

    for record in reversed(history or []):  # most recent match wins
        past = from_dict(record.pde)
        similarity = composite_score(pde, past, alpha)
        if similarity >= reuse_threshold:
            return Selection(record.architecture, "reused", {}, features, similarity)

    scores = {
        name: match_score(features, registry.capability_of(name), weights)
        for name in registry.names()
    }
    best = max(registry.names(), key=lambda n: scores[n])  # stable: registry order breaks ties
    return Selection(best, "matched", scores, features)


def refine_capability(
    registry: CapabilityRegistry, arch: str, quality_score: float, rate: float = 0.2
) -> ArchCapability:
    """EMA update of a capability vector from a realized quality score."""
    cap = registry.capability_of(arch)
    blend = lambda a: min(0.9, max(0.1, (1 - rate) * a + rate * quality_score))  # noqa: E731
    updated = ArchCapability(arch, blend(cap.a_per), blend(cap.a_geo), blend(cap.a_ms))
    registry.register(updated)
    return updated
