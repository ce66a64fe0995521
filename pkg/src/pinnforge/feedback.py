"""Feedback agent: quality metrics, error localization, accept/revert decisions.

All four metrics normalize into [0,1] and combine linearly into the overall
score; error localization is a first-match walk over an ordered signature
table that always yields exactly one directive.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateTrace, WeightsInvalid
from .trainer import LossTrace

DEFAULT_TAU = 1e-3
DEFAULT_EPS = 1e-8
DEFAULT_KAPPA = 1e2
DEFAULT_ALPHA_ROB = 0.5
DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
DEFAULT_MAX_PARAMS = 100_000


@dataclass(frozen=True)
class QualityScore:
    m_conv: float
    m_acc: float
    m_comp: float
    m_rob: float
    weights: tuple[float, float, float, float]
    overall: float
    raw: dict

    def to_dict(self) -> dict:
        return {
            "m_conv": self.m_conv,
            "m_acc": self.m_acc,
            "m_comp": self.m_comp,
            "m_rob": self.m_rob,
            "weights": list(self.weights),
            "overall": self.overall,
            "raw": dict(self.raw),
        }


def convergence_metric(trace: LossTrace, tau: float, t_min: float, t_max: float) -> float:
    """(T_max - T_conv)/(T_max - T_min), clamped; T_conv = first step under tau."""
    if not t_min < t_max:
        raise ValueError("t_min must be below t_max")
    t_conv = t_max
    for record in trace.records:
        if record.loss <= tau:
            t_conv = record.t
            break
    return min(1.0, max(0.0, (t_max - t_conv) / (t_max - t_min)))


def convergence_time(trace: LossTrace, tau: float, t_max: float) -> float:
    for record in trace.records:
        if record.loss <= tau:
            return record.t
    return t_max


def raw_convergence_rate(trace: LossTrace, tau: float, t_max: float) -> float:
    """1/T_conv; reported for reference, never part of the overall score."""
    return 1.0 / convergence_time(trace, tau, t_max)


def accuracy_metric(mse: float) -> tuple[float, float]:
    """Returns (raw m_acc = -mse, normalized 1/(1+mse))."""
    if not math.isfinite(mse):
        raise ValueError("mse must be finite")
    return -mse, 1.0 / (1.0 + mse)


def complexity_metric(params: int, max_params: int) -> tuple[float, float]:
    """Returns (raw ratio, inverted normalization 1 - ratio)."""
    if not 0 < params <= max_params:
        raise ValueError("need 0 < params <= max_params")
    ratio = params / max_params
    return ratio, 1.0 - ratio


def robustness_metric(
    trace: LossTrace,
    d: int,
    eps: float = DEFAULT_EPS,
    kappa: float = DEFAULT_KAPPA,
    alpha_rob: float = DEFAULT_ALPHA_ROB,
) -> tuple[float, float, float]:
    """Returns (m_smooth, m_grad, combined m_rob)."""
    losses = trace.losses()
    if len(losses) < 2:
        raise DegenerateTrace("robustness needs at least 2 recorded steps")
    mean_loss = float(np.mean(losses))
    if mean_loss <= 0.0:
        raise DegenerateTrace("robustness needs a positive mean loss")
    deltas = np.diff(losses)
    std = float(np.std(deltas))  # population std
    m_smooth = min(1.0, max(0.0, 1.0 - std / mean_loss))
    normalized_grad = trace.records[-1].grad_norm / d
    m_grad = 1.0 if eps <= normalized_grad <= kappa else 0.0
    return m_smooth, m_grad, alpha_rob * m_smooth + (1.0 - alpha_rob) * m_grad


def overall_score(metrics, weights=DEFAULT_WEIGHTS) -> float:
    if len(weights) != len(metrics):
        raise WeightsInvalid("one weight per metric required")
    if any(w < 0 for w in weights):
        raise WeightsInvalid("weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise WeightsInvalid(f"weights must sum to 1, got {sum(weights)}")
    return float(sum(w * m for w, m in zip(weights, metrics)))


def score_run(
    trace: LossTrace,
    mse: float,
    param_count: int,
    *,
    tau: float = DEFAULT_TAU,
    t_min: float = 1.0,
    t_max: float | None = None,
    eps: float = DEFAULT_EPS,
    kappa: float = DEFAULT_KAPPA,
    alpha_rob: float = DEFAULT_ALPHA_ROB,
    weights=DEFAULT_WEIGHTS,
    max_params: int = DEFAULT_MAX_PARAMS,
) -> QualityScore:
    if t_max is None:
        t_max = float(len(trace.records))
    t_conv = convergence_time(trace, tau, t_max)
    m_conv = convergence_metric(trace, tau, t_min, t_max)
    _, m_acc = accuracy_metric(mse)
    _, m_comp = complexity_metric(param_count, max_params)
    m_smooth, m_grad, m_rob = robustness_metric(trace, param_count, eps, kappa, alpha_rob)
    overall = overall_score((m_conv, m_acc, m_comp, m_rob), weights)
    return QualityScore(
        m_conv=m_conv,
        m_acc=m_acc,
        m_comp=m_comp,
        m_rob=m_rob,
        weights=tuple(weights),
        overall=overall,
        raw={
            "t_conv": t_conv,
            "mse": mse,
            "param_count": param_count,
            "m_smooth": m_smooth,
            "m_grad": m_grad,
            "raw_conv_rate": raw_convergence_rate(trace, tau, t_max),
        },
    )


# ---------------------------------------------------------------------------
# error localization
# ---------------------------------------------------------------------------

MODULE_TARGETS = ("model", "pde_loss", "preprocessing", "training_loop", "validation", "main")
AGENT_TARGETS = ("pde-agent", "pinn-agent")


@dataclass(frozen=True)
class Directive:
    target: str            # module kind or upstream agent
    reason: str
    signature: str         # matched signature id

    def to_dict(self) -> dict:
        return {"target": self.target, "reason": self.reason, "signature": self.signature}


# ordered first-match signature table: (id, pattern, target)
SIGNATURE_TABLE = (
    ("unsupported-family", r"unsupported pde family", "pinn-agent"),
    ("unparseable-residual", r"unparseable residual", "pde-agent"),
    (
        "shape-mismatch",
        r"shape mismatch|shapes cannot be multiplied|dimension mismatch|size mismatch|mat1 and mat2",
        "model",
    ),
    (
        "undefined-symbol",
        r"undefined (?:derivative|residual|symbol)|name '[^']*' is not defined"
        r"|loss verification failed|residual mismatch",
        "pde_loss",
    ),
    (
        "io-failure",
        r"no such file or directory|filenotfounderror|\[errno \d+\]|i/o error|permission denied",
        "preprocessing",
    ),
    (
        "nonfinite-loss",
        r"non-?finite loss|nan loss|loss (?:is|became) nan|optimizer fault|diverged",
        "training_loop",
    ),
    (
        "metric-fault",
        r"metric computation|invalid metric|mse computation failed|evaluation failed",
        "validation",
    ),
    (
        "entry-point-fault",
        r"unrecognized arguments|missing required argument|usage:|entry point|argument fault",
        "main",
    ),
)


def localize_error(error_text: str) -> Directive:
    """Total: every diagnostic yields exactly one directive (fallback: main)."""
    lowered = error_text.lower()
    for sig_id, pattern, target in SIGNATURE_TABLE:
        if re.search(pattern, lowered):
            return Directive(target, error_text.strip()[:400], sig_id)
    return Directive("main", "unclassified", "unclassified")


class Decision(Enum):
    ACCEPT = "accept"
    REVERT = "revert"


def refine_decision(score: float, previous: float | None) -> Decision:
    """Accept on first iteration or strict improvement; ties revert."""
    if not math.isfinite(score):
        raise ValueError("score must be finite")
    if previous is None or score > previous:
        return Decision.ACCEPT
    return Decision.REVERT
