"""Pipeline configuration: JSON sections with validated defaults."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .architect import FeatureCoefficients, MatchWeights
from .errors import ConfigInvalid
from .trainer import TrainConfig


@dataclass(frozen=True)
class PdeAgentConfig:
    k: int = 5
    alpha: float = 0.6

    def __post_init__(self):
        if self.k < 1:
            raise ConfigInvalid("pde_agent.k must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigInvalid("pde_agent.alpha must lie in [0, 1]")


@dataclass(frozen=True)
class PinnAgentConfig:
    weights: tuple[float, float, float] = (1.0, 2.0, 3.0)
    reuse_threshold: float = 0.95
    feature_coefficients: dict = field(default_factory=dict)
    history_path: str | None = None
    capability_registry_path: str | None = None
    ema_refinement: bool = False
    ema_rate: float = 0.2

    def match_weights(self) -> MatchWeights:
        try:
            return MatchWeights(*self.weights)
        except ValueError as err:
            raise ConfigInvalid(str(err)) from err

    def coefficients(self) -> FeatureCoefficients:
        try:
            return FeatureCoefficients(**self.feature_coefficients)
        except TypeError as err:
            raise ConfigInvalid(f"bad feature coefficient name: {err}") from err


@dataclass(frozen=True)
class FeedbackConfig:
    tau: float = 1e-3
    eps: float = 1e-8
    kappa: float = 1e2
    alpha_rob: float = 0.5
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    max_params: int = 100_000

    def __post_init__(self):
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ConfigInvalid("feedback.weights must be nonnegative and sum to 1")
        if not 0.0 <= self.alpha_rob <= 1.0:
            raise ConfigInvalid("feedback.alpha_rob must lie in [0, 1]")


@dataclass(frozen=True)
class CapsConfig:
    max_refinements: int = 3
    hard_cap: int = 50
    refine_below_score: float = 0.0   # quality refinement off unless raised

    def __post_init__(self):
        if self.max_refinements < 0 or self.hard_cap < 1:
            raise ConfigInvalid("caps must be nonnegative (hard_cap >= 1)")


@dataclass(frozen=True)
class CodeAgentConfig:
    target: str = "builtin"
    provider_kinds: tuple[str, ...] = ()

    def __post_init__(self):
        if self.target not in ("builtin", "external-runtime"):
            raise ConfigInvalid(f"unknown code target {self.target!r}")


@dataclass(frozen=True)
class NetConfig:
    depth: int = 3
    width: int = 32
    activation: str = "tanh"

    def to_dict(self) -> dict:
        return {"depth": self.depth, "width": self.width, "activation": self.activation}


@dataclass(frozen=True)
class PipelineConfig:
    pde_agent: PdeAgentConfig = PdeAgentConfig()
    pinn_agent: PinnAgentConfig = PinnAgentConfig()
    trainer: TrainConfig = TrainConfig()
    feedback: FeedbackConfig = FeedbackConfig()
    caps: CapsConfig = CapsConfig()
    code_agent: CodeAgentConfig = CodeAgentConfig()
    net: NetConfig = NetConfig()
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trainer"] = self.trainer.to_dict()
        return d

    @staticmethod
    def from_dict(data: dict) -> "PipelineConfig":

        def tupled(raw, key):
            if key in raw and isinstance(raw[key], list):
                raw[key] = tuple(raw[key])
            return raw

        pde_raw = dict(data.get("pde_agent") or {})
        pinn_raw = tupled(dict(data.get("pinn_agent") or {}), "weights")
        pinn_raw = tupled(pinn_raw, "provider_kinds")
        feed_raw = tupled(dict(data.get("feedback") or {}), "weights")
        code_raw = tupled(dict(data.get("code_agent") or {}), "provider_kinds")
        try:
            return PipelineConfig(
                pde_agent=PdeAgentConfig(**pde_raw),
                pinn_agent=PinnAgentConfig(**pinn_raw),
                trainer=TrainConfig.from_dict(dict(data.get("trainer") or {})),
                feedback=FeedbackConfig(**feed_raw),
                caps=CapsConfig(**dict(data.get("caps") or {})),
                code_agent=CodeAgentConfig(**code_raw),
                net=NetConfig(**dict(data.get("net") or {})),
                seed=int(data.get("seed", 0)),
            )
        except (TypeError, ValueError) as err:
            raise ConfigInvalid(str(err)) from err

    @staticmethod
    def from_json_file(path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigInvalid(f"cannot read config {path}: {err}") from err
        return PipelineConfig.from_dict(data)
