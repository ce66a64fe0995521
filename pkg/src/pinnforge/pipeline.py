"""Orchestrator: the four-agent pipeline as an explicit state machine.

Formulating -> SelectingArch -> Generating -> Executing -> Scoring ->
{Done | Refining}; Refining re-enters Generating, SelectingArch or
Formulating depending on the directive target.  Entering Generating charges
the global iteration counter; the hard cap bounds every run regardless of
fixture behavior.  Quality refinements after a successful score have their
own smaller budget.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, field

from . import expr as ex
from . import trainer as tr
from .architect import (
    CapabilityRegistry,
    HistoryRecord,
    HistoryStore,
    refine_capability,
    select_architecture,
)
from .candidates import consensus_select, formulate_candidates, score_candidates
from .codegen import MODULE_KINDS, assemble, generate_module
from .config import PipelineConfig
from .errors import (
    AllParsesFailed,
    ConfigInvalid,
    EmptyCandidateSet,
    FixtureMissing,
    PinnforgeError,
    PreconditionFailed,
    ProviderUnavailable,
    ReplayMismatch,
    UnsupportedPde,
)
from .feedback import Decision, Directive, localize_error, refine_decision, score_run
from .providers import MockProvider

PHASES = (
    "formulating",
    "selecting_arch",
    "generating",
    "executing",
    "scoring",
    "refining",
    "done",
    "failed",
)

ALLOWED_TRANSITIONS = {
    ("start", "formulating"),
    ("formulating", "selecting_arch"),
    ("selecting_arch", "generating"),
    ("generating", "executing"),
    ("generating", "refining"),
    ("executing", "scoring"),
    ("executing", "refining"),
    ("scoring", "done"),
    ("scoring", "refining"),
    ("refining", "generating"),
    ("refining", "selecting_arch"),
    ("refining", "formulating"),
    # failure is terminal from any working phase
    ("formulating", "failed"),
    ("selecting_arch", "failed"),
    ("generating", "failed"),
    ("executing", "failed"),
    ("scoring", "failed"),
    ("refining", "failed"),
}

# families the desk trainer realizes directly; others train a stand-in net
_DESK_ACTIVATIONS = {"MLP": "tanh", "Fourier-MLP": "sine"}


@dataclass
class IterationRecord:
    iteration: int
    directive: dict | None = None
    score: dict | None = None
    decision: str | None = None

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "directive": self.directive,
            "score": self.score,
            "decision": self.decision,
        }


@dataclass
class RunReport:
    task_description: str
    config: dict
    seed: int
    candidate_report: dict | None = None
    chosen_pde: dict | None = None
    features: dict | None = None
    architecture: str | None = None
    arch_provenance: str | None = None
    arch_scores: dict = field(default_factory=dict)
    arch_standin: str | None = None
    bundle_manifest: dict | None = None
    iterations: list = field(default_factory=list)
    accepted_scores: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    final_status: str = "failed"
    failure_reason: str | None = None
    iterations_used: int = 0
    refinements_used: int = 0
    hard_cap_hit: bool = False
    trace_sha256: str | None = None
    trace_steps: int = 0
    provider_retries: int | None = None   # live-backend retries, None for mock
    wall_clock_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "task_description": self.task_description,
            "config": self.config,
            "seed": self.seed,
            "candidate_report": self.candidate_report,
            "chosen_pde": self.chosen_pde,
            "features": self.features,
            "architecture": self.architecture,
            "arch_provenance": self.arch_provenance,
            "arch_scores": self.arch_scores,
            "arch_standin": self.arch_standin,
            "bundle_manifest": self.bundle_manifest,
            "iterations": [
                i.to_dict() if isinstance(i, IterationRecord) else i for i in self.iterations
            ],
            "accepted_scores": self.accepted_scores,
            "transitions": self.transitions,
            "final_status": self.final_status,
            "failure_reason": self.failure_reason,
            "iterations_used": self.iterations_used,
            "refinements_used": self.refinements_used,
            "hard_cap_hit": self.hard_cap_hit,
            "trace_sha256": self.trace_sha256,
            "trace_steps": self.trace_steps,
            "provider_retries": self.provider_retries,
            "wall_clock_seconds": self.wall_clock_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def comparable_json(self) -> str:
        """Serialization with wall-clock removed (replay comparison)."""
        d = self.to_dict()
        d.pop("wall_clock_seconds", None)
        return json.dumps(d, sort_keys=True)


class Pipeline:
    """One instance processes one task; instances share nothing but the history file."""

    def __init__(self, config: PipelineConfig, provider, sim_provider=None):
        if not isinstance(config, PipelineConfig):
            raise ConfigInvalid("config must be a PipelineConfig")
        if config.code_agent.target != "builtin":
            raise ConfigInvalid(
                "run_pipeline executes builtin bundles only; external-runtime "
                "bundles go through `generate` and the pinn-runtime CLI"
            )
        self.config = config
        # the run-level seed is authoritative for the trainer
        self.trainer_cfg = dataclasses.replace(config.trainer, seed=config.seed)
        self.provider = provider
        self.sim_provider = sim_provider
        self.registry = (
            CapabilityRegistry.from_json_file(config.pinn_agent.capability_registry_path)
            if config.pinn_agent.capability_registry_path
            else CapabilityRegistry()
        )
        self.history = (
            HistoryStore(config.pinn_agent.history_path)
            if config.pinn_agent.history_path
            else None
        )
        self.last_result: tr.TrainResult | None = None
        self.last_bundle = None

    def run(self, description: str) -> RunReport:
        started = time.time()
        cfg = self.config
        report = RunReport(task_description=description, config=cfg.to_dict(), seed=cfg.seed)

        phase = "start"

        def goto(next_phase: str):
            nonlocal phase
            if (phase, next_phase) not in ALLOWED_TRANSITIONS:
                raise PinnforgeError(f"illegal phase transition {(phase, next_phase)}")
            report.transitions.append([phase, next_phase])
            phase = next_phase

        def fail(reason: str) -> RunReport:
            goto("failed")
            report.final_status = "failed"
            report.failure_reason = reason
            report.wall_clock_seconds = time.time() - started
            return report

        chosen = None
        selection = None
        context: dict = {}
        modules: dict = {}
        regenerate: set[str] = set(MODULE_KINDS)
        directive: Directive | None = None
        best_score: float | None = None
        best_bundle = None
        iteration = 0
        refinements = 0
        record: IterationRecord | None = None

        goto("formulating")
        while True:
            if phase == "formulating":
                try:
                    raw = formulate_candidates(description, cfg.pde_agent.k, self.provider)
                except (AllParsesFailed, FixtureMissing, ProviderUnavailable) as err:
                    return fail(f"formulation failed: {err}")
                cset = score_candidates(raw, cfg.pde_agent.alpha, self.sim_provider)
                report.candidate_report = cset.report()
                try:
                    chosen = consensus_select(cset)
                except EmptyCandidateSet as err:
                    return fail(f"no valid candidate: {err}")
                report.candidate_report = cset.report()
                report.chosen_pde = chosen.to_dict()
                goto("selecting_arch")

            elif phase == "selecting_arch":
                history = self.history.load() if self.history else []
                selection = select_architecture(
                    chosen,
                    registry=self.registry,
                    weights=cfg.pinn_agent.match_weights(),
                    history=history,
                    reuse_threshold=cfg.pinn_agent.reuse_threshold,
                    alpha=cfg.pde_agent.alpha,
                    coeffs=cfg.pinn_agent.coefficients(),
                )
                report.features = {
                    "f_per": selection.features.f_per,
                    "f_geo": selection.features.f_geo,
                    "f_ms": selection.features.f_ms,
                }
                report.architecture = selection.architecture
                report.arch_provenance = selection.provenance
                report.arch_scores = dict(selection.scores)
                if selection.architecture not in _DESK_ACTIVATIONS:
                    report.arch_standin = (
                        f"{selection.architecture} not desk-trainable; "
                        "training a fully-connected stand-in"
                    )
                context = self._build_context(chosen, selection.architecture)
                modules = {}
                regenerate = set(MODULE_KINDS)
                goto("generating")

            elif phase == "generating":
                iteration += 1
                report.iterations_used = iteration
                record = IterationRecord(iteration)
                report.iterations.append(record)
                reason = directive.reason if directive else None
                directive = None
                try:
                    for kind in MODULE_KINDS:
                        if kind in regenerate:
                            modules[kind] = self._generate_kind(kind, context, reason)
                except (FixtureMissing, ProviderUnavailable) as err:
                    return fail(f"module generation failed: {err}")
                try:
                    bundle = assemble(
                        list(modules.values()),
                        chosen,
                        selection.architecture,
                        context["net"],
                        context["train_cfg"],
                        target=cfg.code_agent.target,
                    )
                except (PreconditionFailed, PinnforgeError) as err:
                    directive = localize_error(str(err))
                    record.directive = directive.to_dict()
                    goto("refining")
                    continue
                report.bundle_manifest = bundle.manifest()
                self.last_bundle = bundle
                goto("executing")

            elif phase == "executing":
                diagnostic = None
                try:
                    result = tr.train(bundle, cfg=self.trainer_cfg)
                except UnsupportedPde as err:
                    diagnostic = str(err)
                except PinnforgeError as err:
                    diagnostic = str(err)
                else:
                    if result.trace.diverged:
                        diagnostic = (
                            f"non-finite loss encountered at step {result.trace.diverged_at}"
                        )
                if diagnostic is not None:
                    directive = localize_error(diagnostic)
                    record.directive = directive.to_dict()
                    goto("refining")
                    continue
                self.last_result = result
                trace_bytes = result.trace.to_jsonl().encode("utf-8")
                report.trace_sha256 = hashlib.sha256(trace_bytes).hexdigest()
                report.trace_steps = len(result.trace.records)
                goto("scoring")

            elif phase == "scoring":
                mse = result.trace.final_mse
                if mse is None:
                    plan = tr.classify_family(bundle.pde)
                    data = tr._sample_problem(bundle.pde, plan, self.trainer_cfg)
                    mse = tr.residual_mse(result.params, data, result.net, self.trainer_cfg)
                quality = score_run(
                    result.trace,
                    mse,
                    result.net.param_count,
                    tau=cfg.feedback.tau,
                    t_min=1.0,
                    t_max=float(cfg.trainer.steps),
                    eps=cfg.feedback.eps,
                    kappa=cfg.feedback.kappa,
                    alpha_rob=cfg.feedback.alpha_rob,
                    weights=cfg.feedback.weights,
                    max_params=cfg.feedback.max_params,
                )
                record.score = quality.to_dict()
                decision = refine_decision(quality.overall, best_score)
                record.decision = decision.value
                if decision is Decision.ACCEPT:
                    best_score = quality.overall
                    best_bundle = bundle
                    report.accepted_scores.append(quality.overall)
                else:
                    # revert: restore the best accepted program before continuing
                    bundle = best_bundle
                    modules = dict(best_bundle.modules)
                    self.last_bundle = best_bundle
                if (
                    best_score is not None
                    and best_score < cfg.caps.refine_below_score
                    and refinements < cfg.caps.max_refinements
                ):
                    refinements += 1
                    report.refinements_used = refinements
                    directive = Directive(
                        "training_loop", "quality below refinement threshold", "quality-refine"
                    )
                    record.directive = directive.to_dict()
                    goto("refining")
                    continue
                goto("done")

            elif phase == "refining":
                if iteration >= cfg.caps.hard_cap:
                    report.hard_cap_hit = True
                    return fail(f"hard cap of {cfg.caps.hard_cap} iterations reached")
                assert directive is not None
                if directive.target == "pde-agent":
                    goto("formulating")
                elif directive.target == "pinn-agent":
                    goto("selecting_arch")
                else:
                    regenerate = {directive.target} & set(MODULE_KINDS) or set(MODULE_KINDS)
                    goto("generating")

            elif phase == "done":
                report.final_status = "done"
                report.provider_retries = getattr(self.provider, "last_retry_count", None)
                if self.history is not None and best_score is not None:
                    self.history.append(
                        HistoryRecord(chosen.to_dict(), selection.architecture, best_score)
                    )
                if cfg.pinn_agent.ema_refinement and best_score is not None:
                    refine_capability(
                        self.registry, selection.architecture, best_score, cfg.pinn_agent.ema_rate
                    )
                report.wall_clock_seconds = time.time() - started
                return report

            else:  # pragma: no cover - loop exits via fail()/done
                raise PinnforgeError(f"unexpected phase {phase}")

    def _build_context(self, chosen, architecture: str) -> dict:
        cfg = self.config
        activation = _DESK_ACTIVATIONS.get(architecture)
        net = dict(cfg.net.to_dict())
        if activation is not None:
            net["activation"] = activation
        return {
            "residual": ex.to_prefix(chosen.residual),
            "architecture": architecture,
            "net": net,
            "train_cfg": self.trainer_cfg.to_dict(),
            "domain": chosen.domain.to_dict(),
            "reference_solution": None,
        }

    def _generate_kind(self, kind: str, context: dict, directive_reason: str | None):
        cfg = self.config
        provider = self.provider if kind in cfg.code_agent.provider_kinds else None
        return generate_module(
            kind,
            context,
            target=cfg.code_agent.target,
            provider=provider,
            directive_reason=directive_reason,
        )


def run_pipeline(description: str, config: PipelineConfig, provider, sim_provider=None) -> RunReport:
    return Pipeline(config, provider, sim_provider).run(description)


def replay(report: RunReport | dict, fixtures_dir=None, table: dict | None = None) -> RunReport:
    """Re-run from a report's config and seed; must reproduce it byte-for-byte."""
    original = report if isinstance(report, dict) else report.to_dict()
    config = PipelineConfig.from_dict(original["config"])
    provider = MockProvider(fixtures_dir=fixtures_dir, table=table)
    rerun = Pipeline(config, provider).run(original["task_description"])
    baseline = dict(original)
    baseline.pop("wall_clock_seconds", None)
    fresh = rerun.to_dict()
    fresh.pop("wall_clock_seconds", None)
    if json.dumps(baseline, sort_keys=True) != json.dumps(fresh, sort_keys=True):
        for key in sorted(set(baseline) | set(fresh)):
            if json.dumps(baseline.get(key), sort_keys=True, default=str) != json.dumps(
                fresh.get(key), sort_keys=True, default=str
            ):
                raise ReplayMismatch(f"replay diverged at field {key!r}")
        raise ReplayMismatch("replay diverged")
    return rerun
