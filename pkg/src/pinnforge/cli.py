"""Command-line surface for the pipeline and its individual agents."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import expr as ex
from . import trainer as tr
from .architect import CapabilityRegistry, HistoryStore, select_architecture
from .bench import evaluate, load_dataset, report_csv
from .candidates import consensus_select, formulate_candidates, score_candidates
from .codegen import MODULE_KINDS, assemble, generate_module
from .config import PipelineConfig
from .errors import PinnforgeError
from .feedback import score_run
from .pde import from_json as pde_from_json
from .pipeline import Pipeline, replay
from .providers import HttpProvider, MockProvider


def _load_config(args) -> PipelineConfig:
    config = (
        PipelineConfig.from_json_file(args.config) if args.config else PipelineConfig()
    )
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def _provider(args):
    if args.provider == "mock":
        return MockProvider(fixtures_dir=args.fixtures)
    return HttpProvider()


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")
    print(path)


def cmd_formulate(args) -> int:
    if args.check_expr is not None:
        try:
            tree = ex.canonicalize(
                ex.from_prefix(args.check_expr)
                if args.check_expr.lstrip().startswith("(")
                else ex.parse(args.check_expr)
            )
        except PinnforgeError as err:
            print(f"invalid expression: {err}", file=sys.stderr)
            return 1
        print(ex.to_prefix(tree))
        return 0
    config = _load_config(args)
    description = Path(args.desc_file).read_text(encoding="utf-8")
    raw = formulate_candidates(description, config.pde_agent.k, _provider(args))
    cset = score_candidates(raw, config.pde_agent.alpha)
    chosen = consensus_select(cset)
    out = _out_dir(args)
    _write(out / "candidates.json", json.dumps(cset.report(), indent=2, sort_keys=True))
    _write(out / "pde.json", chosen.to_json())
    return 0


def cmd_select_arch(args) -> int:
    config = _load_config(args)
    pde = pde_from_json(Path(args.pde_file).read_text(encoding="utf-8"))
    registry = (
        CapabilityRegistry.from_json_file(config.pinn_agent.capability_registry_path)
        if config.pinn_agent.capability_registry_path
        else CapabilityRegistry()
    )
    history = (
        HistoryStore(config.pinn_agent.history_path).load()
        if config.pinn_agent.history_path
        else []
    )
    selection = select_architecture(
        pde,
        registry=registry,
        weights=config.pinn_agent.match_weights(),
        history=history,
        reuse_threshold=config.pinn_agent.reuse_threshold,
        alpha=config.pde_agent.alpha,
        coeffs=config.pinn_agent.coefficients(),
    )
    print(
        json.dumps(
            {
                "architecture": selection.architecture,
                "provenance": selection.provenance,
                "scores": selection.scores,
                "features": dataclasses.asdict(selection.features),
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def cmd_generate(args) -> int:
    config = _load_config(args)
    pde = pde_from_json(Path(args.pde_file).read_text(encoding="utf-8"))
    trainer_cfg = dataclasses.replace(config.trainer, seed=config.seed)
    context = {
        "residual": ex.to_prefix(pde.residual),
        "architecture": args.arch,
        "net": config.net.to_dict(),
        "train_cfg": trainer_cfg.to_dict(),
        "domain": pde.domain.to_dict(),
        "reference_solution": args.reference,
    }
    modules = [
        generate_module(kind, context, target=args.target) for kind in MODULE_KINDS
    ]
    bundle = assemble(
        modules,
        pde,
        args.arch,
        context["net"],
        context["train_cfg"],
        target=args.target,
        reference_solution=args.reference,
    )
    out = bundle.write(_out_dir(args) / "bundle")
    print(out)
    return 0


def cmd_run(args) -> int:
    config = _load_config(args)
    description = Path(args.desc_file).read_text(encoding="utf-8")
    pipeline = Pipeline(config, _provider(args))
    report = pipeline.run(description)
    out = _out_dir(args)
    _write(out / "report.json", report.to_json())
    if pipeline.last_result is not None:
        _write(out / "trace.jsonl", pipeline.last_result.trace.to_jsonl())
    print(f"status: {report.final_status}")
    return 0 if report.final_status == "done" else 2


def cmd_score_trace(args) -> int:
    config = _load_config(args)
    text = Path(args.trace_file).read_text(encoding="utf-8")
    problems = tr.validate_trace_text(text)
    if problems:
        for p in problems:
            print(f"invalid trace: {p}", file=sys.stderr)
        return 1
    trace = tr.LossTrace.from_jsonl(text)
    fb = config.feedback
    quality = score_run(
        trace,
        mse=args.mse if args.mse is not None else trace.records[-1].loss,
        param_count=args.param_count,
        tau=fb.tau,
        t_min=1.0,
        t_max=float(len(trace.records)),
        eps=fb.eps,
        kappa=fb.kappa,
        alpha_rob=fb.alpha_rob,
        weights=fb.weights,
        max_params=fb.max_params,
    )
    print(json.dumps(quality.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    config = _load_config(args)
    samples = load_dataset(args.dataset)
    report = evaluate(samples, config, _provider(args))
    out = _out_dir(args)
    _write(out / "bench_report.json", json.dumps(report, indent=2, sort_keys=True))
    _write(out / "bench_report.csv", report_csv(report))
    return 0


def cmd_replay(args) -> int:
    original = json.loads(Path(args.report_file).read_text(encoding="utf-8"))
    rerun = replay(original, fixtures_dir=args.fixtures)
    print(f"replay ok: {rerun.final_status}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinnforge",
        description="Natural-language PDE tasks to scored PINN training programs.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--provider", choices=("mock", "http"), default="mock")
    parser.add_argument("--fixtures", help="fixture directory for the mock provider")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", help="output directory (default: cwd)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("formulate", help="run the PDE agent on a task description")
    p.add_argument("desc_file", nargs="?", help="file with the task description")
    p.add_argument(
        "--check-expr",
        help="validation mode: parse/canonicalize one expression and exit",
    )
    p.set_defaults(func=cmd_formulate)

    p = sub.add_parser("select-arch", help="pick an architecture for a PDE")
    p.add_argument("pde_file")
    p.set_defaults(func=cmd_select_arch)

    p = sub.add_parser("generate", help="generate and assemble a program bundle")
    p.add_argument("pde_file")
    p.add_argument("arch")
    p.add_argument("--target", choices=("builtin", "external-runtime"), default="builtin")
    p.add_argument("--reference", help="prefix expression of the exact solution")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="full pipeline on a task description")
    p.add_argument("desc_file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score-trace", help="quality-score a loss trace")
    p.add_argument("trace_file")
    p.add_argument("--param-count", type=int, required=True)
    p.add_argument("--mse", type=float, default=None)
    p.set_defaults(func=cmd_score_trace)

    p = sub.add_parser("bench", help="evaluate the PDE agent over a dataset")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-run a report and check byte-identity")
    p.add_argument("report_file")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "formulate" and args.desc_file is None and args.check_expr is None:
        print("formulate needs a description file or --check-expr", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except PinnforgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
