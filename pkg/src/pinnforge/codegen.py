"""Code agent: six-module program assembly with contract verification.

Each module source carries a machine-readable header declaring the symbols it
provides and requires; the PDE-loss source additionally carries the residual
expression inside a marker block, which verification parses back and compares
against the target equation.  Builtin-target bundles execute in-process via
the desk trainer; external-target bundles are written to a directory the
external runtime renders and runs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from . import expr as ex
from .errors import (
    InterfaceNotExtractable,
    PreconditionFailed,
    ResidualBlockMissing,
    TemplateMissing,
)
from .pde import CanonicalPde
from .similarity import tree_similarity

MODULE_KINDS = ("model", "pde_loss", "preprocessing", "training_loop", "validation", "main")
TARGETS = ("builtin", "external-runtime")

# symbol/arity contract per kind; "provides" must be unique across the bundle
INTERFACE_CONTRACTS = {
    "model": {"provides": {"forward": 2, "init_params": 1}, "requires": {}},
    "pde_loss": {"provides": {"loss": 2}, "requires": {"forward": 2}},
    "preprocessing": {"provides": {"sample_points": 1}, "requires": {}},
    "training_loop": {
        "provides": {"train": 3},
        "requires": {"loss": 2, "sample_points": 1, "init_params": 1},
    },
    "validation": {"provides": {"evaluate": 2}, "requires": {"forward": 2}},
    "main": {"provides": {"main": 0}, "requires": {"train": 3, "evaluate": 2}},
}

VERIFICATION_THRESHOLD = 0.99

_HEADER_RE = re.compile(r"^#\s*(provides|requires):\s*(.*)$", re.MULTILINE)
_RESIDUAL_RE = re.compile(r"#\s*residual-begin\s*\n#\s*(.+?)\s*\n#\s*residual-end")
_SYMBOL_RE = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)/(\d+)")


@dataclass(frozen=True)
class ModuleSource:
    kind: str
    source: str
    provides: tuple[tuple[str, int], ...]
    requires: tuple[tuple[str, int], ...]
    target: str = "builtin"
    provenance: str = "template"   # template id or provider completion id

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "provides": [f"{n}/{a}" for n, a in self.provides],
            "requires": [f"{n}/{a}" for n, a in self.requires],
            "target": self.target,
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class InterfaceViolation:
    kind: str
    symbol: str
    problem: str   # "missing provider" | "duplicate provider" | "arity mismatch"

    def __str__(self):
        return f"{self.kind}: {self.symbol} ({self.problem})"


@dataclass
class ProgramBundle:
    modules: dict[str, ModuleSource]
    pde: CanonicalPde
    architecture: str
    net: dict
    train_cfg: dict
    target: str
    interface_ok: bool
    loss_verification: dict        # {"verified", "recovered", "score"}
    reference_solution: str | None = None

    def manifest(self) -> dict:
        return {
            "kinds": list(self.modules),
            "interfaces": {k: m.to_dict() for k, m in self.modules.items()},
            "residual": ex.to_prefix(self.pde.residual),
            "pde": self.pde.to_dict(),
            "architecture": self.architecture,
            "net": dict(self.net),
            "trainer_config": dict(self.train_cfg),
            "target": self.target,
            "reference_solution": self.reference_solution,
        }

    def write(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for kind, module in self.modules.items():
            (directory / f"{kind}.py").write_text(module.source, encoding="utf-8")
        (directory / "manifest.json").write_text(
            json.dumps(self.manifest(), indent=2, sort_keys=True), encoding="utf-8"
        )
        return directory


def extract_interface(source: str) -> tuple[tuple[tuple[str, int], ...], tuple[tuple[str, int], ...]]:
    provides: list[tuple[str, int]] = []
    requires: list[tuple[str, int]] = []
    seen = False
    for match in _HEADER_RE.finditer(source):
        seen = True
        bucket = provides if match.group(1) == "provides" else requires
        for sym in _SYMBOL_RE.finditer(match.group(2)):
            bucket.append((sym.group(1), int(sym.group(2))))
    if not seen:
        raise InterfaceNotExtractable("source has no provides/requires header")
    return tuple(provides), tuple(requires)


def _render_interface_header(kind: str) -> str:
    contract = INTERFACE_CONTRACTS[kind]
    provides = ", ".join(f"{n}/{a}" for n, a in sorted(contract["provides"].items()))
    requires = ", ".join(f"{n}/{a}" for n, a in sorted(contract["requires"].items()))
    lines = [f"# module: {kind}", f"# provides: {provides}"]
    lines.append(f"# requires: {requires}" if requires else "# requires:")
    return "\n".join(lines)


_BODY_TEMPLATES = {
    "model": (
        "# fully-connected network: depth {depth}, width {width}, activation {activation}\n"
        "# architecture family: {architecture}\n"
        "# forward(params, points) evaluates the network; init_params(seed) builds\n"
        "# the parameter stack for the runtime executing this bundle.\n"
    ),
    "pde_loss": (
        "# residual-begin\n"
        "# {residual}\n"
        "# residual-end\n"
        "# loss(params, batch) = mean squared residual over interior points plus\n"
        "# boundary/initial penalties weighted by {boundary_weight}.\n"
    ),
    "preprocessing": (
        "# sample_points(config) draws {interior_points} interior and\n"
        "# {boundary_points} boundary collocation points from the seeded stream.\n"
        "# domain: {domain}\n"
    ),
    "training_loop": (
        "# train(params, batches, config) runs {steps} first-order steps at\n"
        "# learning rate {learning_rate}, recording loss and gradient norm per step.\n"
    ),
    "validation": (
        "# evaluate(params, reference) reports solution MSE on the fixed\n"
        "# evaluation grid ({eval_points} points per axis).\n"
        "# reference solution: {reference_solution}\n"
    ),
    "main": (
        "# main() wires preprocessing -> training -> validation and emits the\n"
        "# loss trace in the JSONL wire format.\n"
    ),
}


def render_template(kind: str, target: str, context: dict) -> str:
    if kind not in MODULE_KINDS or target not in TARGETS:
        raise TemplateMissing(f"no template for ({kind}, {target})")
    body = _BODY_TEMPLATES[kind]
    values = {
        "residual": context.get("residual", ""),
        "architecture": context.get("architecture", "MLP"),
        "depth": context.get("net", {}).get("depth", 3),
        "width": context.get("net", {}).get("width", 32),
        "activation": context.get("net", {}).get("activation", "tanh"),
        "steps": context.get("train_cfg", {}).get("steps", 2000),
        "learning_rate": context.get("train_cfg", {}).get("learning_rate", 2e-3),
        "boundary_weight": context.get("train_cfg", {}).get("boundary_weight", 100.0),
        "interior_points": context.get("train_cfg", {}).get("interior_points", 128),
        "boundary_points": context.get("train_cfg", {}).get("boundary_points", 64),
        "eval_points": context.get("train_cfg", {}).get("eval_points", 256),
        "domain": json.dumps(context.get("domain", {}), sort_keys=True),
        "reference_solution": context.get("reference_solution") or "none",
    }
    header = _render_interface_header(kind)
    return f"{header}\n# target: {target}\n{body.format(**values)}"


def build_module_prompt(kind: str, context: dict, directive_reason: str | None = None) -> str:
    contract = INTERFACE_CONTRACTS[kind]
    provides = ", ".join(f"{n}/{a}" for n, a in sorted(contract["provides"].items()))
    requires = ", ".join(f"{n}/{a}" for n, a in sorted(contract["requires"].items())) or "nothing"
    lines = [
        f"Generate the {kind} module of a PINN training program.",
        f"It must provide {provides} and may call {requires}.",
        "Start the module with '# provides:' and '# requires:' header lines.",
        f"Equation residual: {context.get('residual', '')}",
        f"Architecture: {context.get('architecture', 'MLP')}",
    ]
    if kind == "pde_loss":
        lines.append(
            "Embed the residual between '# residual-begin' and '# residual-end' marker lines."
        )
    if directive_reason:
        lines.append(f"The previous version failed: {directive_reason}. Fix that fault.")
    return "\n".join(lines) + "\n"


def generate_module(
    kind: str,
    context: dict,
    target: str = "builtin",
    provider=None,
    directive_reason: str | None = None,
) -> ModuleSource:
    if provider is None:
        source = render_template(kind, target, context)
        provenance = f"template:{kind}:{target}"
    else:
        prompt = build_module_prompt(kind, context, directive_reason)
        source = provider.complete(prompt, {"temperature": 0.2})
        provenance = "provider"
    provides, requires = extract_interface(source)
    contract = INTERFACE_CONTRACTS[kind]
    declared = dict(provides)
    for name, arity in contract["provides"].items():
        if declared.get(name) != arity:
            raise InterfaceNotExtractable(
                f"{kind} module does not declare required symbol {name}/{arity}"
            )
    return ModuleSource(kind, source, provides, requires, target, provenance)


def check_interfaces(modules: list[ModuleSource]) -> list[InterfaceViolation]:
    """Empty list when every requirement is met by exactly one other module."""
    violations: list[InterfaceViolation] = []
    providers: dict[str, list[tuple[str, int]]] = {}
    for module in modules:
        for name, arity in module.provides:
            providers.setdefault(name, []).append((module.kind, arity))
    for name, sources in providers.items():
        if len(sources) > 1:
            kinds = ", ".join(k for k, _ in sources)
            violations.append(InterfaceViolation(kinds, name, "duplicate provider"))
    for module in modules:
        for name, arity in module.requires:
            sources = providers.get(name, [])
            if not sources:
                violations.append(InterfaceViolation(module.kind, name, "missing provider"))
                continue
            provider_kind, provided_arity = sources[0]
            if provider_kind == module.kind:
                violations.append(InterfaceViolation(module.kind, name, "missing provider"))
            elif provided_arity != arity:
                violations.append(
                    InterfaceViolation(
                        module.kind,
                        name,
                        f"arity mismatch: requires /{arity}, provided /{provided_arity}",
                    )
                )
    return violations


def extract_residual_block(source: str) -> str:
    match = _RESIDUAL_RE.search(source)
    if not match:
        raise ResidualBlockMissing("no residual marker block in loss source")
    return match.group(1)


def verify_loss(loss_module: ModuleSource, pde: CanonicalPde) -> dict:
    text = extract_residual_block(loss_module.source)
    try:
        recovered = ex.canonicalize(
            ex.from_prefix(text) if text.lstrip().startswith("(") else ex.parse(text)
        )
    except Exception as err:  # noqa: BLE001 - any parse fault means unverified
        return {"verified": False, "recovered": None, "score": 0.0, "error": str(err)}
    score = tree_similarity(recovered, pde.residual)
    return {
        "verified": score >= VERIFICATION_THRESHOLD,
        "recovered": ex.to_prefix(recovered),
        "score": score,
    }


def assemble(
    modules: list[ModuleSource],
    pde: CanonicalPde,
    architecture: str,
    net: dict,
    train_cfg: dict,
    target: str = "builtin",
    reference_solution: str | None = None,
) -> ProgramBundle:
    present = {m.kind for m in modules}
    for kind in MODULE_KINDS:
        if kind not in present:
            raise PreconditionFailed(f"missing kind: {kind}")
    violations = check_interfaces(modules)
    if violations:
        raise PreconditionFailed(
            "interface check failed: " + "; ".join(str(v) for v in violations)
        )
    by_kind = {m.kind: m for m in modules}
    verification = verify_loss(by_kind["pde_loss"], pde)
    if not verification["verified"]:
        raise PreconditionFailed(
            "loss verification failed: recovered residual mismatch "
            f"(sym={verification['score']:.4f})"
        )
    return ProgramBundle(
        modules=by_kind,
        pde=pde,
        architecture=architecture,
        net=dict(net),
        train_cfg=dict(train_cfg),
        target=target,
        interface_ok=True,
        loss_verification=verification,
        reference_solution=reference_solution,
    )
