"""Benchmark harness: run the PDE agent over a task dataset and report per-level
and per-family translation quality (symbolic score, semantic score, exact rate).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .candidates import (
    build_formulate_prompt,
    consensus_select,
    formulate_candidates,
    score_candidates,
)
from .config import PipelineConfig
from .errors import DatasetMalformed, PinnforgeError
from .pde import CanonicalPde, from_dict
from .providers import DEFAULT_PARAMS, fixture_key
from .similarity import sym_score
from .summary import sem_score, summarize

BUNDLED_DATASET = "task2pde_sample.jsonl"
LEVELS = (1, 2, 3, 4)


@dataclass(frozen=True)
class TaskSample:
    id: str
    pde_family: str
    level: int
    description: str
    ground_truth: CanonicalPde
    ground_truth_raw: dict

    @staticmethod
    def from_dict(d: dict) -> "TaskSample":
        level = int(d["level"])
        if level not in LEVELS:
            raise ValueError(f"level {level} outside 1..4")
        gt = from_dict(d["ground_truth"])
        return TaskSample(
            id=str(d["id"]),
            pde_family=str(d["pde_family"]),
            level=level,
            description=str(d["description"]),
            ground_truth=gt,
            ground_truth_raw=d["ground_truth"],
        )


def bundled_dataset_path() -> Path:
    return Path(str(resources.files("pinnforge").joinpath(f"data/{BUNDLED_DATASET}")))


def load_dataset(path) -> list[TaskSample]:
    samples = []
    problems = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                samples.append(TaskSample.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError, PinnforgeError) as err:
                problems.append((lineno, str(err)))
    if problems:
        raise DatasetMalformed(problems)
    return samples


def exact_fixture_table(samples, k: int, answer_for=None) -> dict:
    """Fixture set answering every formulate prompt with a serialized PDE.

    ``answer_for`` maps a sample to the PDE dict to answer with; defaults to
    the sample's own ground truth (the exact-fixture provider).
    """
    table = {}
    for sample in samples:
        block = answer_for(sample) if answer_for else sample.ground_truth_raw
        completion = (
            f"Normalized: {sample.pde_family} task\n"
            "```json\n" + json.dumps(block) + "\n```\n"
        )
        for i in range(k):
            prompt = build_formulate_prompt(sample.description, i, k)
            table[fixture_key(prompt, {**DEFAULT_PARAMS, "temperature": 0.7})] = completion
    return table


@dataclass
class BenchRow:
    id: str
    family: str
    level: int
    sym: float | None
    sem: float | None
    exact: bool
    failed: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "family": self.family,
            "level": self.level,
            "sym": self.sym,
            "sem": self.sem,
            "exact": self.exact,
            "failed": self.failed,
            "error": self.error,
        }


def _aggregate(rows, key_fn):
    groups: dict = {}
    for row in rows:
        groups.setdefault(key_fn(row), []).append(row)
    out = {}
    for key, group in sorted(groups.items(), key=lambda kv: str(kv[0])):
        scored = [r for r in group if not r.failed]
        out[str(key)] = {
            "count": len(group),
            "failed": sum(r.failed for r in group),
            "mean_sym": sum(r.sym for r in scored) / len(scored) if scored else None,
            "mean_sem": sum(r.sem for r in scored) / len(scored) if scored else None,
            "exact_rate": sum(r.exact for r in scored) / len(scored) if scored else None,
        }
    return out


def evaluate(samples: list[TaskSample], config: PipelineConfig, provider) -> dict:
    """Run the PDE agent per sample; failures mark the row and the run continues."""
    rows = []
    for sample in samples:
        try:
            raw = formulate_candidates(sample.description, config.pde_agent.k, provider)
            cset = score_candidates(raw, config.pde_agent.alpha)
            chosen = consensus_select(cset)
        except PinnforgeError as err:
            rows.append(
                BenchRow(sample.id, sample.pde_family, sample.level, None, None, False,
                         failed=True, error=str(err))
            )
            continue
        sym = sym_score(chosen, sample.ground_truth)
        sem = sem_score(summarize(chosen), summarize(sample.ground_truth))
        rows.append(
            BenchRow(sample.id, sample.pde_family, sample.level, sym, sem, sym == 1.0)
        )
    return {
        "rows": [r.to_dict() for r in rows],
        "per_level": _aggregate(rows, lambda r: r.level),
        "per_family": _aggregate(rows, lambda r: r.family),
    }


def report_csv(report: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["id", "family", "level", "sym", "sem", "exact"])
    for row in report["rows"]:
        writer.writerow(
            [row["id"], row["family"], row["level"], row["sym"], row["sem"],
             int(bool(row["exact"]))]
        )
    return buffer.getvalue()
