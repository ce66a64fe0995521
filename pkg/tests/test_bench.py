import json

import pytest

from pinnforge.bench import (
    bundled_dataset_path,
    evaluate,
    exact_fixture_table,
    load_dataset,
    report_csv,
)
from pinnforge.config import PipelineConfig
from pinnforge.errors import DatasetMalformed
from pinnforge.providers import MockProvider

from bruteforce import oracle_similarity


def bench_config():
    return PipelineConfig.from_dict({"pde_agent": {"k": 2, "alpha": 0.6}})


class TestLoad:
    def test_bundled_corpus_shape(self):
        samples = load_dataset(bundled_dataset_path())
        assert len(samples) == 64
        families = {s.pde_family for s in samples}
        levels = {s.level for s in samples}
        assert len(families) == 8
        assert levels == {1, 2, 3, 4}
        # 2 descriptions per (family, level)
        from collections import Counter

        combos = Counter((s.pde_family, s.level) for s in samples)
        assert all(n == 2 for n in combos.values())

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_dataset(path) == []

    def test_bad_level_reported_with_line_number(self, tmp_path):
        samples = [json.loads(line) for line in open(bundled_dataset_path())]
        samples[1]["level"] = 5
        path = tmp_path / "bad.jsonl"
        path.write_text("\n".join(json.dumps(s) for s in samples[:3]))
        with pytest.raises(DatasetMalformed) as err:
            load_dataset(path)
        assert err.value.problems[0][0] == 2

    def test_unparseable_ground_truth(self, tmp_path):
        line = {
            "id": "x", "pde_family": "heat", "level": 1, "description": "d",
            "ground_truth": {"residual": "u_t + (unclosed", "domain": {"dims": 1, "extents": [[0, 1]]}},
        }
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(line))
        with pytest.raises(DatasetMalformed):
            load_dataset(path)


class TestEvaluate:
    def test_exact_fixture_provider_all_exact(self):
        samples = load_dataset(bundled_dataset_path())
        config = bench_config()
        provider = MockProvider(table=exact_fixture_table(samples, config.pde_agent.k))
        report = evaluate(samples, config, provider)
        assert len(report["rows"]) == 64
        for level, stats in report["per_level"].items():
            assert stats["exact_rate"] == 1.0, level
            assert stats["mean_sym"] == 1.0

    def test_wrong_family_fixture_rates(self):
        samples = [s for s in load_dataset(bundled_dataset_path()) if s.pde_family in ("heat_ms", "wave_c")]
        config = bench_config()
        wave_gt = next(s for s in samples if s.pde_family == "wave_c").ground_truth_raw

        def answer(sample):
            return wave_gt if sample.pde_family == "heat_ms" else sample.ground_truth_raw

        provider = MockProvider(
            table=exact_fixture_table(samples, config.pde_agent.k, answer_for=answer)
        )
        report = evaluate(samples, config, provider)
        heat_stats = report["per_family"]["heat_ms"]
        assert heat_stats["exact_rate"] == 0.0
        # oracle fixes the expected mean symbolic score for the fixed wrong pair
        heat_sample = next(s for s in samples if s.pde_family == "heat_ms")
        from pinnforge.pde import from_dict

        expected = oracle_similarity(
            from_dict(wave_gt).residual, heat_sample.ground_truth.residual
        )
        assert heat_stats["mean_sym"] == pytest.approx(expected)
        assert report["per_family"]["wave_c"]["exact_rate"] == 1.0

    def test_failed_sample_marked_and_run_continues(self):
        samples = load_dataset(bundled_dataset_path())[:3]
        config = bench_config()
        table = exact_fixture_table(samples[1:], config.pde_agent.k)
        provider = MockProvider(table=table)  # first sample has no fixture
        report = evaluate(samples, config, provider)
        assert report["rows"][0]["failed"] is True
        assert all(not r["failed"] for r in report["rows"][1:])

    def test_empty_dataset(self):
        report = evaluate([], bench_config(), MockProvider())
        assert report["rows"] == [] and report["per_level"] == {}

    def test_aggregates_match_rows(self):
        samples = load_dataset(bundled_dataset_path())[:16]
        config = bench_config()
        provider = MockProvider(table=exact_fixture_table(samples, config.pde_agent.k))
        report = evaluate(samples, config, provider)
        rows = report["rows"]
        for level, stats in report["per_level"].items():
            group = [r for r in rows if str(r["level"]) == level]
            assert stats["count"] == len(group)
            assert stats["mean_sym"] == pytest.approx(
                sum(r["sym"] for r in group) / len(group)
            )

    def test_order_independence_of_aggregates(self):
        samples = load_dataset(bundled_dataset_path())[:8]
        config = bench_config()
        provider = MockProvider(table=exact_fixture_table(samples, config.pde_agent.k))
        fwd = evaluate(samples, config, provider)
        rev = evaluate(list(reversed(samples)), config, provider)
        assert fwd["per_level"] == rev["per_level"]
        assert fwd["per_family"] == rev["per_family"]

    def test_csv_columns(self):
        samples = load_dataset(bundled_dataset_path())[:2]
        config = bench_config()
        provider = MockProvider(table=exact_fixture_table(samples, config.pde_agent.k))
        text = report_csv(evaluate(samples, config, provider))
        header = text.splitlines()[0]
        assert header == "id,family,level,sym,sem,exact"
        assert len(text.splitlines()) == 3
