"""The nine acceptance criteria, each timed against its runtime budget.

A summary line per criterion is printed at the end of the pytest run.
"""
import datetime as dt
import json
import math
import os
import signal
import subprocess
import sys
import time

import numpy as np
import pytest

from phenollm.baseline import ForestConfig, evaluate, predict_features, train_forest
from phenollm.cli import main
from phenollm.dataset import Label, balanced_sample, load_dataset
from phenollm.harness import (
    CurationCriteria, ExperimentConfig, compute_metrics, curate_finetune_set, read_records,
    run_experiment,
)
from phenollm.interpret import ClaimKind, TrendKind, Verdict, grade_response
from phenollm.llmgate import BackendConfig, MockPolicy
from phenollm.prompts import Strategy
from phenollm.schema import FeatureWindow, toy_schema
from phenollm.synthetic import SyntheticSpec, generate_synthetic, separated_generators
from phenollm.tables import AmbiguousTabular, DataFormat, parse_table, serialize_table

from _agreement import tally
from _criteria import criterion
from _support import GOLDEN_DIR, golden_name, render_golden, synthetic_pool
from test_baseline import hand_forest
from test_verify import DISTANCE, REPLY, SLEEP, STEPS, distance_window, excerpt_window, sleep_window


@pytest.fixture(scope="module")
def pool(tmp_path_factory):
    return synthetic_pool(tmp_path_factory.mktemp("pool"), seed=7)


def test_criterion_1_golden_prompts():
    with criterion(1, "golden prompts", 1.0):
        grid = [(s, f) for s in Strategy for f in DataFormat]
        first = {k: render_golden(*k) for k in grid}
        second = {k: render_golden(*k) for k in grid}
        assert len(grid) == 20 and first == second
        for k, text in first.items():
            assert text == (GOLDEN_DIR / golden_name(*k)).read_text()
        md = first[(Strategy.COT, DataFormat.MARKDOWN)].splitlines()
        assert "2019-04-29|49037|666|0.85|298|3|nan|nan|29|11430|40|1290|39|150|306|11|" in md


def _random_window(rng: np.random.Generator) -> FeatureWindow:
    n_cols, n_days = int(rng.integers(1, 16)), int(rng.integers(1, 29))
    kind = rng.integers(0, 3, size=(n_days, n_cols))
    values = np.where(kind == 0, rng.integers(0, 100001, size=kind.shape).astype(float),
                      rng.uniform(0, 1e5, size=kind.shape))
    values[kind == 2] = math.nan
    if rng.random() < 0.3:
        values = np.nan_to_num(values, nan=7.0)
    start = dt.date(2018, 1, 1) + dt.timedelta(days=int(rng.integers(0, 2000)))
    return FeatureWindow(tuple(start + dt.timedelta(days=i) for i in range(n_days)), values,
                         toy_schema(n_cols))


def test_criterion_2_serialization_round_trip():
    with criterion(2, "serialization round trip", 10.0):
        rng = np.random.default_rng(20190429)
        complete = 0
        for _ in range(1000):
            w = _random_window(rng)
            for fmt in (DataFormat.CSV, DataFormat.MARKDOWN, DataFormat.LATEX):
                assert parse_table(serialize_table(w, fmt), fmt, w.schema) == w
            text = serialize_table(w, DataFormat.TABULAR)
            if w.is_complete:
                complete += 1
                assert parse_table(text, DataFormat.TABULAR, w.schema) == w
            else:
                with pytest.raises(AmbiguousTabular):
                    parse_table(text, DataFormat.TABULAR, w.schema)
        assert 0 < complete < 1000


def test_criterion_3_labeling_and_sampling(pool, tmp_path):
    with criterion(3, "labeling and sampling", 5.0):
        assert main(["dataset", "sample", "--data", str(pool), "--per-year", "30", "--seed", "1",
                     "--out", str(tmp_path)]) == 0
        split = json.loads((tmp_path / "split.json").read_text())
        labels = [r["label"] for r in split["test"]]
        assert len(labels) == 90
        assert labels.count("Positive") == labels.count("Negative") == 45
        assert "Borderline" not in labels
        assert not {r["sample_id"] for r in split["test"]} & {r["sample_id"] for r in split["train"]}


def test_criterion_4_verifier_oracle_agreement(pool):
    windows = [s.window for s in load_dataset(pool)[::7][:24]]
    with criterion(4, "verifier agreement with mock truth logs", 30.0):
        result = tally(windows)
        assert result.reports >= 200
        assert result.claim_hits / result.claims >= 0.98
        assert result.q2_hits / result.reports >= 0.95
        assert result.q4_hits / result.reports >= 0.95
        assert result.composition_ok == result.reports


def test_criterion_5_regression_cases():
    with criterion(5, "rubric regression cases", 1.0):
        distance = grade_response("The lowest distance travelled was 127 meters.", distance_window())
        [f] = distance.numeric_claims
        assert f.claim.column_ref == DISTANCE and f.verdict is Verdict.INCONSISTENT
        assert distance.q1_has_numbers and not distance.q2_numbers_consistent

        sleep = grade_response("The highest sleep time occurred on May 9.", sleep_window())
        [t] = sleep.trend_claims
        assert t.claim.column_ref == SLEEP and t.claim.trend_kind is TrendKind.EXTREMUM_AT_DATE
        assert t.verdict is Verdict.INCONSISTENT and "2019-06-02" in t.witness
        assert sleep.q3_has_trends and not sleep.q4_trends_consistent

        steps = grade_response(REPLY, excerpt_window()).numeric_claims[0]
        assert steps.claim.raw_span == "55,755 steps on 2019-05-11"
        assert steps.claim.claim_kind is ClaimKind.POINT
        assert (steps.claim.value, steps.claim.column_ref) == (55755, STEPS)
        assert steps.claim.date_ref == dt.date(2019, 5, 11) and steps.verdict is Verdict.CONSISTENT


def test_criterion_6_mock_grid_reproduction(pool, tmp_path):
    backends = (BackendConfig(model_name="always-no"),
                BackendConfig(model_name="always-yes", mock=MockPolicy(answer_mode="always-yes")),
                BackendConfig(model_name="oracle", mock=MockPolicy(answer_mode="oracle")))
    with criterion(6, "mock grid structural reproduction", 20.0):
        cfg = ExperimentConfig(str(pool), str(tmp_path), strategies=("dp", "cot", "cot-dsm"),
                               backends=backends)
        table = compute_metrics(run_experiment(cfg))
        for strategy in ("dp", "cot", "cot-dsm"):
            no, yes, oracle = (table.get(strategy, "markdown", m)
                               for m in ("always-no", "always-yes", "oracle"))
            assert no.n == yes.n == oracle.n == 90
            assert (no.accuracy, no.yes_rate) == (0.5, 0.0)
            assert (yes.accuracy, yes.yes_rate) == (0.5, 1.0)
            assert oracle.accuracy == 1.0


def test_criterion_7_random_forest(tmp_path):
    with criterion(7, "random forest baseline", 60.0):
        data, _ = generate_synthetic(SyntheticSpec(seed=11, generators=separated_generators(2.0)), tmp_path)
        split = balanced_sample(load_dataset(data), per_year=30, seed=0)
        rf = train_forest(split.train, ForestConfig())
        assert train_forest(split.train, ForestConfig()).dumps() == rf.dumps()
        assert evaluate(rf, split.test).accuracy >= 0.90

        positives = [s for s in split.train if s.depression_label is Label.POSITIVE]
        lone = train_forest(positives, ForestConfig(tree_count=5))
        assert all(len(tree) == 1 for tree in lone.trees)
        assert predict_features(lone, [0.0] * 15) == (Label.POSITIVE, 1.0)

        yes, no = [{"counts": [0, 2]}], [{"counts": [2, 0]}]
        assert predict_features(hand_forest([yes, no]), [0.0] * 15) == (Label.NEGATIVE, 0.5)


def test_criterion_8_curation(pool, tmp_path):
    backend = BackendConfig(model_name="coin", mock=MockPolicy(
        seed=5, answer_mode="coin", numeric_error_rate=0.1, trend_error_rate=0.1))
    with criterion(8, "fine-tuning set curation", 5.0):
        cfg = ExperimentConfig(str(pool), str(tmp_path / "run"),
                               strategies=("cot", "reasoning"),
                               formats=("markdown", "csv"), backends=(backend,))
        records = run_experiment(cfg)
        # the pool must contain both kinds of record the filter is meant to drop
        assert any(not r.correct for r in records)
        assert any(r.correct and not r.rubric()[1] for r in records)
        res = curate_finetune_set(records, CurationCriteria(), seed=3, out_dir=tmp_path / "ft")
        assert len(res.examples) == 70
        labels = [r.true_label for r in res.examples]
        assert labels.count("Positive") == labels.count("Negative") == 35
        assert all(r.correct and r.rubric()[1] for r in res.examples)
        assert len(res.data_path.read_text().splitlines()) == 70
        manifest = json.loads(res.manifest_path.read_text())
        assert manifest["seed"] == 3 and manifest["epochs"] == 2


def _run_args(pool, out):
    return ["run", "reason", "--data", str(pool), "--out", str(out), "--seed", "0",
            "--strategy", "cot", "--strategy", "cot-dsm", "--format", "markdown", "--format", "csv",
            "--numeric-error-rate", "0.3", "--trend-error-rate", "0.3", "--answer-mode", "coin"]


def _lines(path) -> int:
    try:
        return path.read_bytes().count(b"\n")
    except FileNotFoundError:
        return 0


def test_criterion_9_resume_after_kill(pool, tmp_path):
    with criterion(9, "resume after a killed run", 30.0):
        full, cut = tmp_path / "full", tmp_path / "cut"
        assert main(_run_args(pool, full)) == 0
        total = _lines(full / "records.jsonl")

        code = "import sys; from phenollm.cli import main; sys.exit(main(sys.argv[1:]))"
        proc = subprocess.Popen([sys.executable, "-c", code, *_run_args(pool, cut)],
                                stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        deadline = time.monotonic() + 20
        while _lines(cut / "records.jsonl") < 40 and proc.poll() is None and time.monotonic() < deadline:
            time.sleep(0.005)
        os.kill(proc.pid, signal.SIGKILL)
        proc.wait()
        assert proc.returncode == -signal.SIGKILL
        assert _lines(cut / "records.jsonl") < total

        assert main(_run_args(pool, cut)) == 0
        assert (cut / "records.jsonl").read_bytes() == (full / "records.jsonl").read_bytes()
        assert len(read_records(cut / "records.jsonl")) == total
