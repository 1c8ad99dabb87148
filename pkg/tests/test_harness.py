import json

import pytest

from phenollm.harness import (
    AbortedAllCells, ConfigError, CurationCriteria, EmptyRecords, ExperimentConfig,
    InsufficientQualifying, MetricsInconsistency, RecordLog, RunRecord, compute_metrics,
    curate_finetune_set, emit_report, evaluation_split, export_grader_packets, percent, qualifies,
    read_records, run_experiment,
)
from phenollm.harness.metrics import CellMetrics, self_check
from phenollm.harness.report import metrics_csv
from phenollm.interpret import ClassificationOutcome, Decision
from phenollm.llmgate import BackendConfig, MockPolicy

from _support import synthetic_pool


def record(i, label="Positive", decision="Yes", strategy="cot", model="m", q=(True, True, True, True),
           error=None, fmt="markdown"):
    report = None if q is None else dict(zip(
        ("q1_has_numbers", "q2_numbers_consistent", "q3_has_trends", "q4_trends_consistent"), q))
    span = (0, 0) if decision == "Unparseable" else (0, len(decision))
    return RunRecord(
        sample_id=f"S{i:03d}@2019-05-{1 + i % 28:02d}", strategy=strategy, format=fmt, model=model,
        repetition=0, prompt_hash=f"h{i}", prompt=f"Role text {i}\n\nData {i}", reply=f"{decision}.",
        outcome=ClassificationOutcome(Decision(decision), span), report=report, true_label=label,
        error=error,
    )


def scored(n, correct, balanced=True):
    """``n`` records, the first ``correct`` of them right."""
    out = []
    for i in range(n):
        label = "Positive" if (i % 2 if balanced else True) else "Negative"
        right = "Yes" if label == "Positive" else "No"
        wrong = "No" if right == "Yes" else "Yes"
        out.append(record(i, label, right if i < correct else wrong))
    return out


# -- metrics --------------------------------------------------------------------------

@pytest.mark.parametrize("correct, text", [(55, "61.11%"), (48, "53.33%"), (45, "50.00%"), (90, "100.00%")])
def test_accuracy_rendering(correct, text):
    [cell] = compute_metrics(scored(90, correct))
    assert cell.n == 90 and percent(cell.accuracy) == text


def test_all_unparseable():
    [cell] = compute_metrics([record(i, decision="Unparseable") for i in range(10)])
    assert cell.accuracy == 0 and cell.unparseable_rate == 1.0 and cell.yes_rate == 0


def test_rates_sum_to_one_and_balanced_identity():
    recs = scored(90, 61) + [record(200 + i, "Negative", "Unparseable") for i in range(4)] \
        + [record(300 + i, "Positive", "Unparseable") for i in range(4)]
    [cell] = compute_metrics(recs)
    assert cell.yes_rate + cell.no_rate + cell.unparseable_rate == pytest.approx(1.0)
    assert cell.positives == cell.negatives
    assert cell.accuracy == pytest.approx((cell.tpr + cell.tnr) / 2)


def test_cells_are_grouped_by_strategy_format_model():
    recs = ([record(i, strategy="dp", q=None) for i in range(4)]
            + [record(i, model="other") for i in range(3)]
            + [record(i, fmt="csv") for i in range(2)])
    table = compute_metrics(recs)
    assert [c.key for c in table] == [("dp", "markdown", "m"), ("cot", "markdown", "other"),
                                      ("cot", "csv", "m")]
    assert table.get("dp", "markdown", "m").rubric_rates() is None
    assert table.get("cot", "csv", "m").rubric_rates() == (1.0, 1.0, 1.0, 1.0)


def test_rubric_rates():
    recs = [record(0, q=(True, False, True, False)), record(1, q=(True, True, False, False))]
    [cell] = compute_metrics(recs)
    assert cell.rubric_rates() == (1.0, 0.5, 0.5, 0.0)


def test_empty_records():
    with pytest.raises(EmptyRecords):
        compute_metrics([])


def test_self_check_catches_inconsistent_counts():
    bad = CellMetrics("cot", "markdown", "m", n=4, tp=1, tn=1, fp=0, fn=0, yes=2, no=1, unparseable=0,
                      errors=0, positives=2, negatives=2, graded=0, q1=0, q2=0, q3=0, q4=0)
    with pytest.raises(MetricsInconsistency):
        self_check(bad)


# -- records ----------------------------------------------------------------------------

def test_record_round_trip_and_torn_tail(tmp_path):
    path = tmp_path / "r.jsonl"
    recs = scored(5, 3)
    with RecordLog(path) as log:
        log.extend(recs)
    with open(path, "ab") as fh:
        fh.write(b'{"sample_id": "S9')
    assert read_records(path) == recs
    assert read_records(path, repair=True) == recs
    assert path.read_bytes().endswith(b"\n")


# -- curation --------------------------------------------------------------------------

def pool(pos=60, neg=40):
    return [record(i, "Positive", "Yes") for i in range(pos)] + \
        [record(100 + i, "Negative", "No") for i in range(neg)]


def test_balanced_selection(tmp_path):
    noisy = pool() + [record(500 + i, "Positive", "Yes", q=(True, False, True, True)) for i in range(50)] \
        + [record(600 + i, "Negative", "Yes") for i in range(50)]
    res = curate_finetune_set(noisy, CurationCriteria(), seed=1, out_dir=tmp_path)
    labels = [r.true_label for r in res.examples]
    assert len(labels) == 70 and labels.count("Positive") == 35
    assert all(r.correct and r.rubric()[1] for r in res.examples)
    manifest = json.loads(res.manifest_path.read_text())
    assert manifest["seed"] == 1 and manifest["epochs"] == 2 and manifest["examples"] == 70
    lines = res.data_path.read_text().splitlines()
    assert len(lines) == 70
    msg = json.loads(lines[0])["messages"]
    assert [m["role"] for m in msg] == ["system", "user", "assistant"]
    assert msg[0]["content"].startswith("Role text") and msg[1]["content"].startswith("Data")


def test_selection_is_seeded_and_order_free(tmp_path):
    a = curate_finetune_set(pool(), CurationCriteria(), 4, tmp_path / "a")
    b = curate_finetune_set(list(reversed(pool())), CurationCriteria(), 4, tmp_path / "b")
    assert a.data_path.read_bytes() == b.data_path.read_bytes()
    c = curate_finetune_set(pool(), CurationCriteria(), 5, tmp_path / "c")
    assert c.data_path.read_bytes() != a.data_path.read_bytes()


def test_q2_false_excluded_even_if_correct():
    r = record(0, q=(True, False, True, True))
    assert r.correct and not qualifies(r, CurationCriteria())
    assert qualifies(r, CurationCriteria(require_clean_numbers=False))


def test_wrong_label_and_errors_excluded():
    assert not qualifies(record(0, "Negative", "Yes"), CurationCriteria())
    assert qualifies(record(0, "Negative", "Yes"), CurationCriteria(require_correct_label=False))
    assert not qualifies(record(0, error="GatewayError: x"), CurationCriteria())
    assert not qualifies(record(0, q=None), CurationCriteria())


def test_empty_pool(tmp_path):
    with pytest.raises(InsufficientQualifying) as err:
        curate_finetune_set([], CurationCriteria(), 0, tmp_path)
    assert err.value.available == 0 and err.value.needed == 35


def test_short_class(tmp_path):
    with pytest.raises(InsufficientQualifying) as err:
        curate_finetune_set(pool(60, 20), CurationCriteria(), 0, tmp_path)
    assert (err.value.label, err.value.available) == ("Negative", 20)


def test_target_size_must_be_even():
    with pytest.raises(ValueError):
        CurationCriteria(target_size=69)


# -- reports --------------------------------------------------------------------------

def test_report_files_and_determinism(tmp_path):
    recs = scored(90, 55) + [record(i, strategy="dp", q=None) for i in range(10)]
    table = compute_metrics(recs)
    files = emit_report(table, tmp_path / "a")
    names = sorted(p.name for p in files)
    assert names == ["accuracy.svg", "answers.svg", "metrics.csv", "rubric.svg", "summary.txt"]
    again = emit_report(compute_metrics(recs), tmp_path / "b")
    for x, y in zip(files, again):
        assert x.read_bytes() == y.read_bytes()
    csv_rows = (tmp_path / "a" / "metrics.csv").read_text().splitlines()
    assert len(csv_rows) == 1 + len(table)
    assert "61.11%" in (tmp_path / "a" / "summary.txt").read_text()
    assert (tmp_path / "a" / "accuracy.svg").read_text().startswith("<svg")


def test_single_cell_report(tmp_path):
    table = compute_metrics(scored(4, 2))
    assert len(metrics_csv(table).splitlines()) == 2
    emit_report(table, tmp_path)


def test_report_write_failure(tmp_path):
    from phenollm.harness import IoFailure
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        emit_report(compute_metrics(scored(4, 2)), blocker / "sub")


def test_grader_packets(tmp_path):
    recs = [record(i) for i in range(70)] + [record(i, strategy="dp", q=None) for i in range(5)]
    paths = export_grader_packets(recs, tmp_path, per_grader=32, seed=2)
    assert [p.name for p in paths] == ["packet_01.md", "packet_02.md", "packet_03.md"]
    key = (tmp_path / "key.tsv").read_text().splitlines()
    assert len(key) == 71
    assert "Q4." in paths[0].read_text() and "dp" not in {k.split("\t")[3] for k in key[1:]}


# -- config ----------------------------------------------------------------------------

def test_config_round_trip(tmp_path):
    cfg = ExperimentConfig("data.csv", str(tmp_path), strategies=("dp", "cot-dsm"), formats=("csv",),
                           backends=(BackendConfig(model_name="a"),
                                     BackendConfig(model_name="b", mock=MockPolicy(answer_mode="coin"))),
                           target="anxiety", repetitions=2)
    cfg.save(tmp_path / "c.json")
    assert ExperimentConfig.load(tmp_path / "c.json") == cfg


@pytest.mark.parametrize("bad", [
    {"strategies": []}, {"backends": [BackendConfig().to_dict(), BackendConfig().to_dict()]},
    {"repetitions": 0}, {"strategies": ["nope"]}, {"surprise": 1},
])
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"dataset_path": "d", "output_dir": "o", **bad})


# -- runs -----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    return str(synthetic_pool(tmp_path_factory.mktemp("pool"), seed=7))


def config(dataset, out, **kw):
    kw.setdefault("strategies", ("dp",))
    kw.setdefault("backends", (BackendConfig(model_name="no"),))
    return ExperimentConfig(dataset, str(out), **kw)


def test_structural_reproduction(dataset, tmp_path):
    backends = (BackendConfig(model_name="no"),
                BackendConfig(model_name="yes", mock=MockPolicy(answer_mode="always-yes")),
                BackendConfig(model_name="oracle", mock=MockPolicy(answer_mode="oracle")))
    recs = run_experiment(config(dataset, tmp_path, backends=backends, strategies=("dp", "cot")))
    table = compute_metrics(recs)
    for strategy in ("dp", "cot"):
        no, yes, oracle = (table.get(strategy, "markdown", m) for m in ("no", "yes", "oracle"))
        assert (no.n, no.accuracy, no.yes_rate) == (90, 0.5, 0.0)
        assert (yes.accuracy, yes.yes_rate) == (0.5, 1.0)
        assert oracle.accuracy == 1.0
    assert table.get("cot", "markdown", "no").graded == 90


def test_records_cover_the_grid_once(dataset, tmp_path):
    cfg = config(dataset, tmp_path, strategies=("dp", "cot"), formats=("csv", "latex"), max_samples=5,
                 repetitions=2)
    recs = run_experiment(cfg)
    assert len(recs) == 5 * 2 * 2 * 2 == len({r.cell for r in recs})
    assert read_records(cfg.records_path) == recs


def test_resume_after_interrupt(dataset, tmp_path):
    base = dict(strategies=("dp", "cot"), formats=("markdown", "csv"), max_samples=8)
    full = config(dataset, tmp_path / "full", **base)
    run_experiment(full)

    cut = config(dataset, tmp_path / "cut", **base)
    seen = []

    def stop(r):
        seen.append(r)
        if len(seen) == 11:
            raise KeyboardInterrupt

    with pytest.raises(KeyboardInterrupt):
        run_experiment(cut, on_record=stop)
    assert len(read_records(cut.records_path)) == 11
    with open(cut.records_path, "ab") as fh:
        fh.write(b'{"sample_id": "torn')
    run_experiment(cut)
    assert cut.records_path.read_bytes() == full.records_path.read_bytes()


def test_rerun_is_a_no_op(dataset, tmp_path):
    cfg = config(dataset, tmp_path, max_samples=4)
    first = run_experiment(cfg)
    before = cfg.records_path.read_bytes()
    assert run_experiment(cfg) == first
    assert cfg.records_path.read_bytes() == before


def test_replay_from_cache(dataset, tmp_path):
    live = config(dataset, tmp_path / "live", strategies=("cot",), max_samples=3,
                  cache_dir=str(tmp_path / "cache"))
    recs = run_experiment(live)
    replay = config(dataset, tmp_path / "replay", strategies=("cot",), max_samples=3,
                    cache_dir=str(tmp_path / "cache"), replay_only=True)
    assert [r.reply for r in run_experiment(replay)] == [r.reply for r in recs]


def test_backend_errors_are_recorded(dataset, tmp_path, monkeypatch):
    monkeypatch.delenv("PHENOLLM_MISSING_KEY", raising=False)
    http = BackendConfig(kind="http", endpoint_url="https://x.test", model_name="http",
                         api_key_env_var="PHENOLLM_MISSING_KEY")
    cfg = config(dataset, tmp_path, backends=(BackendConfig(model_name="no"), http), max_samples=2)
    recs = run_experiment(cfg)
    errs = [r for r in recs if r.error]
    assert len(errs) == 2 and all(r.model == "http" and "AuthFailure" in r.error for r in errs)
    assert all(r.outcome.decision is Decision.UNPARSEABLE for r in errs)


def test_all_cells_failing_aborts(dataset, tmp_path, monkeypatch):
    monkeypatch.delenv("PHENOLLM_MISSING_KEY", raising=False)
    http = BackendConfig(kind="http", endpoint_url="https://x.test", model_name="http",
                         api_key_env_var="PHENOLLM_MISSING_KEY")
    with pytest.raises(AbortedAllCells):
        run_experiment(config(dataset, tmp_path, backends=(http,), max_samples=2))


def test_evaluation_split_is_balanced(dataset, tmp_path):
    split = evaluation_split(config(dataset, tmp_path))
    assert len(split.test) == 90
    assert {s.depression_label.value for s in split.test} == {"Positive", "Negative"}
