"""Run the whole pipeline offline: synthetic data, a mock reasoning grid, grading,
a report and a curated fine-tuning file.

    python3 demos/offline_pipeline.py [output-dir]
"""
import sys
import tempfile
from pathlib import Path

from phenollm.harness import (
    CurationCriteria, ExperimentConfig, compute_metrics, curate_finetune_set, emit_report,
    run_experiment,
)
from phenollm.harness.report import summary_text
from phenollm.llmgate import BackendConfig, MockPolicy
from phenollm.synthetic import SyntheticSpec, generate_synthetic


def main(out: Path) -> None:
    data, _ = generate_synthetic(SyntheticSpec(seed=7), out / "data")
    backends = (
        BackendConfig(model_name="always-no"),
        BackendConfig(model_name="noisy", mock=MockPolicy(
            seed=1, answer_mode="coin", numeric_error_rate=0.1, trend_error_rate=0.2)),
    )
    cfg = ExperimentConfig(str(data), str(out / "run"), strategies=("dp", "cot", "cot-exp"),
                           formats=("markdown", "csv"), backends=backends)
    records = run_experiment(cfg)
    metrics = compute_metrics(records)
    emit_report(metrics, out / "report")
    print(summary_text(metrics), end="")

    noisy = [r for r in records if r.model == "noisy"]
    res = curate_finetune_set(noisy, CurationCriteria(), seed=0, out_dir=out / "finetune")
    print(f"curated {len(res.examples)} examples into {res.data_path}")
    print(f"report written to {out / 'report'}")


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="phenollm-"))
    main(target)
