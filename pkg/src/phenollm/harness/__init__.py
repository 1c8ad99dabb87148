"""Experiment orchestration: grid runs, metrics, fine-tune curation and reports."""
from .config import ConfigError, ExperimentConfig
from .curate import (
    CurationCriteria, CurationResult, InsufficientQualifying, curate_finetune_set, qualifies,
)
from .metrics import (
    CellMetrics, EmptyRecords, MetricsInconsistency, MetricsTable, compute_metrics, percent,
)
from .packets import export_grader_packets
from .records import RecordLog, RunRecord, read_records
from .report import IoFailure, emit_report
from .runner import AbortedAllCells, evaluation_split, grid, run_experiment

__all__ = [
    "AbortedAllCells", "CellMetrics", "ConfigError", "CurationCriteria", "CurationResult",
    "EmptyRecords", "ExperimentConfig", "InsufficientQualifying", "IoFailure",
    "MetricsInconsistency", "MetricsTable", "RecordLog", "RunRecord", "compute_metrics",
    "curate_finetune_set", "emit_report", "evaluation_split", "export_grader_packets", "grid",
    "percent", "qualifies", "read_records", "run_experiment",
]
