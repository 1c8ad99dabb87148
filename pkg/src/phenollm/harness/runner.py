"""Running the strategy x format x model grid over a test set."""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from ..dataset import DatasetSplit, LabeledSample, balanced_sample, load_dataset
from ..interpret import extract_classification, grade_response
from ..interpret.classify import UNPARSEABLE
from ..llmgate import BackendConfig, Gateway, GatewayError, RequestContext
from ..llmgate.mock import MissingLabel
from ..prompts import Strategy, build_prompt, prompt_hash
from ..schema import PAPER_SCHEMA, FeatureSchema
from ..tables import DataFormat
from .config import ExperimentConfig
from .records import RecordLog, RunRecord, read_records

logger = logging.getLogger(__name__)


class AbortedAllCells(RuntimeError):
    pass


# Replies from these strategies are free text worth grading against the data.
GRADED = frozenset({Strategy.COT, Strategy.COT_EXP, Strategy.COT_DSM, Strategy.REASONING})


def evaluation_split(config: ExperimentConfig, schema: FeatureSchema = PAPER_SCHEMA) -> DatasetSplit:
    pool = load_dataset(config.dataset_path, schema, window_length=config.window_length)
    split = balanced_sample(pool, config.per_year, config.seed, config.target)
    test = sorted(split.test, key=lambda s: s.key)
    if config.max_samples is not None:
        test = test[: config.max_samples]
    return DatasetSplit(test=test, train=split.train)


def grid(config: ExperimentConfig, samples: Sequence[LabeledSample]):
    """Cells in canonical order: sample, strategy, format, backend, repetition."""
    return list(itertools.product(
        samples, config.strategies, config.formats, config.backends, range(config.repetitions)
    ))


def _key(cell) -> tuple[str, str, str, str, int]:
    sample, strategy, fmt, backend, rep = cell
    return (sample.sample_id, strategy.value, fmt.value, backend.model_name, rep)


def run_cell(
    gateway: Gateway,
    sample: LabeledSample,
    strategy: Strategy,
    fmt: DataFormat,
    backend: BackendConfig,
    repetition: int,
    target,
) -> RunRecord:
    bundle = build_prompt(sample.window, strategy, fmt, target=target)
    prompt = bundle.rendered
    label = sample.label_for(target).value
    reply, outcome, report, latency, error = "", UNPARSEABLE, None, 0.0, None
    try:
        result = gateway.complete(prompt, RequestContext(label, sample.window, repetition))
        reply, latency = result.text, result.latency_ms
    except (GatewayError, MissingLabel) as exc:
        error = f"{type(exc).__name__}: {exc}"
        logger.warning("cell %s/%s/%s/%s failed: %s", sample.sample_id, strategy.value,
                       fmt.value, backend.model_name, error)
    if error is None:
        outcome = extract_classification(reply)
        if strategy in GRADED:
            report = grade_response(reply, sample.window).to_dict()
    return RunRecord(
        sample_id=sample.sample_id, strategy=strategy.value, format=fmt.value,
        model=backend.model_name, repetition=repetition,
        prompt_hash=prompt_hash(prompt), prompt=prompt, reply=reply,
        outcome=outcome, report=report, true_label=label,
        latency_ms=latency, temperature=backend.temperature, error=error,
    )


def run_experiment(
    config: ExperimentConfig,
    *,
    samples: Sequence[LabeledSample] | None = None,
    on_record: Callable[[RunRecord], None] | None = None,
    gateway_factory: Callable[[BackendConfig], Gateway] | None = None,
) -> list[RunRecord]:
    """Run every grid cell not already in the record log, appending as it goes.

    Records are written in grid order, so an interrupted log is always a prefix
    of the complete one and a restart simply carries on. ``on_record`` is called
    after each append (raising from it interrupts the run).
    """
    if samples is None:
        samples = evaluation_split(config).test
    cells = grid(config, samples)
    done = {r.cell: r for r in read_records(config.records_path, repair=True)}

    def make(backend: BackendConfig) -> Gateway:
        if gateway_factory is not None:
            return gateway_factory(backend)
        return Gateway(backend, cache_dir=config.cache_path, replay_only=config.replay_only)

    gateways = {b.model_name: make(b) for b in config.backends}
    pending = [c for c in cells if _key(c) not in done]
    logger.info("%d cells, %d already recorded", len(cells), len(cells) - len(pending))
    workers = max(b.max_in_flight for b in config.backends)

    def work(cell):
        sample, strategy, fmt, backend, rep = cell
        return run_cell(gateways[backend.model_name], sample, strategy, fmt, backend, rep,
                        config.target)

    pool = ThreadPoolExecutor(workers)
    try:
        with RecordLog(config.records_path) as log:
            # map yields in submission order, keeping the log in grid order
            for record in pool.map(work, pending):
                log.append(record)
                done[record.cell] = record
                if on_record is not None:
                    on_record(record)
    finally:
        pool.shutdown(wait=True, cancel_futures=True)
        for gw in gateways.values():
            gw.close()

    records = [done[_key(c)] for c in cells]
    if records and all(r.error is not None for r in records):
        raise AbortedAllCells(f"all {len(records)} calls failed; first error: {records[0].error}")
    return records
