"""Random forest over per-window feature averages.

Written directly on numpy so the fitted trees can be dumped to plain JSON and
re-evaluated by anyone without the library.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Label, LabeledSample, Target, average_features
from .schema import FeatureWindow

FORMAT_TAG = "phenollm-forest/1"


class EmptyTrainingSet(ValueError):
    pass


class BorderlineSamplePresent(ValueError):
    pass


@dataclass(frozen=True)
class ForestConfig:
    tree_count: int = 100
    max_depth: int = 8
    min_samples_split: int = 2
    features_per_split: int | str = "sqrt"
    seed: int = 0
    imputation: str = "TrainMean"
    tie_break: str = Label.NEGATIVE.value

    def __post_init__(self):
        if self.tree_count < 1:
            raise ValueError("tree_count must be >= 1")
        if self.max_depth < 0 or self.min_samples_split < 2:
            raise ValueError("max_depth must be >= 0 and min_samples_split >= 2")
        if self.imputation != "TrainMean":
            raise ValueError(f"unsupported imputation {self.imputation!r}")
        if self.tie_break not in (Label.NEGATIVE.value, Label.POSITIVE.value):
            raise ValueError("tie_break must be Negative or Positive")
        if isinstance(self.features_per_split, str) and self.features_per_split != "sqrt":
            raise ValueError("features_per_split must be a count or 'sqrt'")

    def subset_size(self, n_features: int) -> int:
        if self.features_per_split == "sqrt":
            return max(1, int(math.isqrt(n_features)))
        return max(1, min(int(self.features_per_split), n_features))


# A tree is a flat list of nodes. Internal: {"feature", "threshold", "left", "right"};
# leaf: {"counts": [negative, positive]}. Node 0 is the root; x <= threshold goes left.
Tree = list[dict]


@dataclass(frozen=True)
class TrainedForest:
    trees: tuple[Tree, ...]
    column_means: tuple[float, ...]
    config: ForestConfig
    feature_labels: tuple[str, ...] = ()
    target: Target = Target.DEPRESSION

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "config": asdict(self.config),
            "target": self.target.value,
            "feature_labels": list(self.feature_labels),
            "column_means": list(self.column_means),
            "trees": [list(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedForest":
        if d.get("format") != FORMAT_TAG:
            raise ValueError(f"not a forest dump: format={d.get('format')!r}")
        return cls(
            trees=tuple(d["trees"]),
            column_means=tuple(d["column_means"]),
            config=ForestConfig(**d["config"]),
            feature_labels=tuple(d["feature_labels"]),
            target=Target(d["target"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TrainedForest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _gini(counts: np.ndarray) -> np.ndarray:
    total = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / total[..., None]
    return np.where(total > 0, 1.0 - (p ** 2).sum(axis=-1), 0.0)


def _best_split(X: np.ndarray, y: np.ndarray, features: np.ndarray):
    """Lowest weighted Gini over the given features; ties keep the earliest candidate."""
    n = len(y)
    parent = float(_gini(np.bincount(y, minlength=2).astype(float)))
    best = (parent, None, None)
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        pos_left = np.cumsum(ys)[:-1].astype(float)
        n_left = np.arange(1, n, dtype=float)
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            continue
        left = np.stack([n_left - pos_left, pos_left], axis=1)
        right = np.stack([(n - n_left) - (ys.sum() - pos_left), ys.sum() - pos_left], axis=1)
        score = (n_left * _gini(left) + (n - n_left) * _gini(right)) / n
        score = np.where(valid, score, np.inf)
        i = int(np.argmin(score))
        if score[i] < best[0] - 1e-12:
            best = (float(score[i]), int(f), float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow(X, y, cfg: ForestConfig, rng: np.random.Generator) -> Tree:
    nodes: Tree = []
    k = cfg.subset_size(X.shape[1])

    def build(idx: np.ndarray, depth: int) -> int:
        me = len(nodes)
        counts = np.bincount(y[idx], minlength=2)
        nodes.append({"counts": [int(counts[0]), int(counts[1])]})
        if depth >= cfg.max_depth or len(idx) < cfg.min_samples_split or counts.min() == 0:
            return me
        features = rng.choice(X.shape[1], size=k, replace=False)
        _, f, thr = _best_split(X[idx], y[idx], features)
        if f is None:
            return me
        go_left = X[idx, f] <= thr
        left = build(idx[go_left], depth + 1)
        right = build(idx[~go_left], depth + 1)
        nodes[me] = {"feature": f, "threshold": thr, "left": left, "right": right}
        return me

    build(np.arange(len(y)), 0)
    return nodes


def feature_matrix(samples: Sequence[LabeledSample]) -> np.ndarray:
    return np.array([average_features(s.window) for s in samples], dtype=float)


def impute(X: np.ndarray, means: Sequence[float]) -> np.ndarray:
    X = np.array(X, dtype=float, copy=True)
    rows, cols = np.nonzero(np.isnan(X))
    X[rows, cols] = np.asarray(means, dtype=float)[cols]
    return X


def train_forest(
    train: Sequence[LabeledSample],
    config: ForestConfig = ForestConfig(),
    target: Target | str = Target.DEPRESSION,
) -> TrainedForest:
    """Fit on bootstrap resamples; sample order does not matter (samples are sorted by key)."""
    target = Target(target)
    if not train:
        raise EmptyTrainingSet("no training samples")
    labels = [s.label_for(target) for s in train]
    if Label.BORDERLINE in labels:
        raise BorderlineSamplePresent("training set contains Borderline samples")
    ordered = sorted(train, key=lambda s: s.key)
    X = feature_matrix(ordered)
    y = np.array([s.label_for(target) is Label.POSITIVE for s in ordered], dtype=np.int64)
    present = ~np.isnan(X)
    counts = present.sum(axis=0)
    # a column missing from every training sample is imputed with 0
    means = np.divide(np.where(present, X, 0.0).sum(axis=0), counts,
                      out=np.zeros(X.shape[1]), where=counts > 0)
    X = impute(X, means)

    trees = []
    for child in np.random.SeedSequence(config.seed).spawn(config.tree_count):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, len(y), size=len(y))
        trees.append(_grow(X[boot], y[boot], config, rng))
    schema = ordered[0].window.schema
    return TrainedForest(tuple(trees), tuple(float(m) for m in means), config,
                         tuple(schema.labels), target)


def tree_vote(tree: Tree, x: Sequence[float]) -> int:
    """1 for Positive, 0 for Negative; a tied leaf votes Negative."""
    node = tree[0]
    while "counts" not in node:
        node = tree[node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]]
    neg, pos = node["counts"]
    return int(pos > neg)


def predict_features(forest: TrainedForest, x: Sequence[float]) -> tuple[Label, float]:
    x = impute(np.asarray(x, dtype=float)[None, :], forest.column_means)[0]
    votes = sum(tree_vote(t, x) for t in forest.trees)
    share = votes / len(forest.trees)
    if share > 0.5:
        return Label.POSITIVE, share
    if share < 0.5:
        return Label.NEGATIVE, share
    return Label(forest.config.tie_break), share


def predict(forest: TrainedForest, window: FeatureWindow) -> tuple[Label, float]:
    return predict_features(forest, average_features(window))


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    n: int
    predictions: tuple[str, ...] = field(default=())


def evaluate(forest: TrainedForest, samples: Sequence[LabeledSample]) -> Evaluation:
    preds = [predict(forest, s.window)[0] for s in samples]
    correct = sum(p is s.label_for(forest.target) for p, s in zip(preds, samples))
    return Evaluation(correct / len(samples) if samples else float("nan"), len(samples),
                      tuple(p.value for p in preds))
