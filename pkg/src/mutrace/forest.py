"""Random forest over mutant feature vectors, built from scratch.

Gini-split decision trees on bootstrap samples, floor(sqrt(n_features))
candidate features per node sampled without replacement, unbounded depth,
leaves holding class-frequency distributions. Tree i draws its randomness
from an independent stream seeded with mix(seed, i), and bootstrap
indices address the rows in mutant_id order, so training is deterministic
under a fixed seed and invariant to input row order or scheduling.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateData, TooFewRows
from .histfeat import FEATURE_NAMES
from .prng import Xoshiro256, mix

CLASSES = ("L", "NL", "D")
_CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}


@dataclass(frozen=True)
class Row:
    mutant_id: str
    features: tuple  # nine floats, FEATURE_NAMES order
    label: str  # L / NL / D
    revision_id: str  # grouping key for ranking metrics


@dataclass
class TrainConfig:
    n_trees: int = 100
    min_samples_split: int = 2
    max_depth: int = None  # unbounded
    bootstrap: bool = True
    ablate_mut_op: bool = False

    def feature_indices(self):
        start = 1 if self.ablate_mut_op else 0
        return list(range(start, len(FEATURE_NAMES)))


@dataclass
class ForestModel:
    trees: list  # nested split dicts
    n_trees: int
    seed: int
    config: TrainConfig
    importance: list  # accumulated impurity decrease per feature, unnormalized
    classes: tuple = CLASSES

    def to_json(self):
        return {
            "classes": list(self.classes),
            "n_trees": self.n_trees,
            "seed": self.seed,
            "ablate_mut_op": self.config.ablate_mut_op,
            "importance": list(self.importance),
            "trees": self.trees,
        }

    @classmethod
    def from_json(cls, obj):
        config = TrainConfig(n_trees=obj["n_trees"],
                             ablate_mut_op=obj["ablate_mut_op"])
        return cls(obj["trees"], obj["n_trees"], obj["seed"], config,
                   obj["importance"], tuple(obj["classes"]))


def _gini(counts, total):
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float(np.dot(p, p))


def _build_tree(X, y, indices, rng, config, feature_indices, importance, n_root,
                depth=0):
    counts = np.bincount(y[indices], minlength=len(CLASSES)).astype(float)
    total = float(len(indices))
    node_gini = _gini(counts, total)
    stop = (
        node_gini == 0.0
        or len(indices) < config.min_samples_split
        or (config.max_depth is not None and depth >= config.max_depth)
    )
    if not stop:
        k = int(math.floor(math.sqrt(len(feature_indices))))
        candidates = rng.sample(feature_indices, max(k, 1))
        best = None  # (gain, feature, threshold, order, split_pos)
        for f in candidates:
            values = X[indices, f]
            order = np.argsort(values, kind="stable")
            sv = values[order]
            sy = y[indices][order]
            boundaries = np.nonzero(sv[:-1] != sv[1:])[0]
            if len(boundaries) == 0:
                continue
            one_hot = np.zeros((len(sy), len(CLASSES)))
            one_hot[np.arange(len(sy)), sy] = 1.0
            prefix = np.cumsum(one_hot, axis=0)
            left = prefix[boundaries]
            right = counts - left
            n_left = left.sum(axis=1)
            n_right = total - n_left
            gini_left = 1.0 - ((left / n_left[:, None]) ** 2).sum(axis=1)
            gini_right = 1.0 - ((right / n_right[:, None]) ** 2).sum(axis=1)
            gains = node_gini - (n_left / total) * gini_left \
                - (n_right / total) * gini_right
            pos = int(np.argmax(gains))  # first max: smallest threshold
            gain = float(gains[pos])
            threshold = float((sv[boundaries[pos]] + sv[boundaries[pos] + 1]) / 2.0)
            key = (-gain, f, threshold)
            if best is None or key < best[0]:
                best = (key, gain, f, threshold)
        if best is not None and best[1] > 0.0:
            _, gain, f, threshold = best
            mask = X[indices, f] <= threshold
            left_idx = indices[mask]
            right_idx = indices[~mask]
            if len(left_idx) and len(right_idx):
                importance[f] += (total / n_root) * gain
                return {
                    "feature": f,
                    "threshold": threshold,
                    "left": _build_tree(X, y, left_idx, rng, config,
                                        feature_indices, importance, n_root,
                                        depth + 1),
                    "right": _build_tree(X, y, right_idx, rng, config,
                                         feature_indices, importance, n_root,
                                         depth + 1),
                }
    dist = (counts / total).tolist() if total else [0.0] * len(CLASSES)
    return {"leaf": dist}


def _as_matrix(rows):
    rows = sorted(rows, key=lambda r: r.mutant_id)
    X = np.asarray([r.features for r in rows], dtype=float)
    y = np.asarray([_CLASS_INDEX[r.label] for r in rows], dtype=int)
    return rows, X, y


def train(rows, seed, config=None):
    """Fit a forest; deterministic in (rows-as-set, seed, config)."""
    config = config or TrainConfig()
    if len({r.label for r in rows}) < 2:
        raise DegenerateData("training data has fewer than 2 classes")
    _, X, y = _as_matrix(rows)
    n = len(X)
    feature_indices = config.feature_indices()
    importance = [0.0] * len(FEATURE_NAMES)
    trees = []
    for i in range(config.n_trees):
        rng = Xoshiro256(mix(seed, i))
        if config.bootstrap:
            indices = np.asarray([rng.randbelow(n) for _ in range(n)], dtype=int)
        else:
            indices = np.arange(n)
        trees.append(_build_tree(X, y, indices, rng, config, feature_indices,
                                 importance, float(n)))
    return ForestModel(trees, config.n_trees, seed, config, importance)


def _tree_proba(tree, x):
    node = tree
    while "leaf" not in node:
        node = node["left"] if x[node["feature"]] <= node["threshold"] \
            else node["right"]
    return node["leaf"]


def predict_proba(model, features):
    """Mean of per-tree leaf distributions; always sums to 1."""
    acc = [0.0] * len(model.classes)
    for tree in model.trees:
        dist = _tree_proba(tree, features)
        for i, p in enumerate(dist):
            acc[i] += p
    return [p / len(model.trees) for p in acc]


def predict(model, features):
    proba = predict_proba(model, features)
    return model.classes[max(range(len(proba)), key=lambda i: (proba[i], -i))]


def feature_importance(model):
    """Mean impurity decrease per feature, normalized to sum to 1."""
    raw = [v / model.n_trees for v in model.importance]
    total = sum(raw)
    if total == 0:
        return {name: 0.0 for name in FEATURE_NAMES}
    return {name: raw[i] / total for i, name in enumerate(FEATURE_NAMES)}


@dataclass
class CVResult:
    predictions: list  # per repeat: {mutant_id: proba list}
    per_repeat_metrics: list
    metrics: dict

    def to_json(self):
        return {
            "metrics": self.metrics,
            "per_repeat_metrics": self.per_repeat_metrics,
            "predictions": self.predictions,
        }


def stratified_folds(rows, k, rng):
    """Fold index per row (rows already in canonical order): shuffle each
    label stratum, deal round-robin; fold sizes per stratum differ by at
    most one."""
    fold_of = {}
    for label in CLASSES:
        members = [i for i, r in enumerate(rows) if r.label == label]
        rng.shuffle(members)
        for pos, row_index in enumerate(members):
            fold_of[row_index] = pos % k
    return fold_of


def cross_validate(rows, seed, k=5, repeats=10, config=None):
    """Stratified k-fold CV repeated ``repeats`` times.

    Every row is predicted exactly once per repeat; accuracy metrics and
    MAP are averaged over repeats, and per-repeat predictions are kept
    for ranking diagnostics.
    """
    from . import evalmetrics

    config = config or TrainConfig()
    if len(rows) < k:
        raise TooFewRows("%d rows for %d folds" % (len(rows), k))
    if len({r.label for r in rows}) < 2:
        raise DegenerateData("cross-validation needs at least 2 classes")
    rows = sorted(rows, key=lambda r: r.mutant_id)

    predictions = []
    per_repeat = []
    for rep in range(repeats):
        fold_rng = Xoshiro256(mix(seed, 0x10000 + rep))
        fold_of = stratified_folds(rows, k, fold_rng)
        proba = {}
        for fold in range(k):
            train_rows = [r for i, r in enumerate(rows) if fold_of[i] != fold]
            test_rows = [(i, r) for i, r in enumerate(rows) if fold_of[i] == fold]
            if not test_rows:
                continue
            model = train(train_rows, mix(seed, rep * k + fold + 1), config)
            for _, r in test_rows:
                proba[r.mutant_id] = predict_proba(model, r.features)
        predictions.append(proba)

        predicted = [CLASSES[int(np.argmax(proba[r.mutant_id]))] for r in rows]
        labels = [r.label for r in rows]
        acc = evalmetrics.accuracy_suite(predicted, labels)
        ranked = evalmetrics.ranked_revisions(
            [(r.revision_id, r.mutant_id, proba[r.mutant_id][0], r.label == "L")
             for r in rows]
        )
        acc["map"] = evalmetrics.mean_average_precision(ranked)
        per_repeat.append(acc)

    metrics = evalmetrics.average_metric_bundles(per_repeat)
    return CVResult(predictions, per_repeat, metrics)
