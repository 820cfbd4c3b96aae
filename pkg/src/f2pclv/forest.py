"""Random-forest regression built from scratch on CART-style trees.

Trees greedily pick the split with the largest variance reduction, each
tree trains on a bootstrap resample, and split candidates draw from a
random feature subset. Prediction averages the trees. The classifier
variant trains on 0/1 targets and lets each tree vote its leaf majority.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    bootstrap: bool = True
    # 'sqrt' samples ceil(sqrt(n_features)) candidates per split; 'all'
    # considers every feature.
    features_per_split: str = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise DataError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise DataError("min_samples_leaf must be >= 1")
        if self.features_per_split not in ("sqrt", "all"):
            raise DataError("features_per_split must be 'sqrt' or 'all'")


def _best_split(x, y, feature_ids, min_leaf):
    """(feature, threshold, gain) minimizing child SSE; None if no valid split."""
    n = len(y)
    total = y.sum()
    total_sq = float(np.sum((y - y.mean()) ** 2))
    best = None
    for f in feature_ids:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y[order]
        cum = np.cumsum(ys)
        cum_sq = np.cumsum(ys * ys)
        # candidate split after position i (1-based count on the left)
        left_n = np.arange(1, n)
        valid = (xs[1:] > xs[:-1]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
        if not valid.any():
            continue
        left_sum = cum[:-1]
        left_sq = cum_sq[:-1]
        right_sum = total - left_sum
        right_n = n - left_n
        sse = (left_sq - left_sum**2 / left_n) + (
            (cum_sq[-1] - left_sq) - right_sum**2 / right_n
        )
        sse = np.where(valid, sse, np.inf)
        i = int(np.argmin(sse))
        gain = total_sq - float(sse[i])
        if np.isfinite(sse[i]) and (best is None or gain > best[2]):
            threshold = 0.5 * (xs[i] + xs[i + 1])
            best = (f, float(threshold), gain)
    return best


def _grow_tree(x, y, config, rng, depth=0):
    node = {"n": int(len(y)), "value": float(y.mean())}
    if (
        len(y) < 2 * config.min_samples_leaf
        or (config.max_depth is not None and depth >= config.max_depth)
        or float(np.var(y)) == 0.0
    ):
        return node
    n_features = x.shape[1]
    if config.features_per_split == "sqrt":
        k = int(np.ceil(np.sqrt(n_features)))
        feature_ids = rng.choice(n_features, size=k, replace=False)
    else:
        feature_ids = np.arange(n_features)
    split = _best_split(x, y, feature_ids, config.min_samples_leaf)
    if split is None or split[2] <= 0:
        return node
    f, threshold, _ = split
    mask = x[:, f] <= threshold
    node["feature"] = int(f)
    node["threshold"] = threshold
    node["left"] = _grow_tree(x[mask], y[mask], config, rng, depth + 1)
    node["right"] = _grow_tree(x[~mask], y[~mask], config, rng, depth + 1)
    return node


def _tree_predict(node, x):
    out = np.empty(len(x))
    idx = np.arange(len(x))
    stack = [(node, idx)]
    while stack:
        nd, rows = stack.pop()
        if "feature" not in nd:
            out[rows] = nd["value"]
            continue
        mask = x[rows, nd["feature"]] <= nd["threshold"]
        stack.append((nd["left"], rows[mask]))
        stack.append((nd["right"], rows[~mask]))
    return out


@dataclass
class FittedForest:
    config: ForestConfig
    trees: list[dict]
    tree_seeds: list[int] = field(default_factory=list)
    classifier: bool = False
    n_features: int = 0


def fit_random_forest(x, y, config: ForestConfig = ForestConfig(), classifier: bool = False) -> FittedForest:
    """Train an ensemble of regression trees on bootstrap resamples."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) == 0 or len(x) != len(y):
        raise DataError("x must be a non-empty 2-d array aligned with y")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("features and targets must be finite")
    root = np.random.SeedSequence(config.seed)
    seeds = [int(s.generate_state(1)[0]) for s in root.spawn(config.n_trees)]
    trees = []
    n = len(y)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        if config.bootstrap:
            rows = rng.integers(0, n, size=n)
            trees.append(_grow_tree(x[rows], y[rows], config, rng))
        else:
            trees.append(_grow_tree(x, y, config, rng))
    return FittedForest(
        config=config,
        trees=trees,
        tree_seeds=seeds,
        classifier=classifier,
        n_features=x.shape[1],
    )


def predict(forest: FittedForest, x) -> np.ndarray:
    """Mean of tree outputs; for classifiers, the fraction of trees voting 1."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != forest.n_features:
        raise DataError(f"x must have {forest.n_features} feature columns")
    votes = np.zeros(len(x))
    for tree in forest.trees:
        leaf = _tree_predict(tree, x)
        votes += (leaf > 0.5).astype(float) if forest.classifier else leaf
    return votes / len(forest.trees)
