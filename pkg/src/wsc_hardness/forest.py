"""Random-forest regression built from CART trees.

Splits maximise the reduction in squared error over midpoints of sorted
distinct values.  Ties go to the lowest feature index, then the lowest
threshold, so trees are reproducible across platforms.  Columns that are
constant over the whole training set are never offered to the split
search and do not count towards the per-split feature budget.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (DimensionMismatch, HyperparameterError, ModelFormatError,
                     ModelVersionError, NonFiniteInput)

MAGIC = "WSCHRF-FOREST"
FORMAT_VERSION = 1
# relative tolerance under which two split gains count as tied
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    max_depth: int = None
    min_samples_leaf: int = 2
    features_per_split: int = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise HyperparameterError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise HyperparameterError("min_samples_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise HyperparameterError("max_depth must be >= 0")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise HyperparameterError("features_per_split must be >= 1")

    def mtry(self, p):
        if p == 0:
            return 0
        if self.features_per_split is None:
            return max(1, math.ceil(p / 3))
        if self.features_per_split > p:
            raise HyperparameterError(
                f"features_per_split={self.features_per_split} exceeds the "
                f"{p} usable features")
        return self.features_per_split


class RegressionTree:
    """Flat-array binary tree; ``feature[k] == -1`` marks a leaf."""

    def __init__(self, feature, threshold, left, right, value, n_samples):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)
        self.n_samples = np.asarray(n_samples, dtype=np.int64)

    @property
    def node_count(self):
        return len(self.feature)

    def depth(self, node=0):
        if self.feature[node] < 0:
            return 0
        return 1 + max(self.depth(self.left[node]),
                       self.depth(self.right[node]))

    def apply(self, X):
        """Leaf index reached by each row."""
        X = np.atleast_2d(X)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.nonzero(active)[0]
            n = node[rows]
            go_left = X[rows, self.feature[n]] <= self.threshold[n]
            node[rows] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] >= 0
        return node

    def predict(self, X):
        return self.value[self.apply(X)]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in
                ("feature", "threshold", "left", "right", "value",
                 "n_samples")}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _check_xy(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
        raise DimensionMismatch(f"X {X.shape} and y {y.shape} do not align")
    if len(y) == 0:
        raise DimensionMismatch("need at least one training row")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise NonFiniteInput("training data contains NaN or inf")
    return X, y


def split_gains(x, y, min_leaf):
    """Candidate thresholds on one feature and their SSE reductions.

    Thresholds are midpoints between consecutive distinct sorted values,
    restricted to splits leaving ``min_leaf`` rows on each side.
    """
    n = len(y)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    left_n = np.arange(1, n, dtype=np.float64)
    left_sum = np.cumsum(ys)[:-1]
    total = ys.sum()
    right_sum = total - left_sum
    gains = (left_sum ** 2 / left_n + right_sum ** 2 / (n - left_n)
             - total ** 2 / n)
    ok = xs[:-1] < xs[1:]
    ok &= (left_n >= min_leaf) & (n - left_n >= min_leaf)
    pos = np.nonzero(ok)[0]
    lo, hi = xs[pos], xs[pos + 1]
    thr = lo + (hi - lo) / 2.0
    # midpoint may round onto the upper value for adjacent floats
    thr = np.where(thr >= hi, lo, thr)
    return thr, gains[pos]


def best_split(X, y, features, min_leaf):
    """(feature, threshold, gain) of the best split, or None."""
    best = None
    scale = max(1.0, float(np.sum((y - y.mean()) ** 2)))
    tol = TIE_TOL * scale
    for f in sorted(features):
        thr, gains = split_gains(X[:, f], y, min_leaf)
        if len(gains) == 0:
            continue
        top = gains.max()
        k = int(np.nonzero(gains >= top - tol)[0][0])
        if top > tol and (best is None or top > best[2] + tol):
            best = (int(f), float(thr[k]), float(top))
    return best


def fit_tree(X, y, hp=None, rng=None, candidate_features=None):
    hp = hp or ForestHyperparams(n_trees=1, bootstrap=False)
    X, y = _check_xy(X, y)
    if rng is None:
        rng = np.random.default_rng(hp.seed)
    features = np.arange(X.shape[1]) if candidate_features is None \
        else np.asarray(candidate_features, dtype=np.int64)
    mtry = hp.mtry(len(features))

    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        count.append(len(idx))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yi = y[idx]
        if (hp.max_depth is not None and depth >= hp.max_depth) \
                or len(idx) < 2 * hp.min_samples_leaf \
                or yi.max() == yi.min() or mtry == 0:
            continue
        if mtry < len(features):
            chosen = rng.choice(features, size=mtry, replace=False)
        else:
            chosen = features
        split = best_split(X[idx], yi, chosen, hp.min_samples_leaf)
        if split is None:
            continue
        f, thr, _ = split
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return RegressionTree(feature, threshold, left, right, value, count)


class ForestModel:
    def __init__(self, trees, hyperparams, schema=None, metadata=None):
        self.trees = list(trees)
        self.hyperparams = hyperparams
        self.schema = schema
        self.metadata = dict(metadata or {})

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        n_features = self.metadata.get("n_features")
        if n_features is not None and X.shape[1] != n_features:
            raise DimensionMismatch(f"expected {n_features} features, got "
                                    f"{X.shape[1]}")
        out = np.mean([t.predict(X) for t in self.trees], axis=0)
        return float(out[0]) if single else out

    def to_dict(self):
        return {
            "hyperparams": asdict(self.hyperparams),
            "schema": None if self.schema is None else self.schema.to_dict(),
            "metadata": self.metadata,
            "trees": [t.to_dict() for t in self.trees],
        }


def usable_features(X):
    """Columns that are not constant over the training rows."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        return np.arange(0)
    return np.nonzero(X.max(axis=0) != X.min(axis=0))[0]


def fit_forest(X, y, hp=ForestHyperparams(), schema=None):
    X, y = _check_xy(X, y)
    features = usable_features(X)
    hp.mtry(len(features))
    streams = np.random.SeedSequence(hp.seed).spawn(hp.n_trees)
    n = len(y)
    trees = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        if hp.bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(fit_tree(Xb, yb, hp, rng, candidate_features=features))
    meta = {"n_train": n, "n_features": int(X.shape[1]),
            "y_min": float(y.min()), "y_max": float(y.max())}
    return ForestModel(trees, hp, schema, meta)


def predict(model, x):
    return model.predict(x)


def dumps_model(model):
    body = json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))
    return f"{MAGIC} {FORMAT_VERSION}\n{body}\n"


def loads_model(text):
    from .features import FeatureSchema

    header, _, body = text.partition("\n")
    parts = header.split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise ModelFormatError("not a forest model file")
    try:
        version = int(parts[1])
    except ValueError:
        raise ModelFormatError("unreadable format version") from None
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"forest model version {version}, expected "
                                f"{FORMAT_VERSION}")
    try:
        d = json.loads(body)
        hp = ForestHyperparams(**d["hyperparams"])
        trees = [RegressionTree.from_dict(t) for t in d["trees"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"corrupted forest model: {exc}") from None
    schema = None if d.get("schema") is None \
        else FeatureSchema.from_dict(d["schema"])
    return ForestModel(trees, hp, schema, d.get("metadata"))


def save_model(model, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def importance_by_ablation(X_train, y_train, X_test, y_test, names, groups,
                           hp=ForestHyperparams()):
    """Retrain without each feature group; report held-out metrics.

    Returns ``{group: EvaluationReport}`` in the order of ``groups``.
    """
    from .evaluation import report_from_predictions

    if not groups:
        raise ValueError("no feature groups given")
    names = list(names)
    col = {n: j for j, n in enumerate(names)}
    rows = {}
    for group, members in groups.items():
        unknown = [m for m in members if m not in col]
        if unknown:
            raise KeyError(f"group {group!r} names unknown features "
                           f"{unknown[:5]}")
        keep = [j for j, n in enumerate(names) if n not in set(members)]
        model = fit_forest(np.asarray(X_train)[:, keep], y_train, hp)
        pred = model.predict(np.asarray(X_test)[:, keep])
        rows[group] = report_from_predictions(pred, y_test, tag=group)
    return rows
