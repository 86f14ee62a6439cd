"""Gradient-boosted decision trees for classification, written from scratch.

Trees are grown level-wise with exact greedy split finding on second-order
statistics.  A split of a node holding gradient/hessian sums ``G, H`` into
``(G_L, H_L)`` and ``(G_R, H_R)`` scores

    0.5 * (G_L**2 / (H_L + lam) + G_R**2 / (H_R + lam) - G**2 / (H + lam)) - gamma

and leaves get the Newton weight ``-G / (H + lam)`` shrunk by the learning rate.
Binary problems use the logistic loss with a single tree per round; multiclass
problems use the softmax loss with one tree per class per round.  The growing
loop itself is compiled (see ``_treekernel``) because trees get refit on every
training mini-batch.

Feature importance is the total split gain credited to each feature,
normalized to sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import _treekernel
from .errors import ValidationError, ShapeError

TIE_TOL = _treekernel.TIE_TOL


@dataclass
class GbtConfig:
    n_estimators: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    reg_lambda: float = 1.0
    gamma: float = 0.0
    base_score: float = 0.5
    min_child_hessian: float = 1e-6
    # "gain": accumulated boosted split gain, "entropy": one CART tree scored by information gain
    importance_mode: str = "gain"

    def __post_init__(self):
        if self.n_estimators < 0 or self.max_depth < 0:
            raise ValidationError("n_estimators and max_depth must be non-negative")
        if self.learning_rate <= 0 or self.reg_lambda < 0 or self.gamma < 0:
            raise ValidationError("need learning_rate > 0, reg_lambda >= 0, gamma >= 0")
        if not 0.0 < self.base_score < 1.0:
            raise ValidationError("base_score must lie in (0, 1)")
        if self.importance_mode not in ("gain", "entropy"):
            raise ValidationError(f"unknown importance_mode {self.importance_mode!r}")


@dataclass
class SplitDecision:
    feature: int
    threshold: float
    gain: float


# --------------------------------------------------------------------------
# entropy and information gain
# --------------------------------------------------------------------------

def entropy(p) -> float:
    """Shannon entropy in bits. ``0 * log 0`` counts as 0."""
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.size == 0 or np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1.0) > 1e-9:
        raise ValidationError("entropy needs a probability vector summing to 1")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum()) + 0.0


def _label_entropy(labels) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    _, counts = np.unique(labels, return_counts=True)
    return entropy(counts / labels.size)


def information_gain(parent, left, right) -> float:
    parent, left, right = (np.asarray(a).ravel() for a in (parent, left, right))
    if parent.size == 0:
        raise ValidationError("information gain of an empty parent")
    if not np.array_equal(np.sort(parent), np.sort(np.concatenate([left, right]))):
        raise ValidationError("left and right do not partition the parent")
    n = parent.size
    after = left.size / n * _label_entropy(left) + right.size / n * _label_entropy(right)
    return _label_entropy(parent) - after


# --------------------------------------------------------------------------
# trees
# --------------------------------------------------------------------------

@dataclass
class Tree:
    """Node arena. ``feature == -1`` marks a leaf; samples with ``x < threshold`` go left."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def apply(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[idx]
            inner = f >= 0
            if not inner.any():
                return idx
            go_left = X[rows, np.maximum(f, 0)] < self.threshold[idx]
            idx = np.where(inner, np.where(go_left, self.left[idx], self.right[idx]), idx)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=np.float64),
            gain=np.asarray(d["gain"], dtype=np.float64),
        )


def best_split(features, grad, hess, reg_lambda: float = 1.0, gamma: float = 0.0,
               min_child_hessian: float = 1e-6) -> SplitDecision | None:
    """Best regularized split of a single node, or None when no split has positive gain."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    X = np.ascontiguousarray(X)
    g = np.ascontiguousarray(grad, dtype=np.float64).ravel()
    h = np.ascontiguousarray(hess, dtype=np.float64).ravel()
    if X.shape[0] == 0:
        raise ValidationError("best_split on an empty sample set")
    if g.size != X.shape[0] or h.size != X.shape[0]:
        raise ShapeError("grad/hess length must equal the sample count")
    if np.any(h < 0):
        raise ValidationError("hessians must be non-negative")
    srt = _presort(X)
    gain, f, thr = _treekernel.node_best_split(X, srt, g, h, 0, X.shape[0], float(reg_lambda),
                                               float(gamma), float(min_child_hessian))
    if f < 0 or not gain > 0:
        return None
    return SplitDecision(int(f), float(thr), float(gain))


def _presort(X):
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int64))


# --------------------------------------------------------------------------
# single CART tree scored by information gain (importance_mode="entropy")
# --------------------------------------------------------------------------

def _entropy_rows(counts):
    tot = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(tot > 0, counts / tot, 0.0)
        term = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return term.sum(axis=-1)


def entropy_tree_gain(X, y, n_classes: int, max_depth: int) -> np.ndarray:
    """Per-feature information gain of a greedy CART tree, weighted by node share of samples."""
    n, F = X.shape
    out = np.zeros(F)
    stack = [(np.arange(n), 0)]
    while stack:
        idx, depth = stack.pop()
        if depth >= max_depth or idx.size < 2 or np.unique(y[idx]).size < 2:
            continue
        parent_h = _entropy_rows(np.bincount(y[idx], minlength=n_classes).astype(float))
        best = (0.0, -1, 0.0)
        for f in range(F):
            o = np.argsort(X[idx, f], kind="stable")
            xv, yv = X[idx, f][o], y[idx][o]
            onehot = np.eye(n_classes)[yv]
            cl = np.cumsum(onehot, axis=0)[:-1]
            cr = cl[-1:] + onehot[-1:] - cl if cl.size else cl
            ok = xv[:-1] < xv[1:]
            if not ok.any():
                continue
            nl = np.arange(1, idx.size)
            after = (nl * _entropy_rows(cl) + (idx.size - nl) * _entropy_rows(cr)) / idx.size
            ig = np.where(ok, parent_h - after, -np.inf)
            p = int(np.argmax(ig))
            if ig[p] > best[0] + TIE_TOL:
                best = (float(ig[p]), f, xv[p] + (xv[p + 1] - xv[p]) / 2.0)
        gain, f, t = best
        if f < 0:
            continue
        out[f] += idx.size / n * gain
        mask = X[idx, f] < t
        stack.append((idx[~mask], depth + 1))
        stack.append((idx[mask], depth + 1))
    return out


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------

def _softmax(raw):
    z = raw - raw.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class GbtModel:
    """Fitted ensemble.

    Node arrays are stacked as (rounds, outputs, max_nodes); ``counts[r, k]`` is
    the number of live nodes of the tree grown in round ``r`` for output ``k``.
    Binary models have one output, multiclass models one per class.
    """

    config: GbtConfig
    n_classes: int
    n_features: int
    base_margin: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    counts: np.ndarray
    feature_gain: np.ndarray
    constant: bool = False          # only one class was present at fit time
    train_logloss: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_outputs(self) -> int:
        return 1 if self.n_classes == 2 else self.n_classes

    @property
    def n_rounds(self) -> int:
        return self.counts.shape[0]

    def tree(self, r: int, k: int = 0) -> Tree:
        c = self.counts[r, k]
        return Tree(self.feature[r, k, :c].copy(), self.threshold[r, k, :c].copy(),
                    self.left[r, k, :c].copy(), self.right[r, k, :c].copy(),
                    self.value[r, k, :c].copy(), self.gain[r, k, :c].copy())

    def raw_margin(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"model expects {self.n_features} features, got shape {X.shape}")
        return _treekernel.predict_raw(X, self.base_margin, self.feature, self.threshold,
                                       self.left, self.right, self.value)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "base_margin": self.base_margin.tolist(),
            "constant": self.constant,
            "feature_gain": self.feature_gain.tolist(),
            "trees": [[self.tree(r, k).to_dict() for k in range(self.n_outputs)]
                      for r in range(self.n_rounds)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GbtModel":
        cfg = GbtConfig(**d["config"])
        K = d["n_classes"]
        model = _empty_model(cfg, K, d["n_features"], len(d["trees"]),
                             np.asarray(d["base_margin"], dtype=np.float64))
        for r, rnd in enumerate(d["trees"]):
            for k, td in enumerate(rnd):
                t = Tree.from_dict(td)
                c = t.feature.size
                model.counts[r, k] = c
                for name in ("feature", "threshold", "left", "right", "value", "gain"):
                    getattr(model, name)[r, k, :c] = getattr(t, name)
        model.feature_gain = np.asarray(d["feature_gain"], dtype=np.float64)
        model.constant = d["constant"]
        return model


def _empty_model(cfg, K, F, rounds, base) -> GbtModel:
    T = 1 if K == 2 else K
    cap = 2 ** (cfg.max_depth + 1)
    shape = (rounds, T, cap)
    return GbtModel(
        cfg, K, F, base,
        feature=np.full(shape, -1, dtype=np.int64),
        threshold=np.zeros(shape),
        left=np.full(shape, -1, dtype=np.int64),
        right=np.full(shape, -1, dtype=np.int64),
        value=np.zeros(shape),
        gain=np.zeros(shape),
        counts=np.zeros((rounds, T), dtype=np.int64),
        feature_gain=np.zeros(F),
        train_logloss=np.zeros(rounds),
    )


def _probs_from_raw(raw, n_classes):
    if n_classes == 2:
        p1 = _sigmoid(raw[:, 0])
        return np.column_stack([1.0 - p1, p1])
    return _softmax(raw)


def fit(features, labels, config: GbtConfig | None = None, n_classes: int | None = None) -> GbtModel:
    """Newton-boost a classifier on samples in rows of ``features``.

    A label vector holding a single class yields a tree-less model with
    ``constant=True`` whose margin encodes the smoothed class prior.
    """
    cfg = config or GbtConfig()
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels).astype(np.int64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ShapeError(f"features {X.shape} do not match {y.size} labels")
    if y.size < 2:
        raise ValidationError("gbdt fit needs at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise ValidationError("features contain non-finite values")
    K = max(int(n_classes if n_classes is not None else y.max() + 1), 2)
    if y.min() < 0 or y.max() >= K:
        raise ValidationError(f"labels must lie in [0, {K})")
    n, F = X.shape

    if np.unique(y).size < 2:
        prior = (np.bincount(y, minlength=K) + 1.0) / (n + K)
        margin = np.array([math.log(prior[1] / prior[0])]) if K == 2 else np.log(prior)
        model = _empty_model(cfg, K, F, 0, margin)
        model.constant = True
        return model

    base = np.array([math.log(cfg.base_score / (1.0 - cfg.base_score))]) if K == 2 else np.zeros(K)
    model = _empty_model(cfg, K, F, cfg.n_estimators, base)
    _treekernel.boost(
        X, _presort(X), y, K, base, cfg.max_depth, float(cfg.reg_lambda), float(cfg.gamma),
        float(cfg.min_child_hessian), float(cfg.learning_rate),
        model.feature, model.threshold, model.left, model.right, model.value, model.gain,
        model.counts, model.feature_gain, model.train_logloss,
    )
    if cfg.importance_mode == "entropy":
        model.feature_gain = entropy_tree_gain(X, y, K, cfg.max_depth)
    return model


def predict_proba(model: GbtModel, features) -> np.ndarray:
    return _probs_from_raw(model.raw_margin(features), model.n_classes)


def predict(model: GbtModel, features) -> np.ndarray:
    return np.argmax(predict_proba(model, features), axis=1)


def normalize_gain(gain) -> np.ndarray:
    gain = np.asarray(gain, dtype=np.float64)
    total = gain.sum()
    if total <= 0:
        return np.full(gain.size, 1.0 / gain.size)
    return gain / total


def feature_importance(model: GbtModel) -> np.ndarray:
    """Split gain per feature normalized to sum 1; uniform when nothing was split."""
    return normalize_gain(model.feature_gain)
