"""Dense feed-forward network with hand-derived backpropagation.

Activations are laid out features x batch: a layer computes
``z = W @ A_prev + b`` and ``A = g(z)`` with ``W`` of shape (n_out, n_in).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numeric
from .errors import ShapeError, ValidationError

PROB_CLAMP = 1e-7
ACTIVATIONS = ("relu", "sigmoid", "softmax", "identity")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softmax(z):
    e = np.exp(z - z.max(axis=0, keepdims=True))
    return e / e.sum(axis=0, keepdims=True)


def activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return _sigmoid(z)
    if name == "softmax":
        return _softmax(z)
    if name == "identity":
        return z
    raise ValidationError(f"unknown activation {name!r}")


def activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Elementwise derivative dA/dz for the hidden-layer activations."""
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "identity":
        return np.ones_like(z)
    raise ValidationError(f"activation {name!r} is only supported on the output layer")


@dataclass
class DenseLayer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str = "relu"
    boosted: bool = False
    importance: np.ndarray | None = None
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.weights = numeric.as_matrix(self.weights)
        self.bias = numeric.as_matrix(self.bias).reshape(-1, 1)
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(f"bias {self.bias.shape} does not match weights {self.weights.shape}")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}")

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]


@dataclass
class XbnetModel:
    layers: list
    n_classes: int
    feature_names: list = field(default_factory=list)
    class_names: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.n_in != prev.n_out:
                raise ShapeError(f"layer widths do not chain: {prev.n_out} -> {nxt.n_in}")
        last = self.layers[-1]
        if self.n_classes == 2:
            ok = last.n_out == 1 and last.activation == "sigmoid"
        else:
            ok = last.n_out == self.n_classes and last.activation == "softmax"
        if not ok:
            raise ShapeError(
                f"output layer ({last.n_out} x {last.activation}) does not fit {self.n_classes} classes"
            )

    @property
    def n_features(self) -> int:
        return self.layers[0].n_in

    @property
    def sizes(self) -> list:
        return [layer.n_out for layer in self.layers]

    def to_dict(self, include_importance: bool = False) -> dict:
        layers = []
        for layer in self.layers:
            d = {
                "n_in": layer.n_in,
                "n_out": layer.n_out,
                "activation": layer.activation,
                "boosted": layer.boosted,
                "weights": layer.weights.tolist(),
                "bias": layer.bias.ravel().tolist(),
            }
            if include_importance and layer.importance is not None:
                d["importance"] = layer.importance.tolist()
            layers.append(d)
        return {
            "n_classes": self.n_classes,
            "feature_names": list(self.feature_names),
            "class_names": list(self.class_names),
            "layers": layers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "XbnetModel":
        layers = []
        for ld in d["layers"]:
            w = np.asarray(ld["weights"], dtype=np.float64).reshape(ld["n_out"], ld["n_in"])
            imp = ld.get("importance")
            layers.append(DenseLayer(
                weights=w,
                bias=np.asarray(ld["bias"], dtype=np.float64).reshape(-1, 1),
                activation=ld["activation"],
                boosted=ld["boosted"],
                importance=None if imp is None else np.asarray(imp, dtype=np.float64),
            ))
        return cls(layers, d["n_classes"], d.get("feature_names", []), d.get("class_names", []))


@dataclass
class LossValue:
    data_loss: float
    reg_loss: float

    @property
    def total(self) -> float:
        return self.data_loss + self.reg_loss


def build_model(n_features: int, sizes, n_classes: int, rng: np.random.Generator,
                hidden_activation: str = "relu", feature_names=(), class_names=()) -> XbnetModel:
    """Layers of the given widths; the last width must be the head (1 for binary, K otherwise).

    Weights start uniform in +-sqrt(1/n_in), biases at zero.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValidationError("need at least one layer")
    layers = []
    n_in = n_features
    for i, n_out in enumerate(sizes):
        last = i == len(sizes) - 1
        act = ("sigmoid" if n_classes == 2 else "softmax") if last else hidden_activation
        bound = np.sqrt(1.0 / n_in)
        layers.append(DenseLayer(numeric.rng_uniform(rng, -bound, bound, (n_out, n_in)),
                                 np.zeros((n_out, 1)), act))
        n_in = n_out
    return XbnetModel(layers, n_classes, list(feature_names), list(class_names))


def forward(model: XbnetModel, X: np.ndarray, train_mode: bool = False) -> np.ndarray:
    A = numeric.as_matrix(X)
    if A.shape[0] != model.n_features:
        raise ShapeError(f"model expects {model.n_features} features, input has {A.shape[0]}")
    for layer in model.layers:
        z = numeric.add_bias_rows(numeric.matmul(layer.weights, A), layer.bias)
        out = activate(layer.activation, z)
        if train_mode:
            layer.cache = {"A_prev": A, "z": z, "A": out}
        A = out
    return A


def one_hot_targets(y, n_classes: int) -> np.ndarray:
    """Targets in network layout: (1, batch) for binary, (K, batch) otherwise."""
    y = np.asarray(y, dtype=np.int64).ravel()
    if n_classes == 2:
        return y.astype(np.float64).reshape(1, -1)
    return np.eye(n_classes)[:, y]


def compute_cost(model: XbnetModel, Y_hat, Y, lam: float = 0.0, m: int | None = None) -> LossValue:
    """Cross-entropy over ``m`` samples plus ``lam / (2m)`` times the summed squared weights."""
    Y_hat = numeric.as_matrix(Y_hat)
    Y = numeric.as_matrix(Y)
    if Y_hat.shape != Y.shape:
        raise ShapeError(f"predictions {Y_hat.shape} and targets {Y.shape} differ in shape")
    m = Y.shape[1] if m is None else m
    P = np.clip(Y_hat, PROB_CLAMP, 1.0 - PROB_CLAMP)
    if Y.shape[0] == 1:
        data = -np.sum(Y * np.log(P) + (1.0 - Y) * np.log(1.0 - P)) / m
    else:
        data = -np.sum(Y * np.log(P)) / m
    reg = lam / (2.0 * m) * sum(float(np.sum(layer.weights ** 2)) for layer in model.layers)
    return LossValue(float(data), float(reg))


def backward(model: XbnetModel, Y_hat, Y, lam: float = 0.0, m: int | None = None) -> list:
    """Gradients ``(dW, db)`` per layer of the cost computed by ``compute_cost``.

    For sigmoid + BCE and softmax + cross-entropy the output delta is
    ``(Y_hat - Y) / m``; the L2 term contributes ``(lam / m) * W``.
    """
    if any("A_prev" not in layer.cache for layer in model.layers):
        raise ValidationError("backward needs a preceding forward pass in train mode")
    Y_hat = numeric.as_matrix(Y_hat)
    Y = numeric.as_matrix(Y)
    if Y_hat.shape != Y.shape:
        raise ShapeError(f"predictions {Y_hat.shape} and targets {Y.shape} differ in shape")
    m = Y.shape[1] if m is None else m
    grads = [None] * len(model.layers)
    dZ = (Y_hat - Y) / m
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        dW = dZ @ layer.cache["A_prev"].T + (lam / m) * layer.weights
        db = dZ.sum(axis=1, keepdims=True)
        grads[i] = (dW, db)
        if i > 0:
            prev = model.layers[i - 1]
            dZ = (layer.weights.T @ dZ) * activation_grad(prev.activation, prev.cache["z"], prev.cache["A"])
    return grads


def predict_proba(model: XbnetModel, X) -> np.ndarray:
    """Class probabilities, samples x classes."""
    out = forward(model, X)
    if model.n_classes == 2:
        return np.vstack([1.0 - out[0], out[0]]).T
    return out.T


def predict(model: XbnetModel, X):
    """Returns ``(labels, probabilities)``. Ties go to the lowest class index."""
    proba = predict_proba(model, X)
    if model.n_classes == 2:
        labels = (proba[:, 1] > 0.5).astype(np.int64)
    else:
        labels = np.argmax(proba, axis=1)
    return labels, proba


def strip_training_state(model: XbnetModel) -> XbnetModel:
    """Drop importances and cached activations; inference only needs weights and biases."""
    for layer in model.layers:
        layer.importance = None
        layer.cache = {}
    return model
