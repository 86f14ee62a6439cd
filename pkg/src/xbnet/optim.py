"""Boosted gradient descent.

Each mini-batch runs a forward pass; for every boosted layer a gradient-boosted
tree is refit on that layer's activations against the batch labels and its
smoothed feature importance is stored on the layer.  After backprop the base
optimizer (SGD or Adam) updates weights and biases, and boosted layers then get
an additive correction: output neuron ``j``'s incoming weight row grows by
``importance[j] * phi(W)``, where ``phi(W)`` brings the importance down to the
magnitude of the smallest nonzero weight.

The first layer's weights start from the importance of a tree fit on the raw
training data.  A single tree slot is shared by all layers and batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import data, gbdt, network, numeric
from .errors import DivergenceError, NonFiniteError, ShapeError, ScaleError, ValidationError

INIT_NOISE = 0.01


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 100
    batch_size: int = 32
    l2_lambda: float = 0.0
    epsilon: float = 0.001
    boosted_layers: int = 1
    base_optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    tree: gbdt.GbtConfig = field(default_factory=gbdt.GbtConfig)
    tree_refit_interval: int = 1
    phi_mode: str = "literal"
    seed: int = 42

    def validate(self, n_layers: int) -> None:
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be positive")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be non-negative")
        if not 0 <= self.boosted_layers <= n_layers:
            raise ValidationError(f"boosted_layers must lie in [0, {n_layers}]")
        if self.batch_size < 1 or self.tree_refit_interval < 1 or self.epochs < 0:
            raise ValidationError("batch_size and tree_refit_interval must be >= 1, epochs >= 0")
        if self.base_optimizer not in ("sgd", "adam"):
            raise ValidationError(f"unknown base optimizer {self.base_optimizer!r}")
        if self.phi_mode not in ("literal", "floor_exponent"):
            raise ValidationError(f"unknown phi_mode {self.phi_mode!r}")


@dataclass
class TrainTrace:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    train_accuracy: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.train_loss)

    def rows(self):
        for i in range(len(self)):
            yield (i + 1, self.train_loss[i], self.val_loss[i],
                   self.train_accuracy[i], self.val_accuracy[i])


class AdamState:
    def __init__(self, shape):
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0


def adam_update(state: AdamState, param: np.ndarray, grad: np.ndarray, lr: float,
                beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One bias-corrected Adam step applied to ``param`` in place."""
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = state.v / (1.0 - beta2 ** state.t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


def smooth_importance(f, eps: float) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    return (f + eps) / (f.sum() + f.size * eps)


def phi_scale(w, mode: str = "literal") -> float:
    """``10 ** log10(m)`` for the smallest nonzero ``|w|`` entry ``m``.

    ``mode="floor_exponent"`` rounds the exponent down to an integer instead.
    """
    a = np.abs(np.asarray(w, dtype=np.float64))
    nz = a[a > 0]
    if nz.size == 0:
        raise ScaleError("phi scale of an all-zero weight matrix")
    exponent = math.log10(float(nz.min()))
    if mode == "floor_exponent":
        exponent = math.floor(exponent)
    return 10.0 ** exponent


def init_first_layer(model: network.XbnetModel, X, y, tree_config: gbdt.GbtConfig,
                     rng: np.random.Generator) -> gbdt.GbtModel:
    """Seed every row of the first weight matrix with the input-feature importance.

    ``X`` is features x samples.  Each row gets independent uniform noise of
    +-0.01 so hidden units do not start identical.  Returns the fitted tree.
    """
    first = model.layers[0]
    tree = gbdt.fit(np.asarray(X).T, y, tree_config, n_classes=model.n_classes)
    f = gbdt.feature_importance(tree)
    noise = numeric.rng_uniform(rng, -INIT_NOISE, INIT_NOISE, first.weights.shape)
    first.weights = f[None, :] + noise
    first.bias = np.zeros_like(first.bias)
    return tree


def boosted_step(model: network.XbnetModel, layer_index: int, dW, db, f_smoothed,
                 states, config: TrainConfig) -> None:
    """Base optimizer update of one layer, then the importance boost if the layer is boosted."""
    layer = model.layers[layer_index]
    if config.base_optimizer == "adam":
        adam_update(states[0], layer.weights, dW, config.learning_rate,
                    config.beta1, config.beta2, config.adam_eps)
        adam_update(states[1], layer.bias, db, config.learning_rate,
                    config.beta1, config.beta2, config.adam_eps)
    else:
        layer.weights -= config.learning_rate * dW
        layer.bias -= config.learning_rate * db
    if not layer.boosted:
        return
    f = np.asarray(f_smoothed, dtype=np.float64).ravel()
    if f.size != layer.n_out:
        raise ShapeError(f"importance of length {f.size} for a layer with {layer.n_out} outputs")
    layer.weights += f[:, None] * phi_scale(layer.weights, config.phi_mode)


class BoostedGradientDescent:
    """Optimizer state for one model: base-optimizer moments and the one shared tree slot."""

    def __init__(self, model: network.XbnetModel, config: TrainConfig):
        config.validate(len(model.layers))
        self.model = model
        self.config = config
        self.tree: gbdt.GbtModel | None = None
        self.states = [(AdamState(l.weights.shape), AdamState(l.bias.shape)) for l in model.layers]
        for i, layer in enumerate(model.layers):
            layer.boosted = i < config.boosted_layers

    def layer_importance(self, activations, y) -> np.ndarray:
        """Refit the shared tree on activations (samples x units) and return smoothed importance.

        Batches with fewer than two samples or a single class give uniform importance.
        """
        y = np.asarray(y)
        if y.size < 2:
            raw = np.full(activations.shape[1], 1.0 / activations.shape[1])
        else:
            self.tree = gbdt.fit(activations, y, self.config.tree, n_classes=self.model.n_classes)
            raw = gbdt.feature_importance(self.tree)
        return smooth_importance(raw, self.config.epsilon)

    def step(self, grads) -> None:
        for i, (dW, db) in enumerate(grads):
            layer = self.model.layers[i]
            boost = layer.importance if layer.boosted else None
            if layer.boosted and boost is None:
                raise ValidationError(f"boosted layer {i} has no stored importance")
            boosted_step(self.model, i, dW, db, boost, self.states[i], self.config)


def evaluate(model: network.XbnetModel, X, y) -> tuple[float, float]:
    """Mean cross-entropy and accuracy on a labelled set."""
    labels, _ = network.predict(model, X)
    out = network.forward(model, X)
    loss = network.compute_cost(model, out, network.one_hot_targets(y, model.n_classes)).data_loss
    return loss, float(np.mean(labels == np.asarray(y)))


def _train_batch(model, opt, Xb, yb, step, config, on_importance) -> None:
    Y_hat = network.forward(model, Xb, train_mode=True)
    if step % config.tree_refit_interval == 0:
        for i in range(config.boosted_layers):
            layer = model.layers[i]
            layer.importance = opt.layer_importance(layer.cache["A"].T, yb)
            if on_importance is not None:
                on_importance(i, layer.importance)
    Y = network.one_hot_targets(yb, model.n_classes)
    cost = network.compute_cost(model, Y_hat, Y, config.l2_lambda)
    if not math.isfinite(cost.total):
        raise NonFiniteError("non-finite loss")
    opt.step(network.backward(model, Y_hat, Y, config.l2_lambda))


def train(model: network.XbnetModel, train_set, val_set, config: TrainConfig,
          on_epoch=None, on_importance=None) -> TrainTrace:
    """Fit ``model`` in place with boosted gradient descent.

    ``train_set``/``val_set`` expose ``X`` (features x samples) and ``y``.
    ``on_epoch(row)`` receives ``(epoch, train_loss, val_loss, train_acc, val_acc)``;
    ``on_importance(layer_index, vector)`` sees every stored importance vector.
    """
    opt = BoostedGradientDescent(model, config)
    rng = numeric.make_rng(config.seed)
    if config.boosted_layers > 0:
        opt.tree = init_first_layer(model, train_set.X, train_set.y, config.tree, rng)
        if on_importance is not None:
            on_importance(-1, gbdt.feature_importance(opt.tree))
    trace = TrainTrace()
    step = 0
    for epoch in range(1, config.epochs + 1):
        for Xb, yb in data.batches(train_set, config.batch_size, config.seed, epoch):
            try:
                _train_batch(model, opt, Xb, yb, step, config, on_importance)
            except NonFiniteError as exc:
                raise DivergenceError(f"{exc} in epoch {epoch}") from exc
            if not all(np.all(np.isfinite(l.weights)) for l in model.layers):
                raise DivergenceError(f"weights became non-finite in epoch {epoch}")
            step += 1
        for layer in model.layers:
            layer.cache = {}
        try:
            tr_loss, tr_acc = evaluate(model, train_set.X, train_set.y)
            va_loss, va_acc = evaluate(model, val_set.X, val_set.y)
        except NonFiniteError as exc:
            raise DivergenceError(f"evaluation failed in epoch {epoch}: {exc}") from exc
        if not (math.isfinite(tr_loss) and math.isfinite(va_loss)):
            raise DivergenceError(f"non-finite loss in epoch {epoch}")
        trace.train_loss.append(tr_loss)
        trace.val_loss.append(va_loss)
        trace.train_accuracy.append(tr_acc)
        trace.val_accuracy.append(va_acc)
        if on_epoch is not None:
            on_epoch((epoch, tr_loss, va_loss, tr_acc, va_acc))
    return trace
