import math
import numpy as np
import pytest

from xbnet import data, gbdt, network, numeric, optim
from xbnet.errors import DivergenceError, ScaleError, ShapeError, ValidationError

from oracles import PlainGD


def toy_set(n=50, F=4, K=2, seed=0, informative=None):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((F, n))
    if informative is None:
        y = rng.integers(0, K, n)
    else:
        y = (X[informative] > 0).astype(np.int64)
    names = [f"x{i}" for i in range(F)]
    return data.Dataset(X, y, names, [str(k) for k in range(K)], {n: "numeric" for n in names})


def test_smooth_importance_examples():
    np.testing.assert_allclose(optim.smooth_importance([1.0, 0.0, 0.0], 0.001),
                               [1.001 / 1.003, 0.001 / 1.003, 0.001 / 1.003], rtol=1e-15)
    np.testing.assert_allclose(optim.smooth_importance([1.0, 0.0, 0.0], 0.001),
                               [0.998005, 0.000997, 0.000997], atol=1e-6)
    f = np.array([0.2, 0.3, 0.5])
    np.testing.assert_array_equal(optim.smooth_importance(f, 0.0), f)
    np.testing.assert_allclose(optim.smooth_importance(np.full(4, 0.25), 0.001), np.full(4, 0.25))


def test_phi_scale_examples():
    assert optim.phi_scale([[0.001, 0.5]]) == pytest.approx(0.001, rel=1e-12)
    assert optim.phi_scale([[-0.02, 0.5]]) == pytest.approx(0.02, rel=1e-12)
    assert optim.phi_scale([[0.0, 0.03]]) == pytest.approx(0.03, rel=1e-12)
    assert optim.phi_scale([[0.03, 0.5]], "floor_exponent") == pytest.approx(0.01, rel=1e-12)
    with pytest.raises(ScaleError):
        optim.phi_scale([[0.0, 0.0]])


def one_layer_model(w):
    return network.XbnetModel([network.DenseLayer(np.array(w, dtype=float),
                                                  np.zeros((len(w), 1)), "sigmoid")], 2)


def test_boosted_step_examples():
    n = 3
    model = network.XbnetModel([network.DenseLayer(np.full((n, 2), 0.01), np.zeros((n, 1)), "relu"),
                                network.DenseLayer(np.ones((1, n)), np.zeros((1, 1)), "sigmoid")], 2)
    model.layers[0].boosted = True
    cfg = optim.TrainConfig(base_optimizer="sgd", learning_rate=1e-300)
    states = (optim.AdamState((n, 2)), optim.AdamState((n, 1)))
    optim.boosted_step(model, 0, np.zeros((n, 2)), np.zeros((n, 1)), np.full(n, 1.0 / n), states, cfg)
    np.testing.assert_allclose(model.layers[0].weights, 0.01 + 0.01 / n, rtol=1e-12)

    model.layers[0].weights = np.full((n, 2), 0.01)
    optim.boosted_step(model, 0, np.zeros((n, 2)), np.zeros((n, 1)), np.array([0.0, 1.0, 0.0]), states, cfg)
    w = model.layers[0].weights
    np.testing.assert_allclose(w[1], 0.02, rtol=1e-12)
    np.testing.assert_array_equal(w[[0, 2]], 0.01)

    with pytest.raises(ShapeError):
        optim.boosted_step(model, 0, np.zeros((n, 2)), np.zeros((n, 1)), np.ones(2) / 2, states, cfg)


def test_unboosted_step_is_plain_sgd():
    rng = np.random.default_rng(0)
    model = one_layer_model(rng.standard_normal((1, 3)))
    w0, b0 = model.layers[0].weights.copy(), model.layers[0].bias.copy()
    dW, db = rng.standard_normal((1, 3)), rng.standard_normal((1, 1))
    cfg = optim.TrainConfig(base_optimizer="sgd", learning_rate=0.1)
    optim.boosted_step(model, 0, dW, db, None, (None, None), cfg)
    np.testing.assert_array_equal(model.layers[0].weights, w0 - 0.1 * dW)
    np.testing.assert_array_equal(model.layers[0].bias, b0 - 0.1 * db)


def test_boost_never_exceeds_smallest_weight():
    rng = np.random.default_rng(3)
    for _ in range(50):
        w = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-6, 1)
        model = network.XbnetModel([network.DenseLayer(w.copy(), np.zeros((4, 1)), "relu"),
                                    network.DenseLayer(np.ones((1, 4)), np.zeros((1, 1)), "sigmoid")], 2)
        model.layers[0].boosted = True
        f = optim.smooth_importance(rng.dirichlet(np.ones(4)), 0.001)
        cfg = optim.TrainConfig(base_optimizer="sgd", learning_rate=1e-300)
        optim.boosted_step(model, 0, np.zeros((4, 3)), np.zeros((4, 1)), f, (None, None), cfg)
        delta = np.abs(model.layers[0].weights - w).max()
        phi = optim.phi_scale(w)
        assert delta <= phi * (1 + 1e-12)
        assert phi <= np.abs(w[w != 0]).min() * (1 + 1e-12)


def test_adam_examples():
    state = optim.AdamState((2, 2))
    p = np.ones((2, 2))
    optim.adam_update(state, p, np.zeros((2, 2)), 0.01)
    np.testing.assert_array_equal(p, 1.0)
    assert state.t == 1
    for g in (-3.0, 0.5, 1e3):
        state = optim.AdamState((1,))
        p = np.zeros(1)
        optim.adam_update(state, p, np.full(1, g), 0.01)
        assert p[0] == pytest.approx(-0.01 * math.copysign(1, g), rel=1e-6)


def test_adam_matches_textbook_recurrence():
    rng = np.random.default_rng(4)
    grads = rng.standard_normal((10, 3))
    state = optim.AdamState((3,))
    p = np.zeros(3)
    m = v = np.zeros(3)
    ref = np.zeros(3)
    for t, g in enumerate(grads, start=1):
        optim.adam_update(state, p, g, 0.01)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g**2
        ref = ref - 0.01 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
    np.testing.assert_allclose(p, ref, rtol=1e-12)


def test_init_first_layer_favours_informative_feature():
    ds = toy_set(n=200, F=4, informative=2)
    model = network.build_model(4, [6, 1], 2, numeric.make_rng(0))
    optim.init_first_layer(model, ds.X, ds.y, gbdt.GbtConfig(n_estimators=10), numeric.make_rng(1))
    col = np.abs(model.layers[0].weights).mean(axis=0)
    assert col.argmax() == 2 and all(col[2] > col[j] for j in (0, 1, 3))
    assert np.all(model.layers[0].bias == 0)


def test_init_first_layer_uniform_fallback_and_determinism():
    ds = toy_set(n=30, F=5)
    ds.y[:] = 1
    weights = []
    for _ in range(2):
        model = network.build_model(5, [4, 1], 2, numeric.make_rng(0))
        optim.init_first_layer(model, ds.X, ds.y, gbdt.GbtConfig(), numeric.make_rng(7))
        w = model.layers[0].weights
        assert np.all(np.abs(w - 1 / 5) <= 0.01)
        weights.append(w)
    np.testing.assert_array_equal(*weights)


def test_plain_gd_reduction_matches_oracle():
    train_set = toy_set(n=50, F=4, K=3, seed=2)
    val_set = toy_set(n=20, F=4, K=3, seed=3)
    model = network.build_model(4, [5, 3], 3, numeric.make_rng(0))
    oracle = PlainGD([l.weights for l in model.layers], [l.bias for l in model.layers],
                     [l.activation for l in model.layers], 3, lr=0.1, lam=0.2)
    cfg = optim.TrainConfig(boosted_layers=0, base_optimizer="sgd", learning_rate=0.1,
                            l2_lambda=0.2, epochs=5, batch_size=8, seed=9)
    optim.train(model, train_set, val_set, cfg)
    for epoch in range(1, 6):
        for Xb, yb in data.batches(train_set, 8, 9, epoch):
            oracle.step(Xb.T, yb)
    for layer, w in zip(model.layers, oracle.weights()):
        np.testing.assert_allclose(layer.weights, w, rtol=0, atol=1e-12)


def test_single_tree_slot_and_stored_importance():
    ds = toy_set(n=64, F=4, informative=0)
    model = network.build_model(4, [6, 5, 1], 2, numeric.make_rng(0))
    cfg = optim.TrainConfig(boosted_layers=2, epochs=1, batch_size=16, tree=gbdt.GbtConfig(n_estimators=5))
    opt = optim.BoostedGradientDescent(model, cfg)
    assert [l.boosted for l in model.layers] == [True, True, False]
    tree_attrs = [k for k, v in vars(opt).items() if isinstance(v, gbdt.GbtModel) or k == "tree"]
    assert tree_attrs == ["tree"]
    seen = []
    optim.train(model, ds, ds, cfg, on_importance=lambda i, v: seen.append((i, np.asarray(v))))
    assert {i for i, _ in seen} == {-1, 0, 1}
    for i, v in seen:
        assert np.all(v >= 0) and v.sum() == pytest.approx(1.0, abs=1e-9)
        if i >= 0:
            assert v.size == model.layers[i].n_out and np.all(v > 0)


def test_training_is_deterministic():
    ds = toy_set(n=60, F=3, informative=1)
    traces = []
    for _ in range(2):
        model = network.build_model(3, [4, 1], 2, numeric.make_rng(0))
        traces.append(optim.train(model, ds, ds, optim.TrainConfig(epochs=3, batch_size=16,
                                                                    tree=gbdt.GbtConfig(n_estimators=5))))
    assert list(traces[0].rows()) == list(traces[1].rows())


def test_zero_epochs_only_initializes():
    ds = toy_set(n=40, F=3, informative=1)
    model = network.build_model(3, [4, 1], 2, numeric.make_rng(0))
    w_out = model.layers[1].weights.copy()
    trace = optim.train(model, ds, ds, optim.TrainConfig(epochs=0))
    assert len(trace) == 0
    np.testing.assert_array_equal(model.layers[1].weights, w_out)
    assert np.all(np.abs(model.layers[0].weights - model.layers[0].weights.mean(axis=0)) <= 0.02)


def test_refit_interval_reduces_tree_fits(monkeypatch):
    ds = toy_set(n=64, F=3, informative=0)
    calls = []
    real_fit = gbdt.fit
    monkeypatch.setattr(gbdt, "fit", lambda *a, **k: calls.append(1) or real_fit(*a, **k))
    model = network.build_model(3, [4, 1], 2, numeric.make_rng(0))
    optim.train(model, ds, ds, optim.TrainConfig(epochs=2, batch_size=16, tree_refit_interval=3,
                                                 tree=gbdt.GbtConfig(n_estimators=2)))
    assert len(calls) == 1 + math.ceil(8 / 3)


def test_divergence_names_the_epoch():
    ds = toy_set(n=40, F=3, informative=1)
    ds.X = ds.X * 1e200
    model = network.build_model(3, [4, 1], 2, numeric.make_rng(0))
    with pytest.raises(DivergenceError, match="epoch 1"):
        optim.train(model, ds, ds, optim.TrainConfig(boosted_layers=0, base_optimizer="sgd",
                                                     learning_rate=1e10, epochs=2))


def test_config_validation():
    model = network.build_model(3, [4, 1], 2, numeric.make_rng(0))
    for bad in (dict(learning_rate=0.0), dict(boosted_layers=3), dict(batch_size=0),
                dict(tree_refit_interval=0), dict(epsilon=-1.0), dict(base_optimizer="rmsprop")):
        with pytest.raises(ValidationError):
            optim.BoostedGradientDescent(model, optim.TrainConfig(**bad))
