import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from certopt.data import Dataset
from certopt.surrogate import (MinMax, MlpModel, NotFittedError, TrainConfig, Trainer,
                               TrainingDivergedError, evaluate, fit, gradient_relative_error,
                               init_model, loss_and_grads, metrics_from_pairs, param_count,
                               prepare)

widths_st = st.lists(st.integers(1, 12), min_size=1, max_size=4).map(lambda h: [3] + h + [1])


@pytest.mark.parametrize("widths, layers, total", [
    ((2, 60, 60, 60, 1), (180, 3660, 3660, 61), 7561),
    ((3, 100, 1), (400, 101), 501),
    ((3, 80, 80, 80, 80, 80, 1), None, 26321),
    ((3, 180, 180, 180, 180, 180, 1), (720, 32580, 32580, 32580, 32580, 181), 131221),
    ((3, 220, 220, 1), None, 49721),
])
def test_param_count_tables(widths, layers, total):
    per, tot = param_count(widths)
    assert tot == total
    if layers is not None:
        assert per == layers


@pytest.mark.parametrize("bad", [[3], [], [3, 0, 1]])
def test_param_count_rejects(bad):
    with pytest.raises(ValueError):
        param_count(bad)


@given(widths_st, st.integers(0, 10_000))
def test_param_count_matches_trainable(widths, seed):
    model = init_model(widths, seed)
    _, grads = loss_and_grads(model, np.zeros((2, 3)), np.zeros(2))
    total = param_count(widths)[1]
    assert total == model.n_params == sum(g.size for g in grads)


def _identity_model(weights, biases, dim):
    widths = [dim] + [w.shape[1] for w in weights]
    return MlpModel(widths, weights, biases, x_norm=MinMax.identity(dim), y_norm=MinMax.identity(1))


def test_zero_network_outputs_zero(rng):
    m = _identity_model([np.zeros((3, 4)), np.zeros((4, 1))], [np.zeros(4), np.zeros(1)], 3)
    assert np.all(m.predict(rng.random((5, 3))) == 0.0)


def test_single_affine_layer(rng):
    w, b = rng.normal(size=(3, 1)), rng.normal(size=1)
    x = rng.random((6, 3))
    m = _identity_model([w], [b], 3)
    np.testing.assert_allclose(m.predict(x), x @ w[:, 0] + b[0], atol=1e-14)


def test_forward_matches_hand_rolled(rng):
    m = init_model((2, 5, 1), seed=4)
    m.x_norm = MinMax(np.zeros(2), np.ones(2), -1.0, 1.0)
    m.y_norm = MinMax(np.array([10.0]), np.array([30.0]))
    x = np.array([0.25, 0.75])
    u = [2 * x[0] - 1, 2 * x[1] - 1]
    hidden = [np.tanh(sum(u[i] * m.weights[0][i, j] for i in range(2)) + m.biases[0][j])
              for j in range(5)]
    out = sum(hidden[j] * m.weights[1][j, 0] for j in range(5)) + m.biases[1][0]
    assert m.predict(x)[0] == pytest.approx(10.0 + 20.0 * out, rel=1e-13)


def test_prediction_independent_of_batch(rng):
    m = init_model((3, 40, 40, 1), seed=2)
    m.x_norm, m.y_norm = MinMax.identity(3), MinMax.identity(1)
    x = rng.random((300, 3))
    full = m.predict(x)
    pieces = np.concatenate([m.predict(x[i:i + 7]) for i in range(0, 300, 7)])
    assert full.tobytes() == pieces.tobytes()


def test_unfitted_model_refuses_predict():
    with pytest.raises(NotFittedError):
        init_model((2, 3, 1), 0).predict(np.zeros((1, 2)))


def test_dimension_mismatch():
    m = init_model((2, 3, 1), 0)
    m.x_norm, m.y_norm = MinMax.identity(2), MinMax.identity(1)
    with pytest.raises(ValueError):
        m.predict(np.zeros((1, 3)))


def test_model_rejects_multi_output():
    with pytest.raises(ValueError):
        MlpModel((2, 2), [np.zeros((2, 2))], [np.zeros(2)])


@pytest.mark.parametrize("activation", ["tanh", "relu"])
@pytest.mark.parametrize("case", range(8))
def test_gradients_match_finite_differences(activation, case):
    rng = np.random.default_rng(case)
    depth = int(rng.integers(1, 4))
    widths = [int(rng.integers(1, 9)) for _ in range(depth)] + [1]
    model = init_model(widths, case, activation)
    u = rng.uniform(-1, 1, (8, widths[0]))
    t = rng.random(8)
    assert gradient_relative_error(model, u, t) <= 1e-4


@given(hnp.arrays(float, (9, 2), elements=st.floats(-1e6, 1e6)))
def test_normalization_round_trip(values):
    norm = MinMax.fit(values)
    np.testing.assert_allclose(norm.inverse(norm.transform(values)), values, atol=1e-12 * max(1.0, np.abs(values).max()))


def test_constant_target_is_learned():
    rng = np.random.default_rng(0)
    u = rng.uniform(-1, 1, (1000, 2))
    t = np.full(1000, 0.5)
    cfg = TrainConfig(epochs=200, seed=1)
    trainer = Trainer(init_model((2, 8, 1), 1), u, t, u, t, cfg)
    hist = trainer.train(200)
    assert hist.train[-1] < 1e-4


def test_identical_runs_identical_histories(line_dataset):
    cfg = TrainConfig(epochs=15, seed=3)
    m1, h1 = fit(line_dataset, (1, 8, 1), cfg)
    m2, h2 = fit(line_dataset, (1, 8, 1), cfg)
    assert h1.train == h2.train and h1.val == h2.val
    for a, b in zip(m1.parameters(), m2.parameters()):
        assert a.tobytes() == b.tobytes()


def test_training_reduces_loss(line_dataset):
    _, hist = fit(line_dataset, (1, 8, 1), TrainConfig(epochs=30, seed=0))
    assert hist.train[-1] <= hist.initial_train
    assert len(hist.train) == len(hist.val) == len(hist.lr)


def test_early_stopping_restores_best(line_dataset):
    cfg = TrainConfig(epochs=400, patience=5, decay_patience=2, seed=0, readout_solve=False)
    model, hist = fit(line_dataset, (1, 6, 1), cfg)
    p = prepare(line_dataset, cfg)
    from certopt.surrogate import mse_loss
    val = mse_loss(model, p.u[p.val], p.t[p.val])
    assert val == pytest.approx(min(hist.val), rel=1e-12)


def test_readout_solve_never_hurts_validation(line_dataset):
    base = TrainConfig(epochs=20, seed=5)
    plain, _ = fit(line_dataset, (1, 10, 1), TrainConfig(epochs=20, seed=5, readout_solve=False))
    solved, _ = fit(line_dataset, (1, 10, 1), base)
    p = prepare(line_dataset, base)
    from certopt.surrogate import mse_loss
    assert mse_loss(solved, p.u[p.val], p.t[p.val]) <= mse_loss(plain, p.u[p.val], p.t[p.val])


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reports_epoch():
    rng = np.random.default_rng(0)
    u = rng.uniform(-1, 1, (64, 2))
    t = rng.random(64) * 1e200
    trainer = Trainer(init_model((2, 4, 1), 0, "relu"), u, t, u, t, TrainConfig(learning_rate=1e3))
    with pytest.raises(TrainingDivergedError) as err:
        trainer.train(50)
    assert err.value.epoch >= 1


def test_model_file_round_trip(tmp_path, line_dataset):
    model, _ = fit(line_dataset, (1, 5, 1), TrainConfig(epochs=5))
    model.save(tmp_path / "m.json")
    back = MlpModel.load(tmp_path / "m.json")
    x = np.linspace(0, 1, 11)[:, None]
    assert back.predict(x).tobytes() == model.predict(x).tobytes()
    assert back.widths == model.widths and back.activation == model.activation


def test_bk_f1_reaches_relaxed_mae(bk_dataset):
    cfg = TrainConfig(learning_rate=1e-3, batch_size=32, seed=8)
    model, _ = fit(bk_dataset, (2, 60, 60, 60, 1), cfg, target="f1")
    p = prepare(bk_dataset, cfg, "f1")
    metrics = evaluate(model, bk_dataset.x[p.test], bk_dataset.target("f1")[p.test])
    assert metrics.mae <= 0.01


@pytest.mark.parametrize("pred, actual, mse, mae", [
    ([0.2, 0.4], [0.2, 0.4], 0.0, 0.0),
    ([0.3, 0.5], [0.2, 0.4], 0.01, 0.1),
    ([0.0, 1.0], [1.0, 0.0], 1.0, 1.0),
])
def test_metric_examples(pred, actual, mse, mae):
    m = metrics_from_pairs(pred, actual)
    assert m.mse == pytest.approx(mse) and m.mae == pytest.approx(mae)


def test_metrics_on_empty_split():
    with pytest.raises(ValueError):
        metrics_from_pairs([], [])


@given(hnp.arrays(float, 20, elements=st.floats(-10, 10)), hnp.arrays(float, 20, elements=st.floats(-10, 10)))
def test_mae_squared_below_mse(a, b):
    m = metrics_from_pairs(a, b)
    assert m.mae**2 <= m.mse * (1 + 1e-12) + 1e-300


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0)
    with pytest.raises(ValueError):
        TrainConfig(validation_fraction=0.5, test_fraction=0.5)
    with pytest.raises(ValueError):
        TrainConfig(activation="sigmoid")


def test_constant_column_dataset_is_trainable():
    x = np.linspace(0, 1, 50)[:, None]
    ds = Dataset(x, np.full(50, 3.0), ["x1"], ["f1"], np.array([[0.0, 1.0]]))
    model, _ = fit(ds, (1, 4, 1), TrainConfig(epochs=10))
    assert np.allclose(model.predict(x), 3.0, atol=1e-6)
