"""Feedforward MISO regressors trained with mini-batch Adam.

The network computes ``h(x) = W_L . act(... act(W_1 . u + b_1) ...) + b_L``
on min-max normalized inputs ``u`` and predicts a min-max normalized target.
Everything is float64 numpy; training and inference are deterministic for a
given seed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, read_json, split_indices, write_json
from .doe import make_rng

MODEL_FORMAT = "certopt.model/1"


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"training loss became non-finite at epoch {epoch}")


class NotFittedError(RuntimeError):
    pass


def _tanh_grad(a):
    return 1.0 - a * a


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(a):
    return (a > 0.0).astype(float)


# activation -> (function, derivative expressed through the activation output)
ACTIVATIONS = {
    "tanh": (np.tanh, _tanh_grad),
    "relu": (_relu, _relu_grad),
}


def param_count(widths) -> tuple[tuple[int, ...], int]:
    """Trainable scalars per dense layer (weights plus biases) and their total.

    >>> param_count([3, 100, 1])
    ((400, 101), 501)
    """
    widths = [int(w) for w in widths]
    if len(widths) < 2:
        raise ValueError("need at least an input and an output width")
    if min(widths) < 1:
        raise ValueError(f"layer widths must be positive, got {widths}")
    per_layer = tuple(a * b + b for a, b in zip(widths[:-1], widths[1:]))
    return per_layer, sum(per_layer)


@dataclass
class MinMax:
    """Per-column affine map sending ``[lo, hi]`` onto ``[a, b]`` (default ``[0, 1]``)."""

    lo: np.ndarray
    hi: np.ndarray
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        self.lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        # a degenerate column maps to zero instead of dividing by zero
        self.hi = np.where(self.hi > self.lo, self.hi, self.lo + 1.0)

    @classmethod
    def identity(cls, n: int) -> MinMax:
        return cls(np.zeros(n), np.ones(n))

    @classmethod
    def fit(cls, values: np.ndarray, a: float = 0.0, b: float = 1.0) -> MinMax:
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return cls(values.min(axis=0), values.max(axis=0), a, b)

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def transform(self, v):
        return (np.asarray(v, dtype=float) - self.lo) / self.span * (self.b - self.a) + self.a

    def inverse(self, u):
        return (np.asarray(u, dtype=float) - self.a) / (self.b - self.a) * self.span + self.lo

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist(), "range": [self.a, self.b]}

    @classmethod
    def from_dict(cls, d: dict) -> MinMax:
        return cls(d["lo"], d["hi"], *d.get("range", (0.0, 1.0)))


@dataclass
class MlpModel:
    widths: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "tanh"
    x_norm: MinMax | None = None
    y_norm: MinMax | None = None
    seed: int | None = None
    name: str = ""

    def __post_init__(self):
        self.widths = tuple(int(w) for w in self.widths)
        if self.widths[-1] != 1:
            raise ValueError("MISO models have a single output")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.weights) != len(self.widths) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("one weight matrix and bias vector per layer required")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.widths[k], self.widths[k + 1]) or b.shape != (self.widths[k + 1],):
                raise ValueError(f"layer {k} parameters do not match widths {self.widths}")

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def parameters(self) -> list[np.ndarray]:
        return [p for wb in zip(self.weights, self.biases) for p in wb]

    def forward_normalized(self, u: np.ndarray) -> np.ndarray:
        """Network output for normalized inputs, shape ``(n,)``.

        Each row is pushed through its own matrix-vector product so that a
        point's prediction does not depend on which batch it arrives in.
        """
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if u.shape[1] != self.widths[0]:
            raise ValueError(f"model expects {self.widths[0]} inputs, got {u.shape[1]}")
        act = ACTIVATIONS[self.activation][0]
        h = u[:, None, :]
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = np.matmul(h, w) + b
            if k < last:
                h = act(h)
        return h[:, 0, 0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Predictions in problem units for inputs in problem units."""
        if self.x_norm is None or self.y_norm is None:
            raise NotFittedError("normalization has not been fitted for this model")
        u = self.x_norm.transform(np.atleast_2d(x))
        return self.y_norm.inverse(self.forward_normalized(u)[:, None])[:, 0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.predict(x)

    def to_dict(self) -> dict:
        def norm(n):
            return None if n is None else n.to_dict()

        return {
            "format": MODEL_FORMAT,
            "name": self.name,
            "widths": list(self.widths),
            "activation": self.activation,
            "weights": [w.ravel(order="C").tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "x_norm": norm(self.x_norm),
            "y_norm": norm(self.y_norm),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MlpModel:
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        widths = d["widths"]
        weights = [
            np.array(w, dtype=float).reshape(a, b)
            for w, a, b in zip(d["weights"], widths[:-1], widths[1:])
        ]
        biases = [np.array(b, dtype=float) for b in d["biases"]]

        def norm(n):
            return None if n is None else MinMax.from_dict(n)

        return cls(widths, weights, biases, d["activation"], norm(d["x_norm"]),
                   norm(d["y_norm"]), d.get("seed"), d.get("name", ""))

    def save(self, path: str | Path) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str | Path) -> MlpModel:
        return cls.from_dict(read_json(path))


def init_model(widths, seed: int, activation: str = "tanh") -> MlpModel:
    """Seeded random initialization.

    Weights are ``U(-sqrt(3/fan_in), sqrt(3/fan_in))``. Hidden biases are
    ``U(-1, 1)`` so that the first-layer units start with their transitions
    spread over the ``[-1, 1]`` input box instead of all sitting at the
    origin; the output bias starts at zero.
    """
    param_count(widths)
    rng = make_rng(seed)
    weights, biases = [], []
    n_layers = len(widths) - 1
    for k, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
        limit = math.sqrt(3.0 / a)
        weights.append(rng.uniform(-limit, limit, size=(a, b)))
        biases.append(rng.uniform(-1.0, 1.0, size=b) if k < n_layers - 1 else np.zeros(b))
    return MlpModel(tuple(widths), weights, biases, activation, seed=seed)


def loss_and_grads(model: MlpModel, u: np.ndarray, t: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean squared error on a batch and its gradient w.r.t. ``model.parameters()``."""
    act, dact = ACTIVATIONS[model.activation]
    hs = [u]
    h = u
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if k < last:
            h = act(h)
        hs.append(h)
    resid = h[:, 0] - t
    loss = float(np.mean(resid * resid))

    grads: list[np.ndarray] = [None] * (2 * len(model.weights))
    delta = (2.0 / len(t)) * resid[:, None]
    for k in range(last, -1, -1):
        grads[2 * k] = hs[k].T @ delta
        grads[2 * k + 1] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ model.weights[k].T) * dact(hs[k])
    return loss, grads


def numerical_grads(model: MlpModel, u: np.ndarray, t: np.ndarray, h: float = 1e-6) -> list[np.ndarray]:
    """Central finite-difference gradient of :func:`mse_loss`, for checking backprop."""
    out = []
    for p in model.parameters():
        g = np.empty_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = mse_loss(model, u, t)
            flat[i] = keep - h
            down = mse_loss(model, u, t)
            flat[i] = keep
            gflat[i] = (up - down) / (2.0 * h)
        out.append(g)
    return out


def gradient_relative_error(model: MlpModel, u: np.ndarray, t: np.ndarray, h: float = 1e-6) -> float:
    """Largest ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-7)`` over all parameters."""
    _, analytic = loss_and_grads(model, u, t)
    numeric = numerical_grads(model, u, t, h)
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-7)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        step = self.lr * math.sqrt(c2) / c1
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= step * m / (np.sqrt(v) + self.eps)


@dataclass
class TrainConfig:
    """Training hyperparameters.

    ``lr_decay`` multiplies the step size whenever validation loss has not
    improved for ``decay_patience`` epochs (never below ``min_lr``);
    training stops after ``patience`` epochs without improvement and the
    best-validation weights are restored.

    With ``readout_solve`` the linear output layer is finally replaced by its
    exact least-squares solution on the training split (the MSE restricted
    to that layer is quadratic), kept only if validation loss does not rise.
    """

    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 500
    seed: int = 0
    validation_fraction: float = 0.15
    test_fraction: float = 0.15
    patience: int = 100
    lr_decay: float = 0.5
    decay_patience: int = 50
    min_lr: float = 1e-6
    activation: str = "tanh"
    readout_solve: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if not (0 < self.validation_fraction < 1 and 0 < self.test_fraction < 1
                and self.validation_fraction + self.test_fraction < 1):
            raise ValueError("split fractions must lie in (0, 1) and sum to less than 1")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr_decay must lie in (0, 1]")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class LossHistory:
    initial_train: float
    initial_val: float
    train: list[float] = field(default_factory=list)
    val: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RegressionMetrics:
    mse: float
    mae: float
    predicted: np.ndarray = field(repr=False)
    actual: np.ndarray = field(repr=False)


class Trainer:
    """Resumable training state for one model on normalized data.

    Calling :meth:`train` repeatedly continues from where the previous call
    stopped (optimizer moments, learning rate and early-stopping counters
    included), which is what successive-halving rounds rely on.
    """

    def __init__(self, model: MlpModel, u_train, t_train, u_val, t_val, config: TrainConfig):
        self.model = model
        self.config = config
        self.u_train, self.t_train = u_train, t_train
        self.u_val, self.t_val = u_val, t_val
        self.rng = make_rng(config.seed + 1)
        self.adam = Adam(model.parameters(), config.learning_rate)
        self.epoch = 0
        self.best_val = self.val_loss()
        self.best_params = [p.copy() for p in model.parameters()]
        self.since_best = 0
        self.since_decay = 0
        self.stopped = False
        self.history = LossHistory(initial_train=self.train_loss(), initial_val=self.best_val)

    def _loss(self, u, t) -> float:
        return mse_loss(self.model, u, t)

    def train_loss(self) -> float:
        return self._loss(self.u_train, self.t_train)

    def val_loss(self) -> float:
        return self._loss(self.u_val, self.t_val)

    def train(self, epochs: int) -> LossHistory:
        cfg = self.config
        n = len(self.t_train)
        for _ in range(epochs):
            if self.stopped:
                break
            self.epoch += 1
            perm = self.rng.permutation(n)
            for s in range(0, n, cfg.batch_size):
                idx = perm[s:s + cfg.batch_size]
                loss, grads = loss_and_grads(self.model, self.u_train[idx], self.t_train[idx])
                if not math.isfinite(loss):
                    raise TrainingDivergedError(self.epoch)
                self.adam.step(grads)
            tr, va = self.train_loss(), self.val_loss()
            if not (math.isfinite(tr) and math.isfinite(va)):
                raise TrainingDivergedError(self.epoch)
            self.history.train.append(tr)
            self.history.val.append(va)
            self.history.lr.append(self.adam.lr)
            if va < self.best_val:
                self.best_val = va
                self.best_params = [p.copy() for p in self.model.parameters()]
                self.history.best_epoch = self.epoch
                self.since_best = self.since_decay = 0
            else:
                self.since_best += 1
                self.since_decay += 1
                if self.since_decay >= cfg.decay_patience and self.adam.lr > cfg.min_lr:
                    self.adam.lr = max(cfg.min_lr, self.adam.lr * cfg.lr_decay)
                    self.since_decay = 0
                if self.since_best >= cfg.patience:
                    self.stopped = True
                    self.history.stopped_early = True
        return self.history

    def finalize(self) -> MlpModel:
        """Copy of the model holding the best-validation parameters."""
        weights = [p.copy() for p in self.best_params[0::2]]
        biases = [p.copy() for p in self.best_params[1::2]]
        m = self.model
        return MlpModel(m.widths, weights, biases, m.activation, m.x_norm, m.y_norm, m.seed, m.name)


def mse_loss(model: MlpModel, u: np.ndarray, t: np.ndarray) -> float:
    act = ACTIVATIONS[model.activation][0]
    h = u
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ w + b
        if k < last:
            h = act(h)
    resid = h[:, 0] - t
    return float(np.mean(resid * resid))


@dataclass
class PreparedData:
    """Normalized arrays for one target, split into train/val/test."""

    u: np.ndarray
    t: np.ndarray
    x_norm: MinMax
    y_norm: MinMax
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def prepare(dataset: Dataset, config: TrainConfig, target: str | None = None) -> PreparedData:
    if target is None:
        if len(dataset.y_names) != 1:
            raise ValueError(f"dataset has outputs {dataset.y_names}; pick a target")
        target = dataset.y_names[0]
    y = dataset.target(target)
    if dataset.bounds is not None:
        x_norm = MinMax(dataset.bounds[:, 0], dataset.bounds[:, 1], -1.0, 1.0)
    else:
        x_norm = MinMax.fit(dataset.x, -1.0, 1.0)
    y_norm = MinMax.fit(y)
    split = split_indices(len(dataset), config.validation_fraction, config.test_fraction, config.seed)
    return PreparedData(
        u=x_norm.transform(dataset.x),
        t=y_norm.transform(y[:, None])[:, 0],
        x_norm=x_norm,
        y_norm=y_norm,
        train=split.train,
        val=split.val,
        test=split.test,
    )


def make_trainer(prepared: PreparedData, widths, config: TrainConfig, name: str = "") -> Trainer:
    widths = tuple(widths)
    if widths[0] != prepared.u.shape[1]:
        raise ValueError(f"input width {widths[0]} does not match {prepared.u.shape[1]} features")
    model = init_model(widths, config.seed, config.activation)
    model.x_norm, model.y_norm, model.name = prepared.x_norm, prepared.y_norm, name
    p = prepared
    return Trainer(model, p.u[p.train], p.t[p.train], p.u[p.val], p.t[p.val], config)


def fit(
    dataset: Dataset, widths, config: TrainConfig | None = None, target: str | None = None
) -> tuple[MlpModel, LossHistory]:
    """Train one single-output model on ``target`` of ``dataset``.

    Returns the best-validation model and the per-epoch loss history.

    Raises:
        TrainingDivergedError: if the loss becomes NaN or infinite.
    """
    config = config or TrainConfig()
    prepared = prepare(dataset, config, target)
    trainer = make_trainer(prepared, widths, config, name=target or dataset.y_names[0])
    history = trainer.train(config.epochs)
    model = trainer.finalize()
    if config.readout_solve:
        model = solve_readout(model, trainer.u_train, trainer.t_train, trainer.u_val, trainer.t_val)
    return model, history


def hidden_features(model: MlpModel, u: np.ndarray) -> np.ndarray:
    """Activations of the last hidden layer for normalized inputs ``u``."""
    act = ACTIVATIONS[model.activation][0]
    h = u
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = act(np.matmul(h[:, None, :], w)[:, 0, :] + b)
    return h


def solve_readout(model: MlpModel, u_train, t_train, u_val, t_val) -> MlpModel:
    """Least-squares output layer on the training split; unchanged if validation MSE rises."""
    feats = hidden_features(model, u_train)
    design = np.hstack([feats, np.ones((len(feats), 1))])
    sol, *_ = np.linalg.lstsq(design, t_train, rcond=None)
    if not np.all(np.isfinite(sol)):
        return model
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    weights[-1] = sol[:-1, None]
    biases[-1] = sol[-1:].copy()
    solved = MlpModel(model.widths, weights, biases, model.activation, model.x_norm,
                      model.y_norm, model.seed, model.name)
    if mse_loss(solved, u_val, t_val) > mse_loss(model, u_val, t_val):
        return model
    return solved


def evaluate(model: MlpModel, x: np.ndarray, y: np.ndarray) -> RegressionMetrics:
    """MSE and MAE of ``model`` on ``(x, y)``, measured on normalized outputs."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if len(y) == 0:
        raise ValueError("cannot evaluate on an empty split")
    if model.y_norm is None:
        raise NotFittedError("model has no output normalization")
    pred = model.y_norm.transform(model.predict(x)[:, None])[:, 0]
    actual = model.y_norm.transform(y[:, None])[:, 0]
    return metrics_from_pairs(pred, actual)


def metrics_from_pairs(predicted, actual) -> RegressionMetrics:
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.size == 0:
        raise ValueError("cannot compute metrics on an empty split")
    err = predicted - actual
    return RegressionMetrics(
        mse=float(np.mean(err * err)),
        mae=float(np.mean(np.abs(err))),
        predicted=predicted,
        actual=actual,
    )
