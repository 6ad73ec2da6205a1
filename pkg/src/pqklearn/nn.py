"""Small binary classifier: optional 1-D convolution, dense ReLU stack,
sigmoid output, binary cross-entropy, hand-rolled backprop, Adam.

Everything is float64 numpy and deterministic under a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .validation import check_binary_labels, check_matrix

BCE_CLAMP = 1e-7


@dataclass(frozen=True)
class ModelArch:
    """Layer plan. Input rows are flat; conv models reshape each row to
    (length, channels) and convolve along the length axis (stride 1, no
    padding, ReLU), then feed the flattened maps to the dense stack.

    Hidden dense layers use sigmoid by default; the smoother activation
    generalizes noticeably better than ReLU on the relabeled tasks."""

    input_shape: tuple[int, ...]            # (d,) flat, or (length, channels)
    use_conv: bool = False
    conv_filters: int = 16
    conv_kernel: int = 3
    dense_widths: tuple[int, ...] = (32, 16)
    dense_activation: str = "sigmoid"       # {"sigmoid", "relu"}

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(v) for v in self.input_shape))
        object.__setattr__(self, "dense_widths", tuple(int(v) for v in self.dense_widths))
        if any(v < 1 for v in self.input_shape + self.dense_widths):
            raise ValueError("all layer sizes must be positive")
        if self.dense_activation not in ("sigmoid", "relu"):
            raise ValueError(f"unknown dense activation {self.dense_activation!r}")
        if self.use_conv:
            if len(self.input_shape) != 2:
                raise ValueError("conv models need a (length, channels) input shape")
            if not 1 <= self.conv_kernel <= self.input_shape[0]:
                raise ValueError(
                    f"conv kernel {self.conv_kernel} exceeds grid length {self.input_shape[0]}"
                )
            if self.conv_filters < 1:
                raise ValueError("conv_filters must be positive")
        elif len(self.input_shape) != 1:
            raise ValueError("dense-only models take a flat (d,) input shape")

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))

    @property
    def flat_width(self) -> int:
        """Width of the vector entering the dense stack."""
        if self.use_conv:
            return (self.input_shape[0] - self.conv_kernel + 1) * self.conv_filters
        return self.input_dim

    def layer_names(self) -> list[str]:
        names = ["conv"] if self.use_conv else []
        names += [f"dense{i}" for i in range(len(self.dense_widths))]
        return names + ["out"]


@dataclass
class ModelState:
    """Parameters plus Adam accumulators."""

    params: dict[str, np.ndarray]
    adam_m: dict[str, np.ndarray]
    adam_v: dict[str, np.ndarray]
    step: int = 0


@dataclass(frozen=True)
class TrainResult:
    train_accuracy: float
    test_accuracy: float | None
    loss_curve: np.ndarray = field(repr=False)  # mean minibatch loss per epoch
    wall_time_seconds: float


def _he_uniform(rng, fan_in: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def init_model(arch: ModelArch, seed: int) -> ModelState:
    """Seeded uniform He-style weights, zero biases, zeroed Adam state."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    if arch.use_conv:
        k, c, f = arch.conv_kernel, arch.input_shape[1], arch.conv_filters
        params["conv/W"] = _he_uniform(rng, k * c, (k, c, f))
        params["conv/b"] = np.zeros(f)
    width = arch.flat_width
    for i, w in enumerate(arch.dense_widths):
        params[f"dense{i}/W"] = _he_uniform(rng, width, (width, w))
        params[f"dense{i}/b"] = np.zeros(w)
        width = w
    params["out/W"] = _he_uniform(rng, width, (width, 1))
    params["out/b"] = np.zeros(1)
    zeros = lambda: {k: np.zeros_like(v) for k, v in params.items()}
    return ModelState(params=params, adam_m=zeros(), adam_v=zeros(), step=0)


def _check_batch(arch: ModelArch, X) -> np.ndarray:
    X = check_matrix(X, "batch")
    if X.shape[1] != arch.input_dim:
        raise ValueError(f"batch has {X.shape[1]} columns, model expects {arch.input_dim}")
    return X


def _forward_cached(arch: ModelArch, params, X: np.ndarray):
    cache = {}
    if arch.use_conv:
        grid = X.reshape(X.shape[0], *arch.input_shape)
        windows = sliding_window_view(grid, arch.conv_kernel, axis=1)  # (m, P, C, k)
        pre = np.einsum("mpck,kcf->mpf", windows, params["conv/W"]) + params["conv/b"]
        act = np.maximum(pre, 0.0)
        cache["conv"] = (windows, pre)
        a = act.reshape(X.shape[0], -1)
    else:
        a = X
    act = expit if arch.dense_activation == "sigmoid" else lambda v: np.maximum(v, 0.0)
    for i in range(len(arch.dense_widths)):
        pre = a @ params[f"dense{i}/W"] + params[f"dense{i}/b"]
        cache[f"dense{i}"] = (a, pre)
        a = act(pre)
    z = (a @ params["out/W"] + params["out/b"]).ravel()
    cache["out"] = (a, z)
    # expit saturates to exactly 0/1 for |z| large; keep strictly inside (0, 1)
    p = np.clip(expit(z), np.finfo(np.float64).tiny, np.nextafter(1.0, 0.0))
    return p, cache


def forward(arch: ModelArch, params, X) -> np.ndarray:
    """Predicted probabilities in (0, 1), one per row."""
    X = _check_batch(arch, X)
    return _forward_cached(arch, params, X)[0]


def bce_loss(pred: np.ndarray, labels: np.ndarray) -> float:
    """Mean binary cross-entropy with predictions clamped away from {0, 1}."""
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if pred.shape != labels.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs labels {labels.shape}")
    p = np.clip(pred, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log1p(-p)))


def _grads_from_cache(arch: ModelArch, params, cache, p, y) -> dict[str, np.ndarray]:
    m = y.shape[0]
    inside = (p > BCE_CLAMP) & (p < 1.0 - BCE_CLAMP)
    dz = np.where(inside, (p - y) / m, 0.0)
    grads: dict[str, np.ndarray] = {}
    a_last, _ = cache["out"]
    grads["out/W"] = a_last.T @ dz[:, None]
    grads["out/b"] = np.array([dz.sum()])
    da = dz[:, None] @ params["out/W"].T
    for i in reversed(range(len(arch.dense_widths))):
        a_in, pre = cache[f"dense{i}"]
        if arch.dense_activation == "sigmoid":
            sg = expit(pre)
            dpre = da * sg * (1.0 - sg)
        else:
            dpre = da * (pre > 0.0)
        grads[f"dense{i}/W"] = a_in.T @ dpre
        grads[f"dense{i}/b"] = dpre.sum(axis=0)
        da = dpre @ params[f"dense{i}/W"].T
    if arch.use_conv:
        windows, pre = cache["conv"]
        dpre = da.reshape(pre.shape) * (pre > 0.0)
        grads["conv/W"] = np.einsum("mpck,mpf->kcf", windows, dpre)
        grads["conv/b"] = dpre.sum(axis=(0, 1))
    return grads


def backward(arch: ModelArch, params, X, y) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradients of bce_loss(forward(X), y)."""
    X = _check_batch(arch, X)
    y = check_binary_labels(y, X.shape[0]).astype(np.float64)
    p, cache = _forward_cached(arch, params, X)
    return _grads_from_cache(arch, params, cache, p, y)


def adam_step(
    state: ModelState,
    grads: dict[str, np.ndarray],
    lr: float = 0.003,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> ModelState:
    """One bias-corrected Adam update, in place."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in layer {name!r}")
    state.step += 1
    t = state.step
    for name, g in grads.items():
        m = state.adam_m[name] = beta1 * state.adam_m[name] + (1.0 - beta1) * g
        v = state.adam_v[name] = beta2 * state.adam_v[name] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        state.params[name] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


def evaluate(arch: ModelArch, params, X, y) -> float:
    """Accuracy with threshold 0.5; a prediction of exactly 0.5 counts as 1."""
    y = check_binary_labels(y)
    preds = (forward(arch, params, X) >= 0.5).astype(np.int64)
    return float(np.mean(preds == y))


def train(
    arch: ModelArch,
    X_train,
    y_train,
    X_test=None,
    y_test=None,
    epochs: int = 100,
    batch_size: int = 32,
    lr: float = 0.003,
    seed: int = 0,
) -> tuple[ModelState, TrainResult]:
    """Mini-batch Adam training with a seeded shuffle per epoch.

    The last partial batch is kept. Wall time covers only the epoch loop.
    """
    X_train = _check_batch(arch, X_train)
    y = check_binary_labels(y_train, X_train.shape[0]).astype(np.float64)
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    state = init_model(arch, seed)
    rng = np.random.default_rng(seed)
    n = X_train.shape[0]
    loss_curve = np.zeros(epochs)

    start = time.perf_counter()
    for epoch in range(epochs):
        order = rng.permutation(n)
        losses = []
        for lo in range(0, n, batch_size):
            idx = order[lo : lo + batch_size]
            Xb, yb = X_train[idx], y[idx]
            p, cache = _forward_cached(arch, state.params, Xb)
            losses.append(bce_loss(p, yb))
            grads = _grads_from_cache(arch, state.params, cache, p, yb)
            adam_step(state, grads, lr=lr)
        loss_curve[epoch] = np.mean(losses)
    wall = time.perf_counter() - start

    train_acc = evaluate(arch, state.params, X_train, y_train)
    test_acc = None
    if X_test is not None:
        test_acc = evaluate(arch, state.params, X_test, y_test)
    return state, TrainResult(
        train_accuracy=train_acc,
        test_accuracy=test_acc,
        loss_curve=loss_curve,
        wall_time_seconds=wall,
    )


class SmallBinaryNet(BaseEstimator, ClassifierMixin):
    """sklearn-style face of the classifier above.

    With ``use_conv`` the input row is reshaped to (d / conv_channels,
    conv_channels) and convolved along the first axis; Bloch-feature rows
    laid out as [X0, Y0, Z0, X1, ...] become a (n_qubits, 3) grid.
    """

    def __init__(
        self,
        use_conv: bool = False,
        conv_channels: int = 3,
        conv_filters: int = 16,
        conv_kernel: int = 3,
        dense_widths: tuple[int, ...] = (32, 16),
        dense_activation: str = "sigmoid",
        epochs: int = 100,
        batch_size: int = 32,
        lr: float = 0.003,
        seed: int = 0,
    ):
        self.use_conv = use_conv
        self.conv_channels = conv_channels
        self.conv_filters = conv_filters
        self.conv_kernel = conv_kernel
        self.dense_widths = dense_widths
        self.dense_activation = dense_activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed

    def _arch(self, d: int) -> ModelArch:
        if self.use_conv:
            if d % self.conv_channels != 0:
                raise ValueError(
                    f"{d} columns do not divide into {self.conv_channels} channels"
                )
            shape: tuple[int, ...] = (d // self.conv_channels, self.conv_channels)
        else:
            shape = (d,)
        return ModelArch(
            input_shape=shape,
            use_conv=self.use_conv,
            conv_filters=self.conv_filters,
            conv_kernel=self.conv_kernel,
            dense_widths=tuple(self.dense_widths),
            dense_activation=self.dense_activation,
        )

    def fit(self, X, y):
        X = check_matrix(X, "X")
        self.arch_ = self._arch(X.shape[1])
        self.state_, self.result_ = train(
            self.arch_,
            X,
            y,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            seed=self.seed,
        )
        self.classes_ = np.array([0, 1])
        return self

    def predict_proba(self, X) -> np.ndarray:
        if not hasattr(self, "state_"):
            raise NotFittedError("SmallBinaryNet must be fitted before predicting")
        p = forward(self.arch_, self.state_.params, X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
