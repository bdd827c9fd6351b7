"""Standalone forecaster: frequency attention feeding one shared projection.

The model is deliberately small — an optional attention layer followed by a
single lookback-to-horizon dense map whose weights are shared by every
channel. Training is plain mini-batch Adam with seeded shuffling, per-epoch
learning-rate decay, and early stopping on validation MSE; the best
validation weights are restored at the end. A persistence baseline (repeat
the last observed value) anchors every comparison, and ablation_compare
trains matched models with and without the attention layer from identical
initialization.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .attention import FecamLayer, fecam_backward, fecam_forward
from .data import WindowedDataset
from .nncore import (
    AdamState,
    DenseLayer,
    adam_step,
    dense_backward,
    dense_forward,
    load_checkpoint,
    mse_loss,
    save_checkpoint,
)


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass
class TrainConfig:
    lookback: int = 96
    horizon: int = 96
    reduction: int = 2
    lr: float = 1e-4
    batch_size: int = 32
    epochs: int = 10
    seed: int = 0
    early_stop_patience: int = 3
    lr_decay: float = 0.5

    def __post_init__(self):
        positive = {
            "lookback": self.lookback, "horizon": self.horizon,
            "reduction": self.reduction, "batch_size": self.batch_size,
            "epochs": self.epochs, "early_stop_patience": self.early_stop_patience,
            "lr_decay": self.lr_decay,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        # lr = 0 is allowed: it turns training into a no-op, useful as a control.
        if self.lr < 0:
            raise ValueError(f"lr must be nonnegative, got {self.lr}")
        if self.lookback % self.reduction != 0:
            raise ValueError(
                f"lookback {self.lookback} not divisible by reduction {self.reduction}")


@dataclass
class EvalReport:
    """Metrics on the standardized scale, plus the per-step error profile."""

    mse: float
    mae: float
    step_mse: np.ndarray
    seconds: float

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "mae": self.mae,
            "seconds": self.seconds,
            "step_mse": [float(v) for v in self.step_mse],
        }


class ForecastModel:
    """Optional frequency attention composed with a shared L -> O projection.

    The seed feeds two independent generator streams, so the projection's
    initialization is identical whether or not the attention layer exists —
    ablation arms start from the same projection weights.
    """

    def __init__(self, lookback: int, horizon: int, reduction: int = 2,
                 with_fecam: bool = True, seed: int = 0):
        self.lookback = lookback
        self.horizon = horizon
        self.reduction = reduction
        self.projection = DenseLayer(lookback, horizon, np.random.default_rng([seed, 0]))
        self.fecam = (FecamLayer(lookback, reduction, np.random.default_rng([seed, 1]))
                      if with_fecam else None)

    def parameters(self) -> list[tuple[np.ndarray, np.ndarray]]:
        params = self.projection.parameters()
        if self.fecam is not None:
            params += self.fecam.parameters()
        return params

    def zero_grad(self) -> None:
        self.projection.zero_grad()
        if self.fecam is not None:
            self.fecam.zero_grad()

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays = {"projection.weight": self.projection.weight,
                  "projection.bias": self.projection.bias}
        if self.fecam is not None:
            arrays.update({f"fecam.{k}": v for k, v in self.fecam.state_arrays().items()})
        return arrays


def build_model(config: TrainConfig, with_fecam: bool = True) -> ForecastModel:
    return ForecastModel(config.lookback, config.horizon, config.reduction,
                         with_fecam=with_fecam, seed=config.seed)


def model_forward(model: ForecastModel, x, cache: dict | None = None) -> np.ndarray:
    """(B, C, L) -> (B, C, O); pass a dict to retain activations for backward."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != model.lookback:
        raise ValueError(f"expected (B, C, {model.lookback}) input, got {x.shape}")
    if model.fecam is not None:
        fecam_cache = {} if cache is not None else None
        feat, _ = fecam_forward(x, model.fecam, fecam_cache)
    else:
        fecam_cache = None
        feat = x
    y = dense_forward(model.projection, feat)
    if cache is not None:
        cache.update(proj_in=feat, fecam=fecam_cache)
    return y


def model_backward(model: ForecastModel, upstream, cache: dict) -> np.ndarray:
    """Accumulate parameter grads from a forward cache; returns dL/dx."""
    if not cache:
        raise ValueError("model_backward needs the cache filled by model_forward")
    d_feat = dense_backward(model.projection, upstream, cache["proj_in"])
    if model.fecam is not None:
        return fecam_backward(d_feat, model.fecam, cache["fecam"])
    return d_feat


def _check_dataset(ds: WindowedDataset, model: ForecastModel, name: str) -> None:
    if ds.n_windows < 1:
        raise ValueError(f"{name} dataset is empty")
    if ds.lookback != model.lookback or ds.horizon != model.horizon:
        raise ValueError(
            f"{name} dataset windows ({ds.lookback}, {ds.horizon}) do not match "
            f"model ({model.lookback}, {model.horizon})")


def train(model: ForecastModel, train_ds: WindowedDataset, val_ds: WindowedDataset,
          config: TrainConfig) -> tuple[ForecastModel, list[tuple[int, float, float]]]:
    """Mini-batch Adam with early stopping; returns (model, per-epoch history).

    History rows are (epoch, train_loss, val_loss). The model keeps the
    weights of its best validation epoch, not necessarily the last one.
    Raises DivergenceError the moment any batch loss turns non-finite.
    """
    _check_dataset(train_ds, model, "train")
    _check_dataset(val_ds, model, "val")
    params = [p for p, _ in model.parameters()]
    grads = [g for _, g in model.parameters()]
    state = AdamState(learning_rate=config.lr)
    shuffle_rng = np.random.default_rng([config.seed, 2])
    history: list[tuple[int, float, float]] = []
    best_val = np.inf
    best_params = [p.copy() for p in params]
    stale_epochs = 0

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(train_ds.n_windows)
        sq_sum = 0.0
        count = 0
        for start in range(0, train_ds.n_windows, config.batch_size):
            idx = order[start:start + config.batch_size]
            model.zero_grad()
            cache = {}
            pred = model_forward(model, train_ds.inputs[idx], cache)
            loss, d_loss = mse_loss(pred, train_ds.targets[idx])
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss at epoch {epoch}, batch starting at {start}; "
                    f"try a lower learning rate (current {state.learning_rate:g})")
            model_backward(model, d_loss, cache)
            adam_step(params, grads, state)
            sq_sum += loss * pred.size
            count += pred.size
        val_mse = evaluate(model, val_ds).mse
        history.append((epoch, sq_sum / count, val_mse))
        if val_mse < best_val:
            best_val = val_mse
            best_params = [p.copy() for p in params]
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= config.early_stop_patience:
                break
        state.learning_rate *= config.lr_decay

    for p, best in zip(params, best_params):
        p[:] = best
    return model, history


def evaluate(model: ForecastModel, ds: WindowedDataset, batch_size: int = 256) -> EvalReport:
    """MSE/MAE over every (window, channel, step) element of the dataset.

    Accumulates plain sums, so the result does not depend on batch_size
    beyond rounding.
    """
    _check_dataset(ds, model, "eval")
    start_time = time.perf_counter()
    sq_sum = 0.0
    abs_sum = 0.0
    count = 0
    step_sq = np.zeros(ds.horizon)
    for start in range(0, ds.n_windows, batch_size):
        stop = start + batch_size
        pred = model_forward(model, ds.inputs[start:stop])
        diff = pred - ds.targets[start:stop]
        sq_sum += float((diff * diff).sum())
        abs_sum += float(np.abs(diff).sum())
        count += diff.size
        step_sq += (diff * diff).sum(axis=(0, 1))
    per_step = step_sq / (ds.n_windows * ds.channels)
    return EvalReport(mse=sq_sum / count, mae=abs_sum / count, step_mse=per_step,
                      seconds=time.perf_counter() - start_time)


def persistence_report(ds: WindowedDataset) -> EvalReport:
    """Score the repeat-last-value baseline on the same metrics."""
    if ds.n_windows < 1:
        raise ValueError("dataset is empty")
    start_time = time.perf_counter()
    pred = np.repeat(ds.inputs[:, :, -1:], ds.horizon, axis=2)
    diff = pred - ds.targets
    per_step = (diff * diff).sum(axis=(0, 1)) / (ds.n_windows * ds.channels)
    return EvalReport(mse=float(np.mean(diff * diff)), mae=float(np.mean(np.abs(diff))),
                      step_mse=per_step, seconds=time.perf_counter() - start_time)


@dataclass
class AblationResult:
    fecam_report: EvalReport
    plain_report: EvalReport
    mse_reduction_pct: float
    fecam_history: list = field(default_factory=list)
    plain_history: list = field(default_factory=list)
    fecam_model: ForecastModel | None = None
    plain_model: ForecastModel | None = None


def ablation_compare(train_ds: WindowedDataset, val_ds: WindowedDataset,
                     test_ds: WindowedDataset, config: TrainConfig) -> AblationResult:
    """Train attention and plain arms under one config and compare test MSE.

    Both arms share the projection initialization and the shuffling stream,
    so the attention layer is the only difference. The reported reduction is
    (plain - fecam) / plain * 100.
    """
    reports = {}
    histories = {}
    models = {}
    for name, with_fecam in (("fecam", True), ("plain", False)):
        model = build_model(config, with_fecam=with_fecam)
        model, history = train(model, train_ds, val_ds, config)
        reports[name] = evaluate(model, test_ds)
        histories[name] = history
        models[name] = model
    reduction = (reports["plain"].mse - reports["fecam"].mse) / reports["plain"].mse * 100.0
    return AblationResult(
        fecam_report=reports["fecam"], plain_report=reports["plain"],
        mse_reduction_pct=reduction,
        fecam_history=histories["fecam"], plain_history=histories["plain"],
        fecam_model=models["fecam"], plain_model=models["plain"])


def save_model(path, model: ForecastModel, extra_meta: dict | None = None) -> None:
    meta = {
        "lookback": model.lookback,
        "horizon": model.horizon,
        "reduction": model.reduction,
        "with_fecam": model.fecam is not None,
    }
    meta.update(extra_meta or {})
    save_checkpoint(path, model.state_arrays(), meta)


def load_model(path) -> tuple[ForecastModel, dict]:
    """Rebuild a model from a checkpoint; returns (model, checkpoint meta)."""
    arrays, meta = load_checkpoint(path)
    for key in ("lookback", "horizon", "reduction", "with_fecam"):
        if key not in meta:
            raise ValueError(f"checkpoint meta missing {key!r}")
    model = ForecastModel(int(meta["lookback"]), int(meta["horizon"]),
                          int(meta["reduction"]), with_fecam=bool(meta["with_fecam"]))
    for name, target in model.state_arrays().items():
        if name not in arrays:
            raise ValueError(f"checkpoint missing array {name!r}")
        value = arrays[name]
        if value.shape != target.shape:
            raise ValueError(f"{name}: checkpoint shape {value.shape} != model shape {target.shape}")
        target[:] = value
    return model, meta
