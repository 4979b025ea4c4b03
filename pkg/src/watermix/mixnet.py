"""Feedforward mixture-reflectance regressor with a composite training loss.

The network maps the 207 packed features to a 41-sample reflectance through
sigmoid layers.  The loss sums a relative absolute deviation, a weighted
absolute error, and a weighted squared spread of the predictions around the
target mean, plus L1/L2 penalties on the weight matrices (biases excluded).
Training is plain Adam over hand-derived gradients; a finite-difference check
guards the backward pass.
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .dataset import DatasetSplit, MixSample, N_FEATURES, NormalizationConfig, pack_features
from .errors import DomainError, TrainingDivergedError, ValidationError
from .spectra import N_SAMPLES, PigmentRecord, QuantityML, as_spectrum, interpolate_quantity

# Full-scale architecture: 15 hidden layers between the 207 inputs and 41 outputs.
FULL_LAYER_SIZES = (
    207, 100, 90, 90, 80, 80, 70, 70, 60, 60, 60, 60, 50, 50, 50, 50, 41
)
# Small architecture that trains to recipe quality on the synthetic corpus in
# minutes on one core.
DESK_LAYER_SIZES = (207, 100, 80, 41)

MODEL_MAGIC = b"WMIX"
MODEL_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple = DESK_LAYER_SIZES
    output_activation: str = "sigmoid"  # "linear" available for ablation
    learning_rate: float = 0.001
    l1_weight: float = 0.000015
    l2_weight: float = 0.000003
    alpha: float = 3.0
    beta: float = 2.0
    epochs: int = 4000
    batch_size: int = 0  # 0 = full batch
    seed: int = 0
    mu_mode: str = "batch"  # "batch" or "per_sample" mean of the targets
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    checkpoint_every: int = 0
    normalization: dict = field(default_factory=lambda: NormalizationConfig().to_dict())

    def __post_init__(self):
        if self.layer_sizes[0] != N_FEATURES or self.layer_sizes[-1] != N_SAMPLES:
            raise ValidationError(
                f"layer sizes must run {N_FEATURES} -> {N_SAMPLES}, got {self.layer_sizes}"
            )
        if self.output_activation not in ("sigmoid", "linear"):
            raise ValidationError(f"unknown output activation {self.output_activation!r}")
        if self.mu_mode not in ("batch", "per_sample"):
            raise ValidationError(f"unknown mu mode {self.mu_mode!r}")
        for name in ("learning_rate", "alpha", "beta"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")

    @classmethod
    def full(cls, **overrides) -> "NetworkConfig":
        return cls(layer_sizes=FULL_LAYER_SIZES, **overrides)

    @classmethod
    def desk(cls, **overrides) -> "NetworkConfig":
        return cls(layer_sizes=DESK_LAYER_SIZES, **overrides)

    def to_dict(self) -> dict:
        d = {
            "layer_sizes": list(self.layer_sizes),
            "output_activation": self.output_activation,
            "learning_rate": self.learning_rate,
            "l1_weight": self.l1_weight,
            "l2_weight": self.l2_weight,
            "alpha": self.alpha,
            "beta": self.beta,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "mu_mode": self.mu_mode,
            "adam_beta1": self.adam_beta1,
            "adam_beta2": self.adam_beta2,
            "adam_eps": self.adam_eps,
            "checkpoint_every": self.checkpoint_every,
            "normalization": dict(self.normalization),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        d = dict(d)
        d["layer_sizes"] = tuple(d["layer_sizes"])
        return cls(**d)


@dataclass
class ModelWeights:
    """Per-layer parameters plus Adam state; shapes follow the config."""

    config: NetworkConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    step: int = 0
    m_w: list[np.ndarray] = field(default_factory=list)
    v_w: list[np.ndarray] = field(default_factory=list)
    m_b: list[np.ndarray] = field(default_factory=list)
    v_b: list[np.ndarray] = field(default_factory=list)

    def copy(self) -> "ModelWeights":
        return ModelWeights(
            config=self.config,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            step=self.step,
            m_w=[m.copy() for m in self.m_w],
            v_w=[v.copy() for v in self.v_w],
            m_b=[m.copy() for m in self.m_b],
            v_b=[v.copy() for v in self.v_b],
        )

    def check_finite(self):
        for arrs in (self.weights, self.biases):
            for layer, arr in enumerate(arrs):
                if not np.all(np.isfinite(arr)):
                    raise ValidationError(f"non-finite parameters in layer {layer}")


def init_weights(cfg: NetworkConfig) -> ModelWeights:
    """Seeded uniform init scaled by fan-in; Adam state starts at zero."""
    rng = np.random.default_rng(cfg.seed)
    weights, biases = [], []
    for n_in, n_out in zip(cfg.layer_sizes, cfg.layer_sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return ModelWeights(
        config=cfg,
        weights=weights,
        biases=biases,
        m_w=[np.zeros_like(w) for w in weights],
        v_w=[np.zeros_like(w) for w in weights],
        m_b=[np.zeros_like(b) for b in biases],
        v_b=[np.zeros_like(b) for b in biases],
    )


def _forward_activations(w: ModelWeights, x: np.ndarray) -> list[np.ndarray]:
    """Activations per layer for a [m, 207] batch, input included."""
    acts = [x]
    last = len(w.weights) - 1
    for i, (wi, bi) in enumerate(zip(w.weights, w.biases)):
        z = acts[-1] @ wi + bi
        if i == last and w.config.output_activation == "linear":
            acts.append(z)
        else:
            acts.append(expit(z))
    return acts


def forward_batch(w: ModelWeights, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != N_FEATURES:
        raise ValidationError(f"batch must have shape [m, {N_FEATURES}], got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("features contain non-finite values")
    return _forward_activations(w, x)[-1]


def forward(w: ModelWeights, features) -> np.ndarray:
    """Predicted 41-sample reflectance for one feature vector."""
    f = np.asarray(features, dtype=np.float64)
    if f.shape != (N_FEATURES,):
        raise ValidationError(f"expected {N_FEATURES} features, got shape {f.shape}")
    return forward_batch(w, f[None, :])[0]


def _mu(targets: np.ndarray, mode: str) -> np.ndarray | float:
    if mode == "per_sample":
        return targets.mean(axis=1, keepdims=True)
    return float(targets.mean())


def regularization_penalty(w: ModelWeights) -> float:
    cfg = w.config
    l1 = sum(float(np.abs(wi).sum()) for wi in w.weights)
    l2 = sum(float((wi * wi).sum()) for wi in w.weights)
    return cfg.l1_weight * l1 + cfg.l2_weight * l2


def regularization_gradients(w: ModelWeights) -> list[np.ndarray]:
    cfg = w.config
    return [cfg.l1_weight * np.sign(wi) + 2.0 * cfg.l2_weight * wi for wi in w.weights]


def loss(predictions, targets, w: ModelWeights, cfg: NetworkConfig | None = None) -> float:
    """Composite batch loss; see loss_terms for the breakdown."""
    return loss_terms(predictions, targets, w, cfg)["total"]


def loss_terms(predictions, targets, w: ModelWeights, cfg: NetworkConfig | None = None) -> dict:
    cfg = cfg or w.config
    yhat = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if yhat.shape != y.shape or yhat.ndim != 2 or yhat.shape[1] != N_SAMPLES:
        raise ValidationError(f"predictions/targets must be [m, {N_SAMPLES}], got {yhat.shape}")
    m = y.shape[0]
    if m < 1:
        raise ValidationError("need at least one sample")
    abs_res = np.abs(y - yhat)
    denom = float(np.abs(y).sum())
    if denom == 0.0:
        raise DomainError("all-zero targets: relative deviation term divides by zero")
    mu = _mu(y, cfg.mu_mode)
    term1 = float(abs_res.sum()) / denom
    term2 = cfg.alpha / m * float(abs_res.sum())
    term3 = cfg.beta / m * float(((yhat - mu) ** 2).sum())
    reg = regularization_penalty(w)
    return {
        "relative_deviation": term1,
        "weighted_absolute": term2,
        "weighted_spread": term3,
        "regularization": reg,
        "total": term1 + term2 + term3 + reg,
    }


def _loss_grad_wrt_predictions(yhat, y, cfg: NetworkConfig) -> np.ndarray:
    m = y.shape[0]
    denom = float(np.abs(y).sum())
    if denom == 0.0:
        raise DomainError("all-zero targets: relative deviation term divides by zero")
    sign = np.sign(yhat - y)  # subgradient 0 exactly at a zero residual
    mu = _mu(y, cfg.mu_mode)
    return sign * (1.0 / denom + cfg.alpha / m) + 2.0 * cfg.beta / m * (yhat - mu)


def _backward(w: ModelWeights, acts: list[np.ndarray], y: np.ndarray):
    """Gradients of the composite loss for one batch, regularization included."""
    cfg = w.config
    yhat = acts[-1]
    delta = _loss_grad_wrt_predictions(yhat, y, cfg)
    if cfg.output_activation == "sigmoid":
        delta = delta * yhat * (1.0 - yhat)
    grads_w, grads_b = [], []
    for i in range(len(w.weights) - 1, -1, -1):
        grads_w.append(acts[i].T @ delta)
        grads_b.append(delta.sum(axis=0))
        if i > 0:
            a = acts[i]
            delta = (delta @ w.weights[i].T) * a * (1.0 - a)
    grads_w.reverse()
    grads_b.reverse()
    for gw, reg in zip(grads_w, regularization_gradients(w)):
        gw += reg
    return grads_w, grads_b


def _adam_update(w: ModelWeights, grads_w, grads_b):
    cfg = w.config
    w.step += 1
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate
    c1 = 1.0 - b1 ** w.step
    c2 = 1.0 - b2 ** w.step
    for i, (gw, gb) in enumerate(zip(grads_w, grads_b)):
        w.m_w[i] = b1 * w.m_w[i] + (1.0 - b1) * gw
        w.v_w[i] = b2 * w.v_w[i] + (1.0 - b2) * gw * gw
        w.weights[i] -= lr * (w.m_w[i] / c1) / (np.sqrt(w.v_w[i] / c2) + eps)
        w.m_b[i] = b1 * w.m_b[i] + (1.0 - b1) * gb
        w.v_b[i] = b2 * w.v_b[i] + (1.0 - b2) * gb * gb
        w.biases[i] -= lr * (w.m_b[i] / c1) / (np.sqrt(w.v_b[i] / c2) + eps)


@dataclass
class TrainingReport:
    epochs: int
    wall_time_s: float
    final_loss: float
    loss_curve: list  # (epoch, loss) pairs, subsampled
    seed: int
    diverged: bool = False

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "epochs": self.epochs,
            "wall_time_s": self.wall_time_s,
            "final_loss": self.final_loss,
            "loss_curve": [[e, l] for e, l in self.loss_curve],
            "seed": self.seed,
            "diverged": self.diverged,
        }


def samples_to_arrays(samples: list[MixSample]) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([s.features for s in samples])
    y = np.stack([s.target for s in samples])
    return x, y


def train(
    split: DatasetSplit | tuple,
    cfg: NetworkConfig,
    checkpoint_path=None,
) -> tuple[ModelWeights, TrainingReport]:
    """Adam training; deterministic for a fixed seed, config, and data.

    ``split`` may be a DatasetSplit or a raw (features, targets) pair.  Raises
    TrainingDivergedError carrying the last finite-loss weights if the loss
    ever goes non-finite.
    """
    if isinstance(split, DatasetSplit):
        x, y = samples_to_arrays(split.train)
    else:
        x, y = np.asarray(split[0], dtype=np.float64), np.asarray(split[1], dtype=np.float64)
    if x.shape[0] == 0:
        raise ValidationError("training set is empty")

    w = init_weights(cfg)
    rng = np.random.default_rng(cfg.seed + 1)  # minibatch shuffling only
    m = x.shape[0]
    batch = m if cfg.batch_size in (0, None) or cfg.batch_size >= m else cfg.batch_size

    record_every = max(1, cfg.epochs // 200)
    curve = []
    last_good = w.copy()
    started = time.perf_counter()
    epoch_loss = float(loss_terms(forward_batch(w, x), y, w, cfg)["total"])
    for epoch in range(cfg.epochs):
        if batch == m:
            acts = _forward_activations(w, x)
            epoch_loss = loss_terms(acts[-1], y, w, cfg)["total"]
            if not np.isfinite(epoch_loss):
                raise TrainingDivergedError(epoch, last_good=last_good)
            last_good = w.copy()
            grads_w, grads_b = _backward(w, acts, y)
            _adam_update(w, grads_w, grads_b)
        else:
            order = rng.permutation(m)
            epoch_loss = 0.0
            snapshot = w.copy()
            for start in range(0, m, batch):
                idx = order[start : start + batch]
                acts = _forward_activations(w, x[idx])
                batch_loss = loss_terms(acts[-1], y[idx], w, cfg)["total"]
                if not np.isfinite(batch_loss):
                    raise TrainingDivergedError(epoch, last_good=last_good)
                epoch_loss += batch_loss * idx.shape[0]
                grads_w, grads_b = _backward(w, acts, y[idx])
                _adam_update(w, grads_w, grads_b)
            last_good = snapshot
            epoch_loss /= m
        if epoch % record_every == 0 or epoch == cfg.epochs - 1:
            curve.append((epoch, float(epoch_loss)))
        if (
            checkpoint_path is not None
            and cfg.checkpoint_every > 0
            and (epoch + 1) % cfg.checkpoint_every == 0
        ):
            save_model(checkpoint_path, w)

    report = TrainingReport(
        epochs=cfg.epochs,
        wall_time_s=time.perf_counter() - started,
        final_loss=float(epoch_loss),
        loss_curve=curve,
        seed=cfg.seed,
    )
    return w, report


def gradient_check(cfg: NetworkConfig, features, targets, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Kink coordinates are excluded, since the subgradient convention there is
    arbitrary: residuals within 100*h of the |y - yhat| corner (guarded by a
    precondition on the batch) and weights within 100*h of the L1 |W| corner
    (skipped per coordinate).  Parameters with both gradients below 1e-10 are
    skipped as pure noise.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    w = init_weights(cfg)
    acts = _forward_activations(w, x)
    if float(np.min(np.abs(acts[-1] - y))) < 100.0 * h:
        raise DomainError("residuals too close to the |.| kink for a reliable check")
    grads_w, grads_b = _backward(w, acts, y)

    def total_loss() -> float:
        return loss_terms(forward_batch(w, x), y, w, cfg)["total"]

    worst = 0.0
    for params, grads, l1_kinks in (
        (w.weights, grads_w, True),
        (w.biases, grads_b, False),
    ):
        for arr, grad in zip(params, grads):
            flat, gflat = arr.ravel(), grad.ravel()
            for j in range(flat.shape[0]):
                orig = flat[j]
                if l1_kinks and cfg.l1_weight != 0.0 and abs(orig) < 100.0 * h:
                    continue
                flat[j] = orig + h
                up = total_loss()
                flat[j] = orig - h
                down = total_loss()
                flat[j] = orig
                numeric = (up - down) / (2.0 * h)
                analytic = gflat[j]
                scale = max(abs(numeric), abs(analytic))
                if scale < 1e-10:
                    continue
                worst = max(worst, abs(numeric - analytic) / scale)
    return worst


def predict_mixture(
    w: ModelWeights,
    records: list[PigmentRecord],
    substrate,
    pigment_a: int,
    q_a_ml: float,
    pigment_b: int,
    q_b_ml: float,
) -> np.ndarray:
    """Pack features for a (pigment, quantity) pair and run the network."""
    by_index = {r.pigment.index: r for r in records}
    if pigment_a not in by_index or pigment_b not in by_index:
        raise DomainError(f"unknown pigment index {pigment_a} or {pigment_b}")
    qa = QuantityML.from_ml(q_a_ml)
    qb = QuantityML.from_ml(q_b_ml)
    for q in (qa, qb):
        if not q.is_on_grid():
            raise DomainError(
                f"quantity {q.ml} mL is not a 0.002 mL multiple within [0.01, 0.16]"
            )
    norm = NormalizationConfig.from_dict(w.config.normalization)
    refl_a, trans_a = interpolate_quantity(by_index[pigment_a], qa)
    refl_b, trans_b = interpolate_quantity(by_index[pigment_b], qb)
    features = pack_features(
        trans_a, refl_a, trans_b, refl_b, as_spectrum(substrate), qa, qb, norm
    )
    return forward(w, features)


# ---------------------------------------------------------------------------
# Model container: little-endian binary with a JSON config block.
# Layout (all integers little-endian):
#   magic  4s   b"WMIX"
#   version u32
#   config  u32 length + canonical-JSON UTF-8 bytes
#   step    u64 Adam step counter
#   then per layer i (shapes implied by config.layer_sizes):
#     W_i float64[n_in*n_out] row-major, b_i float64[n_out],
#     mW_i, vW_i, mb_i, vb_i in the same shapes.


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()


def save_model(path, w: ModelWeights) -> None:
    w.check_finite()
    cfg_bytes = _canonical_json(w.config.to_dict())
    chunks = [MODEL_MAGIC, struct.pack("<I", MODEL_VERSION)]
    chunks.append(struct.pack("<I", len(cfg_bytes)))
    chunks.append(cfg_bytes)
    chunks.append(struct.pack("<Q", w.step))
    for i in range(len(w.weights)):
        for arr in (w.weights[i], w.biases[i], w.m_w[i], w.v_w[i], w.m_b[i], w.v_b[i]):
            chunks.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_model(path) -> ModelWeights:
    data = Path(path).read_bytes()
    if data[:4] != MODEL_MAGIC:
        raise ValidationError(f"not a model file: bad magic {data[:4]!r}")
    version = struct.unpack_from("<I", data, 4)[0]
    if version != MODEL_VERSION:
        raise ValidationError(f"unsupported model version {version}")
    cfg_len = struct.unpack_from("<I", data, 8)[0]
    offset = 12
    cfg = NetworkConfig.from_dict(json.loads(data[offset : offset + cfg_len].decode()))
    offset += cfg_len
    step = struct.unpack_from("<Q", data, offset)[0]
    offset += 8

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += count * 8
        return arr

    weights, biases, m_w, v_w, m_b, v_b = [], [], [], [], [], []
    for n_in, n_out in zip(cfg.layer_sizes, cfg.layer_sizes[1:]):
        weights.append(take((n_in, n_out)))
        biases.append(take((n_out,)))
        m_w.append(take((n_in, n_out)))
        v_w.append(take((n_in, n_out)))
        m_b.append(take((n_out,)))
        v_b.append(take((n_out,)))
    if offset != len(data):
        raise ValidationError(f"trailing bytes in model file ({len(data) - offset})")
    return ModelWeights(
        config=cfg, weights=weights, biases=biases, step=step,
        m_w=m_w, v_w=v_w, m_b=m_b, v_b=v_b,
    )


def model_file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
