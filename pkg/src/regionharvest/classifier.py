"""Deterministic multi-class classifiers used as the subset-fitness oracle.

Two interchangeable kinds behind one contract:

* ``linear`` - one-vs-rest max-margin linear classifiers trained by
  seeded stochastic subgradient descent on the hinge loss.
* ``centroid`` - nearest class-mean, cheap enough for property tests.

Both are bit-for-bit reproducible given (inputs, config, seed).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.linear_model import SGDClassifier

KINDS = ("linear", "centroid")


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "linear"
    epochs: int = 50
    regularization: float = 1e-3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"classifier kind must be one of {KINDS}, got {self.kind!r}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.regularization <= 0:
            raise ValueError("regularization must be positive")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    class_count: int
    feature_length: int
    weights: np.ndarray  # (K, d): hyperplanes for linear, class means for centroid
    biases: np.ndarray   # (K,): zeros for centroid
    config: ClassifierConfig
    seed: int


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    correct: int
    total: int
    per_class_accuracy: tuple[float, ...]
    mean_predict_time: float


def _as_matrix(vectors) -> np.ndarray:
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a list of equal-length feature vectors, got ndim={X.ndim}")
    return X


def _train_linear(X: np.ndarray, y: np.ndarray, class_count: int,
                  config: ClassifierConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    # one seeded hinge-loss SGD per class against the rest; run exactly
    # `epochs` passes (tol=None) so the result is a pure function of the seed
    weights = np.zeros((class_count, X.shape[1]))
    biases = np.zeros(class_count)
    for k in range(class_count):
        sgd = SGDClassifier(loss="hinge", alpha=config.regularization, max_iter=config.epochs,
                            tol=None, shuffle=True, random_state=(seed * 1000003 + k) % 2**32)
        sgd.fit(X, np.where(y == k, 1, -1))
        weights[k] = sgd.coef_[0]
        biases[k] = sgd.intercept_[0]
    return weights, biases


def train(vectors, labels, config: ClassifierConfig, seed: int) -> TrainedModel:
    """Fit the configured classifier; every class 0..K-1 must be present."""
    X = _as_matrix(vectors)
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (X.shape[0],):
        raise ValueError("labels must align one-to-one with the feature vectors")
    class_count = int(y.max()) + 1 if y.size else 0
    present = set(np.unique(y).tolist())
    missing = set(range(class_count)) - present
    if y.size == 0 or missing:
        raise ValueError(f"every class must appear in training data; missing {sorted(missing)}")

    if config.kind == "centroid":
        weights = np.stack([X[y == k].mean(axis=0) for k in range(class_count)])
        biases = np.zeros(class_count)
    else:
        weights, biases = _train_linear(X, y, class_count, config, seed)
    return TrainedModel(kind=config.kind, class_count=class_count, feature_length=X.shape[1],
                        weights=weights, biases=biases, config=config, seed=seed)


def scores(model: TrainedModel, vector) -> np.ndarray:
    """Per-class decision scores; higher wins."""
    x = np.asarray(vector, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.feature_length:
        raise ValueError(
            f"feature vector length {x.shape} does not match model length {model.feature_length}")
    if model.kind == "centroid":
        diff = model.weights - x
        return -(diff * diff).sum(axis=1)
    out = model.weights @ x
    out += model.biases
    return out


def predict(model: TrainedModel, vector) -> int:
    """Argmax class; ties break toward the lowest class id."""
    return int(np.argmax(scores(model, vector)))


def predict_batch(model: TrainedModel, vectors) -> np.ndarray:
    X = _as_matrix(vectors)
    if X.shape[1] != model.feature_length:
        raise ValueError(
            f"feature length {X.shape[1]} does not match model length {model.feature_length}")
    if model.kind == "centroid":
        d2 = ((X[:, None, :] - model.weights[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(d2, axis=1).astype(np.int64)
    return np.argmax(X @ model.weights.T + model.biases[None, :], axis=1).astype(np.int64)


def accuracy_of(model: TrainedModel, vectors, labels) -> float:
    """Fast batch accuracy used by the subset-fitness loop."""
    y = np.asarray(labels, dtype=np.int64)
    return float((predict_batch(model, vectors) == y).mean())


def evaluate(model: TrainedModel, vectors, labels) -> EvalReport:
    """Accuracy plus mean per-sample predict wall time over one pass."""
    X = _as_matrix(vectors)
    y = np.asarray(labels, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot evaluate on an empty sample set")
    predictions = np.empty(X.shape[0], dtype=np.int64)
    start = time.perf_counter()
    for i in range(X.shape[0]):
        predictions[i] = predict(model, X[i])
    elapsed = time.perf_counter() - start

    correct = int((predictions == y).sum())
    per_class = []
    for k in range(model.class_count):
        mask = y == k
        per_class.append(float((predictions[mask] == k).mean()) if mask.any() else 0.0)
    return EvalReport(accuracy=correct / X.shape[0], correct=correct, total=X.shape[0],
                      per_class_accuracy=tuple(per_class),
                      mean_predict_time=elapsed / X.shape[0])


def measure_predict_time(model: TrainedModel, vectors, warmup: int = 100,
                         min_calls: int = 1000, rounds: int = 5) -> float:
    """Mean seconds per single-sample predict.

    Runs `rounds` timed rounds of >= min_calls calls each after a warmup and
    keeps the fastest round mean, which screens out scheduler bursts without
    biasing either side of a comparison measured the same way.
    """
    X = _as_matrix(vectors)
    n = X.shape[0]
    if n == 0:
        raise ValueError("need at least one vector to time predictions")
    for i in range(warmup):
        predict(model, X[i % n])
    calls = max(min_calls, n)
    best = float("inf")
    for _ in range(max(1, rounds)):
        start = time.perf_counter()
        for i in range(calls):
            predict(model, X[i % n])
        best = min(best, (time.perf_counter() - start) / calls)
    return best


def compare_predict_times(entries, warmup: int = 100, min_calls: int = 1000,
                          rounds: int = 15) -> list[float]:
    """Mean predict seconds for several (model, vectors) pairs, measured fairly.

    Rounds are interleaved across the entries so clock-speed drift hits every
    model equally; each entry keeps its fastest round mean.
    """
    pairs = [(model, _as_matrix(vectors)) for model, vectors in entries]
    if any(X.shape[0] == 0 for _, X in pairs):
        raise ValueError("need at least one vector per model to time predictions")
    for model, X in pairs:
        n = X.shape[0]
        for i in range(warmup):
            predict(model, X[i % n])
    mins = [float("inf")] * len(pairs)
    for _ in range(max(1, rounds)):
        for j, (model, X) in enumerate(pairs):
            n = X.shape[0]
            calls = max(min_calls, n)
            start = time.perf_counter()
            for i in range(calls):
                predict(model, X[i % n])
            mins[j] = min(mins[j], (time.perf_counter() - start) / calls)
    return mins


def save_model(model: TrainedModel, path: str | Path) -> None:
    payload = {
        "kind": model.kind,
        "class_count": model.class_count,
        "feature_length": model.feature_length,
        "weights": model.weights.ravel().tolist(),
        "biases": model.biases.tolist(),
        "config": {"kind": model.config.kind, "epochs": model.config.epochs,
                   "regularization": model.config.regularization},
        "seed": model.seed,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def load_model(path: str | Path) -> TrainedModel:
    payload = json.loads(Path(path).read_text())
    config = ClassifierConfig(**payload["config"])
    K, d = payload["class_count"], payload["feature_length"]
    return TrainedModel(
        kind=payload["kind"], class_count=K, feature_length=d,
        weights=np.asarray(payload["weights"], dtype=np.float64).reshape(K, d),
        biases=np.asarray(payload["biases"], dtype=np.float64),
        config=config, seed=payload["seed"],
    )
