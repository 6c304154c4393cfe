"""Multiclass linear models over sparse binary feature vectors.

Two trainers: multinomial logistic regression (maxent) minimized with a
batch quasi-Newton method, and a one-vs-rest linear SVM with standard
hinge loss solved by dual coordinate descent.  Both are deterministic
given their configuration, and models round-trip bit-exactly through the
versioned JSON persistence format.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, sparse
from scipy.special import logsumexp

from srlkit.errors import SrlkitError
from srlkit.features import FeatureDictionary

_MODEL_FORMAT = "srlkit-linear-model"
_MODEL_VERSION = 1

FeatureVector = tuple[int, ...]  # strictly increasing non-negative indices


class ClassifierError(SrlkitError):
    pass


class EmptyData(ClassifierError):
    pass


class SingleLabelData(ClassifierError):
    pass


class VersionMismatch(ClassifierError):
    pass


class CorruptModel(ClassifierError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    kind: str = "maxent"  # or "svm"
    l2_strength: float = 1.0
    svm_c: float = 1.0
    max_iter: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.l2_strength <= 0:
            raise ClassifierError("l2_strength must be > 0")
        if self.svm_c <= 0:
            raise ClassifierError("svm_c must be > 0")


@dataclass
class LinearModel:
    labels: tuple[str, ...]
    weights: np.ndarray  # (labels, features)
    biases: np.ndarray   # (labels,)
    kind: str
    dictionary: Optional[FeatureDictionary] = None
    metadata: dict = field(default_factory=dict)

    @property
    def feature_count(self) -> int:
        return self.weights.shape[1]


def canonical_label_order(labels) -> tuple[str, ...]:
    """NULL first, then Arg0..Arg4, then ArgM-* alphabetical, then the rest."""
    def key(label: str):
        if label == "NULL":
            return (0, label)
        if re.fullmatch(r"Arg[0-9]", label):
            return (1, label)
        if label.startswith("ArgM-"):
            return (2, label)
        return (3, label)

    return tuple(sorted(set(labels), key=key))


def _to_csr(data: list[tuple[FeatureVector, str]], feature_count: int) -> sparse.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    for fv, _ in data:
        indices.extend(fv)
        indptr.append(len(indices))
    values = np.ones(len(indices))
    return sparse.csr_matrix(
        (values, np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(data), feature_count),
    )


def _prepare(data, config: TrainConfig, dictionary: Optional[FeatureDictionary]):
    if not data:
        raise EmptyData("no training data")
    labels = canonical_label_order(label for _, label in data)
    if len(labels) < 2:
        raise SingleLabelData(f"need >= 2 distinct labels, got {labels}")
    if dictionary is not None:
        feature_count = len(dictionary)
    else:
        feature_count = max((max(fv) + 1 for fv, _ in data if fv), default=0)
    x = _to_csr(data, feature_count)
    label_index = {label: i for i, label in enumerate(labels)}
    y = np.array([label_index[label] for _, label in data], dtype=np.int64)
    return x, y, labels, feature_count


def maxent_loss_grad(params: np.ndarray, x, y: np.ndarray, n_labels: int, l2_strength: float):
    """Multinomial NLL plus L2 penalty on weights (biases unpenalized).

    ``params`` is the flat concatenation of the (labels, features) weight
    matrix and the bias vector.  Returns (loss, flat gradient).
    """
    n, f = x.shape
    w = params[: n_labels * f].reshape(n_labels, f)
    b = params[n_labels * f:]
    z = (x @ w.T if f else np.zeros((n, n_labels))) + b
    lse = logsumexp(z, axis=1)
    nll = float(lse.sum() - z[np.arange(n), y].sum())
    loss = nll + 0.5 / l2_strength * float((w * w).sum())
    p = np.exp(z - lse[:, None])
    p[np.arange(n), y] -= 1.0
    gw = (x.T @ p).T if f else np.zeros((n_labels, 0))
    gw = np.asarray(gw) + w / l2_strength
    gb = p.sum(axis=0)
    return loss, np.concatenate([gw.ravel(), gb])


def train_maxent(
    data: list[tuple[FeatureVector, str]],
    config: TrainConfig = TrainConfig(),
    dictionary: Optional[FeatureDictionary] = None,
) -> LinearModel:
    """Fit multinomial logistic regression with L-BFGS-B.

    The optimizer runs until the projected gradient satisfies the
    tolerance derived from config.tol (a bound on the gradient 2-norm)
    or config.max_iter iterations.
    """
    x, y, labels, feature_count = _prepare(data, config, dictionary)
    n_labels = len(labels)
    n_params = n_labels * feature_count + n_labels
    x0 = np.zeros(n_params)
    # ||g||_2 <= sqrt(m) * max|g_i|: per-component bound that yields tol
    gtol = config.tol / np.sqrt(n_params)
    result = optimize.minimize(
        maxent_loss_grad,
        x0,
        args=(x, y, n_labels, config.l2_strength),
        method="L-BFGS-B",
        jac=True,
        options={"maxiter": config.max_iter, "gtol": gtol, "ftol": 1e-16, "maxfun": 10 * config.max_iter},
    )
    w = result.x[: n_labels * feature_count].reshape(n_labels, feature_count)
    b = result.x[n_labels * feature_count:]
    metadata = {
        "kind": "maxent",
        "penalty": "sum-nll + ||W||^2 / (2 * l2_strength), biases unpenalized",
        "optimizer": "l-bfgs-b",
        "l2_strength": config.l2_strength,
        "max_iter": config.max_iter,
        "tol": config.tol,
        "seed": config.seed,
        "iterations": int(result.nit),
        "final_loss": float(result.fun),
    }
    return LinearModel(labels, w, b, "maxent", dictionary, metadata)


def svm_objective(x, y_signed: np.ndarray, w: np.ndarray, b: float, c: float) -> float:
    """Primal hinge objective with the regularized-intercept convention."""
    margins = y_signed * (x @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return 0.5 * (float(w @ w) + b * b) + c * hinge


def _solve_binary_hinge(rows: list[np.ndarray], y_signed: np.ndarray, feature_count: int,
                        c: float, max_iter: int, tol: float, rng: np.random.RandomState):
    """Dual coordinate descent for the binary hinge SVM.

    The intercept is an extra always-on feature (index feature_count), so
    it shares the L2 penalty; rows must already carry that index.  Runs
    epochs over a seeded permutation until the largest projected-gradient
    violation drops below tol.
    """
    n = len(rows)
    w = np.zeros(feature_count + 1)
    alpha = np.zeros(n)
    q_diag = np.array([len(r) for r in rows], dtype=np.float64)
    for _ in range(max_iter):
        max_violation = 0.0
        for i in rng.permutation(n):
            idx = rows[i]
            g = y_signed[i] * w[idx].sum() - 1.0
            if alpha[i] <= 0.0:
                pg = min(g, 0.0)
            elif alpha[i] >= c:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                max_violation = max(max_violation, abs(pg))
                new_alpha = min(max(alpha[i] - g / q_diag[i], 0.0), c)
                delta = new_alpha - alpha[i]
                if delta != 0.0:
                    w[idx] += delta * y_signed[i]
                    alpha[i] = new_alpha
        if max_violation < tol:
            break
    return w[:feature_count], float(w[feature_count])


def train_svm(
    data: list[tuple[FeatureVector, str]],
    config: TrainConfig = TrainConfig(kind="svm", max_iter=1000, tol=1e-4),
    dictionary: Optional[FeatureDictionary] = None,
) -> LinearModel:
    """Fit a one-vs-rest linear SVM with standard hinge loss."""
    x, y, labels, feature_count = _prepare(data, config, dictionary)
    n_labels = len(labels)
    rows = [
        np.append(x.indices[x.indptr[i]: x.indptr[i + 1]], feature_count).astype(np.int64)
        for i in range(x.shape[0])
    ]
    weights = np.zeros((n_labels, feature_count))
    biases = np.zeros(n_labels)
    for j in range(n_labels):
        y_signed = np.where(y == j, 1.0, -1.0)
        rng = np.random.RandomState(config.seed + j)
        weights[j], biases[j] = _solve_binary_hinge(
            rows, y_signed, feature_count, config.svm_c, config.max_iter, config.tol, rng
        )
    metadata = {
        "kind": "svm",
        "loss": "standard hinge, one-vs-rest",
        "penalty": "0.5 * ||[w; b]||^2 + C * sum hinge (regularized intercept)",
        "optimizer": "dual coordinate descent, seeded permutations",
        "svm_c": config.svm_c,
        "max_iter": config.max_iter,
        "tol": config.tol,
        "seed": config.seed,
    }
    return LinearModel(labels, weights, biases, "svm", dictionary, metadata)


def train(data, config: TrainConfig, dictionary=None) -> LinearModel:
    if config.kind == "maxent":
        return train_maxent(data, config, dictionary)
    if config.kind == "svm":
        return train_svm(data, config, dictionary)
    raise ClassifierError(f"unknown classifier kind {config.kind!r}")


def scores_of(model: LinearModel, fv: FeatureVector) -> np.ndarray:
    idx = [i for i in fv if 0 <= i < model.feature_count]
    if idx:
        return model.weights[:, idx].sum(axis=1) + model.biases
    return model.biases.copy()


def predict(model: LinearModel, fv: FeatureVector) -> tuple[str, dict[str, float]]:
    """Argmax label plus per-label linear scores; ties break by label order."""
    raw = scores_of(model, fv)
    label = model.labels[int(np.argmax(raw))]
    return label, {lab: float(s) for lab, s in zip(model.labels, raw)}


def predict_proba(model: LinearModel, fv: FeatureVector) -> dict[str, float]:
    """Softmax class probabilities (meaningful for maxent models)."""
    raw = scores_of(model, fv)
    p = np.exp(raw - logsumexp(raw))
    return {lab: float(v) for lab, v in zip(model.labels, p)}


def model_to_dict(model: LinearModel) -> dict:
    return {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "kind": model.kind,
        "labels": list(model.labels),
        "feature_count": model.feature_count,
        "weights": [[float(v) for v in row] for row in model.weights],
        "biases": [float(v) for v in model.biases],
        "features": model.dictionary.to_list() if model.dictionary else None,
        "metadata": model.metadata,
    }


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def model_from_dict(payload: dict) -> LinearModel:
    try:
        if payload.get("format") != _MODEL_FORMAT:
            raise CorruptModel("not a linear model payload")
        if payload.get("version") != _MODEL_VERSION:
            raise VersionMismatch(f"unsupported model version {payload.get('version')!r}")
        labels = tuple(payload["labels"])
        weights = np.array(payload["weights"], dtype=np.float64).reshape(
            len(labels), payload["feature_count"]
        )
        biases = np.array(payload["biases"], dtype=np.float64)
        if biases.shape != (len(labels),):
            raise CorruptModel("bias shape mismatch")
        features = payload["features"]
        dictionary = FeatureDictionary.from_list(features) if features is not None else None
        if dictionary is not None and len(dictionary) != payload["feature_count"]:
            raise CorruptModel("feature dictionary size mismatch")
        return LinearModel(labels, weights, biases, payload["kind"], dictionary, payload["metadata"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model payload: {exc}") from exc


def load_model(path) -> LinearModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"cannot parse model file {path}: {exc}") from exc
    return model_from_dict(payload)
