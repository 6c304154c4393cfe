"""Word clustering: embedding ingestion and Gaussian-mixture fitting.

Pre-trained embeddings are read from a text file (one ``word f1 .. fd``
entry per line, optional ``<count> <dim>`` header).  A diagonal-covariance
mixture is fitted by EM with k-means++ initialization; every vocabulary
word gets a hard cluster id (argmax responsibility) and one extra id is
reserved for unknown words.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from srlkit.errors import SrlkitError

VARIANCE_FLOOR = 1e-6

_MODEL_HEADER = "srlkit-cluster-model"
_MODEL_VERSION = 1


class ClusteringError(SrlkitError):
    pass


class EmptyFile(ClusteringError):
    pass


class InconsistentDimension(ClusteringError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class NonNumericComponent(ClusteringError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class TooFewVectors(ClusteringError):
    pass


class DegenerateComponent(ClusteringError):
    pass


class CorruptClusterModel(ClusteringError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)

    def words(self) -> list[str]:
        return list(self.vectors)

    def matrix(self) -> np.ndarray:
        return np.stack([self.vectors[w] for w in self.vectors])


def load_embeddings(path) -> EmbeddingTable:
    """Read an embedding file; duplicate words keep the last entry.

    Words use ``_`` for internal spaces, mirroring the tree file token
    convention.
    """
    dim = None
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            word = parts[0].replace("_", " ")
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise NonNumericComponent(lineno, f"non-numeric component in {line.strip()!r}") from None
            if vec.size == 0 or not np.all(np.isfinite(vec)):
                raise NonNumericComponent(lineno, "empty or non-finite vector")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise InconsistentDimension(
                    lineno, f"expected {dim} components, found {vec.size}"
                )
            if word in vectors:
                print(f"warning: duplicate embedding for {word!r}, keeping last", file=sys.stderr)
            vectors[word] = vec
    if not vectors:
        raise EmptyFile(f"no embeddings in {path}")
    return EmbeddingTable(dim, vectors)


@dataclass(frozen=True)
class ClusterModel:
    k: int
    dim: int
    means: np.ndarray      # (k, dim)
    variances: np.ndarray  # (k, dim), all components >= VARIANCE_FLOOR
    weights: np.ndarray    # (k,), sums to 1
    assignments: dict[str, int]
    log_likelihoods: tuple[float, ...] = field(default=(), compare=False)

    @property
    def unknown_id(self) -> int:
        return self.k


def _log_gaussian(data: np.ndarray, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Log density of each row under each diagonal Gaussian: (n, k)."""
    # (n, k, d) broadcasting kept out of memory by summing per component
    n, d = data.shape
    k = means.shape[0]
    out = np.empty((n, k))
    for c in range(k):
        diff = data - means[c]
        out[:, c] = -0.5 * (
            d * np.log(2 * np.pi)
            + np.log(variances[c]).sum()
            + (diff * diff / variances[c]).sum(axis=1)
        )
    return out


def _kmeanspp_init(data: np.ndarray, k: int, rng: np.random.RandomState) -> np.ndarray:
    """k-means++ seeding: spread initial means by squared distance."""
    n = data.shape[0]
    centers = [data[rng.randint(n)]]
    d2 = ((data - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.randint(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2 / total), rng.random_sample()))
            idx = min(idx, n - 1)
        centers.append(data[idx])
        d2 = np.minimum(d2, ((data - centers[-1]) ** 2).sum(axis=1))
    return np.stack(centers)


def fit_gmm(
    table: EmbeddingTable,
    k: int,
    seed: int = 0,
    max_iter: int = 200,
    tol: float = 1e-5,
) -> ClusterModel:
    """Fit a k-component diagonal-covariance mixture by EM.

    Deterministic for fixed arguments; stops when the log-likelihood
    improves by less than ``tol`` or after ``max_iter`` iterations.
    """
    if k < 1:
        raise ClusteringError(f"k must be >= 1, got {k}")
    if len(table) < k:
        raise TooFewVectors(f"{len(table)} vectors for k={k}")

    words = table.words()
    data = table.matrix()
    n, d = data.shape
    rng = np.random.RandomState(seed)

    means = _kmeanspp_init(data, k, rng)
    global_var = np.maximum(data.var(axis=0), VARIANCE_FLOOR)
    variances = np.tile(global_var, (k, 1))
    weights = np.full(k, 1.0 / k)

    history: list[float] = []
    for _ in range(max_iter):
        # E-step
        joint = _log_gaussian(data, means, variances) + np.log(weights)
        norm = logsumexp(joint, axis=1)
        ll = float(norm.sum())
        if history and ll - history[-1] < tol:
            history.append(ll)
            break
        history.append(ll)
        # M-step
        resp = np.exp(joint - norm[:, None])
        counts = resp.sum(axis=0)
        if np.any(counts < 1e-12):
            raise DegenerateComponent(
                f"component lost all responsibility (min count {counts.min():.3e})"
            )
        weights = counts / n
        means = (resp.T @ data) / counts[:, None]
        second = (resp.T @ (data * data)) / counts[:, None]
        variances = np.maximum(second - means * means, VARIANCE_FLOOR)

    # hard assignments under the final parameters
    joint = _log_gaussian(data, means, variances) + np.log(weights)
    assignments = {word: int(np.argmax(joint[i])) for i, word in enumerate(words)}
    return ClusterModel(k, d, means, variances, weights, assignments, tuple(history))


def assign_cluster(model: ClusterModel, word: str) -> int:
    """Stored cluster id for a known word; the reserved id otherwise."""
    return model.assignments.get(word, model.unknown_id)


def cluster_model_to_text(model: ClusterModel) -> str:
    """Versioned text serialization; floats keep full precision."""
    out = [
        f"{_MODEL_HEADER} {_MODEL_VERSION}",
        f"{model.k} {model.dim} {model.unknown_id}",
        "means",
    ]
    out.extend(" ".join(repr(float(x)) for x in row) for row in model.means)
    out.append("variances")
    out.extend(" ".join(repr(float(x)) for x in row) for row in model.variances)
    out.append("weights")
    out.append(" ".join(repr(float(x)) for x in model.weights))
    out.append("assignments")
    out.extend(f"{word.replace(' ', '_')} {cid}" for word, cid in model.assignments.items())
    return "\n".join(out) + "\n"


def save_cluster_model(model: ClusterModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cluster_model_to_text(model))


def cluster_model_from_text(text: str) -> ClusterModel:
    lines = text.splitlines()
    try:
        header = lines[0].split()
        if header[0] != _MODEL_HEADER:
            raise CorruptClusterModel(f"not a cluster model file: {path}")
        if int(header[1]) != _MODEL_VERSION:
            raise CorruptClusterModel(f"unsupported version {header[1]}")
        k, dim, unknown_id = (int(x) for x in lines[1].split())
        if unknown_id != k:
            raise CorruptClusterModel("unknown id must equal k")
        pos = 2
        if lines[pos] != "means":
            raise CorruptClusterModel("expected means section")
        means = np.array(
            [[float(x) for x in lines[pos + 1 + i].split()] for i in range(k)]
        )
        pos += 1 + k
        if lines[pos] != "variances":
            raise CorruptClusterModel("expected variances section")
        variances = np.array(
            [[float(x) for x in lines[pos + 1 + i].split()] for i in range(k)]
        )
        pos += 1 + k
        if lines[pos] != "weights":
            raise CorruptClusterModel("expected weights section")
        weights = np.array([float(x) for x in lines[pos + 1].split()])
        pos += 2
        if lines[pos] != "assignments":
            raise CorruptClusterModel("expected assignments section")
        assignments = {}
        for line in lines[pos + 1:]:
            if not line.strip():
                continue
            word, cid = line.rsplit(" ", 1)
            assignments[word.replace("_", " ")] = int(cid)
    except (IndexError, ValueError) as exc:
        raise CorruptClusterModel(f"malformed cluster model file: {exc}") from exc
    if means.shape != (k, dim) or variances.shape != (k, dim) or weights.shape != (k,):
        raise CorruptClusterModel("section shapes do not match header")
    return ClusterModel(k, dim, means, variances, weights, assignments)
