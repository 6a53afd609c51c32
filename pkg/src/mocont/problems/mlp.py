"""Small fully connected classifier with softmax output and cross-entropy loss."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.special import log_softmax, softmax

from ..errors import ShapeMismatch
from .base import ObjectiveModel

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda a, z: 1.0 - z * z),
    "softplus": (lambda a: np.logaddexp(0.0, a), lambda a, z: 0.5 * (1.0 + np.tanh(0.5 * a))),
}


@dataclass
class LabeledData:
    features: np.ndarray  # (N, p)
    labels: np.ndarray    # (N,) integer class ids

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def one_hot(self, n_classes: int | None = None) -> np.ndarray:
        k = n_classes or self.n_classes
        Y = np.zeros((self.labels.size, k))
        Y[np.arange(self.labels.size), self.labels] = 1.0
        return Y


def load_dataset_csv(path) -> LabeledData:
    """Read ``features..., label`` rows (one header line)."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return LabeledData(raw[:, :-1], raw[:, -1].astype(int))


def load_iris() -> LabeledData:
    """The bundled 150-sample, 4-feature, 3-class table."""
    with resources.as_file(resources.files("mocont.problems") / "data" / "iris.csv") as p:
        return load_dataset_csv(p)


def train_test_split(data: LabeledData, train_fraction: float = 0.7, seed: int = 0):
    rng = np.random.default_rng(seed)
    idx = rng.permutation(data.labels.size)
    k = int(round(train_fraction * idx.size))
    tr, te = idx[:k], idx[k:]
    return (LabeledData(data.features[tr], data.labels[tr]),
            LabeledData(data.features[te], data.labels[te]))


class MlpProblem(ObjectiveModel):
    """Mean cross-entropy of a tanh/softplus network with softmax output.

    Weight layout: for each layer mapping width ``p`` to width ``q`` the
    parameters form a ``q x (p + 1)`` block whose first column is the bias;
    blocks are flattened row-major and concatenated layer by layer.
    """

    name = "mlp"

    def __init__(self, layer_spec, data: LabeledData, activation: str = "tanh",
                 hessian_mode=None):
        layer_spec = [int(w) for w in layer_spec]
        if len(layer_spec) < 2:
            raise ShapeMismatch("need at least an input and an output width")
        if data.features.ndim != 2 or data.features.shape[1] != layer_spec[0]:
            raise ShapeMismatch(
                f"features have width {data.features.shape[-1]}, network expects {layer_spec[0]}")
        if data.n_classes > layer_spec[-1]:
            raise ShapeMismatch("more classes in the labels than output units")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.layer_spec = layer_spec
        self.activation = activation
        self.X = np.asarray(data.features, dtype=float)
        self.Y = data.one_hot(layer_spec[-1])
        self.shapes = [(q, p + 1) for p, q in zip(layer_spec[:-1], layer_spec[1:])]
        self.offsets = np.cumsum([0] + [q * r for q, r in self.shapes])
        super().__init__(int(self.offsets[-1]), hessian_mode)

    def unpack(self, w):
        w = np.asarray(w, dtype=float)
        if w.size != self.dim:
            raise ShapeMismatch(f"expected {self.dim} weights, got {w.size}")
        return [w[self.offsets[i]:self.offsets[i + 1]].reshape(s) for i, s in enumerate(self.shapes)]

    def _forward(self, w, X):
        h, _ = _ACTIVATIONS[self.activation]
        Ms = self.unpack(w)
        Z = [X]
        A = []
        for i, M in enumerate(Ms):
            a = Z[-1] @ M[:, 1:].T + M[:, 0]
            A.append(a)
            if i < len(Ms) - 1:
                Z.append(h(a))
        return Ms, Z, A

    def predict_proba(self, w, X=None) -> np.ndarray:
        X = self.X if X is None else np.asarray(X, dtype=float)
        _, _, A = self._forward(w, X)
        return softmax(A[-1], axis=1)

    def value(self, w):
        _, _, A = self._forward(w, self.X)
        return float(-np.sum(self.Y * log_softmax(A[-1], axis=1)) / self.X.shape[0])

    def gradient(self, w):
        _, dh = _ACTIVATIONS[self.activation]
        Ms, Z, A = self._forward(w, self.X)
        delta = (softmax(A[-1], axis=1) - self.Y) / self.X.shape[0]
        grads = [None] * len(Ms)
        for i in range(len(Ms) - 1, -1, -1):
            grads[i] = np.column_stack([delta.sum(axis=0), delta.T @ Z[i]])
            if i > 0:
                delta = (delta @ Ms[i][:, 1:]) * dh(A[i - 1], Z[i])
        return np.concatenate([g.ravel() for g in grads])

    def accuracy(self, w, data: LabeledData | None = None) -> float:
        if data is None:
            P, y = self.predict_proba(w), self.Y.argmax(axis=1)
        else:
            P, y = self.predict_proba(w, data.features), data.labels
        return float(np.mean(P.argmax(axis=1) == y))

    def params(self):
        return {"layer_spec": self.layer_spec, "activation": self.activation, "N": int(self.X.shape[0])}


def build_mlp(layer_spec, dataset: LabeledData, activation: str = "tanh",
              hessian_mode=None) -> MlpProblem:
    """Create the classifier objective; see :class:`MlpProblem` for the layout."""
    return MlpProblem(layer_spec, dataset, activation, hessian_mode)


def make_iris_mlp(seed: int = 0, train_fraction: float = 0.7, activation: str = "tanh",
                  standardize: bool = True, hessian_mode=None) -> MlpProblem:
    """4-2-2-3 network (25 weights) trained on a seeded split of the bundled data.

    Features are z-scored with training-set statistics when ``standardize``.
    """
    train, _ = train_test_split(load_iris(), train_fraction, seed)
    if standardize:
        mu, sd = train.features.mean(axis=0), train.features.std(axis=0)
        train = LabeledData((train.features - mu) / sd, train.labels)
    model = build_mlp([4, 2, 2, 3], train, activation, hessian_mode)
    model.split_seed = seed
    return model
