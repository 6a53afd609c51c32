"""Closed-form test objectives."""

from __future__ import annotations

import numpy as np

from ..errors import UnknownProblem
from .base import ObjectiveModel, VectorizedModel


class Example1(VectorizedModel):
    """``(x1 + 1)^2 + (x2 - 1)^4 - (x2 - 1/4)^3 / 2``; two turning points."""

    name = "example1"
    has_analytic_hessian = True

    def __init__(self, hessian_mode=None):
        super().__init__(2, hessian_mode)

    def _f(self, X):
        return (X[0] + 1) ** 2 + (X[1] - 1) ** 4 - 0.5 * (X[1] - 0.25) ** 3

    def _g(self, X):
        return np.stack([2 * (X[0] + 1), 4 * (X[1] - 1) ** 3 - 1.5 * (X[1] - 0.25) ** 2])

    def _analytic_hessian(self, x):
        return np.array([[2.0, 0.0], [0.0, 12 * (x[1] - 1) ** 2 - 3 * (x[1] - 0.25)]])


class Example2(VectorizedModel):
    """``(x1 - 2)^2 + (x2 - 1)^2 + (x3 - 1)^2``."""

    name = "example2"
    has_analytic_hessian = True

    def __init__(self, hessian_mode=None):
        super().__init__(3, hessian_mode)

    def _f(self, X):
        return (X[0] - 2) ** 2 + (X[1] - 1) ** 2 + (X[2] - 1) ** 2

    def _g(self, X):
        return np.stack([2 * (X[0] - 2), 2 * (X[1] - 1), 2 * (X[2] - 1)])

    def _analytic_hessian(self, x):
        return 2.0 * np.eye(3)


class Example3(VectorizedModel):
    """``(x1 - 2)^2 + (x2 - 1)^2 + 2 x1 x3``; indefinite Hessian."""

    name = "example3"
    has_analytic_hessian = True

    def __init__(self, hessian_mode=None):
        super().__init__(3, hessian_mode)

    def _f(self, X):
        return (X[0] - 2) ** 2 + (X[1] - 1) ** 2 + 2 * X[0] * X[2]

    def _g(self, X):
        return np.stack([2 * (X[0] - 2) + 2 * X[2], 2 * (X[1] - 1), 2 * X[0]])

    def _analytic_hessian(self, x):
        return np.array([[2.0, 0.0, 2.0], [0.0, 2.0, 0.0], [2.0, 0.0, 0.0]])


class Toy3(VectorizedModel):
    """``(x1 - 1/4)^2 + (x2 - 1/2)^2 + (x3 - 1)^4 - (x3 - 1/4)^3 / 2``.

    Along its critical set the activation structure changes six times.
    """

    name = "toy4_1"
    has_analytic_hessian = True

    def __init__(self, hessian_mode=None):
        super().__init__(3, hessian_mode)

    def _f(self, X):
        return ((X[0] - 0.25) ** 2 + (X[1] - 0.5) ** 2
                + (X[2] - 1) ** 4 - 0.5 * (X[2] - 0.25) ** 3)

    def _g(self, X):
        return np.stack([2 * (X[0] - 0.25), 2 * (X[1] - 0.5),
                         4 * (X[2] - 1) ** 3 - 1.5 * (X[2] - 0.25) ** 2])

    def _analytic_hessian(self, x):
        return np.diag([2.0, 2.0, 12 * (x[2] - 1) ** 2 - 3 * (x[2] - 0.25)])


class Split(VectorizedModel):
    """``(x1 - 2.5)^2 + ((x2 + 1)^2 + (x3 - 1)^2 - 3)^2``.

    At ``(0.5, 0, 0)`` the critical set branches into three pieces with the
    same image.
    """

    name = "split"
    has_analytic_hessian = True

    def __init__(self, hessian_mode=None):
        super().__init__(3, hessian_mode)

    def _f(self, X):
        r = (X[1] + 1) ** 2 + (X[2] - 1) ** 2 - 3
        return (X[0] - 2.5) ** 2 + r ** 2

    def _g(self, X):
        r = (X[1] + 1) ** 2 + (X[2] - 1) ** 2 - 3
        return np.stack([2 * (X[0] - 2.5), 4 * r * (X[1] + 1), 4 * r * (X[2] - 1)])

    def _analytic_hessian(self, x):
        u, w = x[1] + 1, x[2] - 1
        r = u * u + w * w - 3
        return np.array([
            [2.0, 0.0, 0.0],
            [0.0, 4 * r + 8 * u * u, 8 * u * w],
            [0.0, 8 * u * w, 4 * r + 8 * w * w],
        ])


class Polynomial(ObjectiveModel):
    """``(x1 - a1)^4 + sum_{i>1} (x_i - a_i)^2`` with ``a1 = 1``.

    The remaining ``a_i`` are drawn uniformly from ``[-1, 1]`` with
    ``numpy.random.default_rng(seed)``.
    """

    name = "polynomial"
    has_analytic_hessian = True

    def __init__(self, n: int = 1000, seed: int = 0, hessian_mode=None):
        super().__init__(n, hessian_mode)
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        a = rng.uniform(-1.0, 1.0, size=n)
        a[0] = 1.0
        self.a = a

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.a
        return float(d[0] ** 4 + d[1:] @ d[1:])

    def gradient(self, x):
        d = np.asarray(x, dtype=float) - self.a
        g = 2.0 * d
        g[0] = 4.0 * d[0] ** 3
        return g

    def gradient_batch(self, X):
        D = np.asarray(X, dtype=float) - self.a
        G = 2.0 * D
        G[:, 0] = 4.0 * D[:, 0] ** 3
        return G

    def _analytic_hessian(self, x):
        diag = np.full(self.dim, 2.0)
        diag[0] = 12.0 * (x[0] - self.a[0]) ** 2
        return np.diag(diag)

    def params(self):
        return {"n": self.dim, "seed": self.seed}


class Quadratic(VectorizedModel):
    """``(x - c)^T Q (x - c)`` with ``Q = I`` unless given."""

    name = "quadratic"
    has_analytic_hessian = True

    def __init__(self, c, Q=None, hessian_mode=None):
        c = np.asarray(c, dtype=float)
        super().__init__(c.size, hessian_mode)
        self.c = c
        self.Q = np.eye(c.size) if Q is None else 0.5 * (np.asarray(Q, float) + np.asarray(Q, float).T)

    def _f(self, X):
        D = X - self.c.reshape((-1,) + (1,) * (X.ndim - 1))
        return np.einsum("i...,ij,j...->...", D, self.Q, D)

    def _g(self, X):
        D = X - self.c.reshape((-1,) + (1,) * (X.ndim - 1))
        return 2.0 * np.tensordot(self.Q, D, axes=(1, 0))

    def _analytic_hessian(self, x):
        return 2.0 * self.Q

    def params(self):
        return {"c": self.c.tolist(), "Q": self.Q.tolist()}


class LeastSquares(ObjectiveModel):
    """``scale * ||A x - b||^2``.

    With ``scale = 1`` this is the data term of the Lasso problem
    ``||Ax - b||^2 + lambda ||x||_1``.
    """

    name = "least_squares"
    has_analytic_hessian = True

    def __init__(self, A, b, scale: float = 1.0, hessian_mode=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise ValueError("A and b have inconsistent row counts")
        super().__init__(A.shape[1], hessian_mode)
        self.A, self.b, self.scale = A, b, float(scale)
        self._H = 2.0 * self.scale * (A.T @ A)
        self._Atb = A.T @ b

    def value(self, x):
        r = self.A @ np.asarray(x, dtype=float) - self.b
        return float(self.scale * (r @ r))

    def gradient(self, x):
        return self._H @ np.asarray(x, dtype=float) - 2.0 * self.scale * self._Atb

    def gradient_batch(self, X):
        return np.asarray(X, dtype=float) @ self._H - 2.0 * self.scale * self._Atb

    def _analytic_hessian(self, x):
        return self._H.copy()

    def params(self):
        return {"A": self.A.tolist(), "b": self.b.tolist(), "scale": self.scale}


def random_lasso_instance(seed: int, m: int = 20, n: int = 5) -> LeastSquares:
    """Gaussian design with a sparse planted signal and small noise."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    x_true = np.zeros(n)
    k = max(1, n // 2)
    x_true[rng.choice(n, size=k, replace=False)] = rng.uniform(-2.0, 2.0, size=k)
    b = A @ x_true + 0.05 * rng.standard_normal(m)
    model = LeastSquares(A, b)
    model.name = "lasso"
    return model


_FIXED = {
    "example1": Example1,
    "example2": Example2,
    "example3": Example3,
    "toy4_1": Toy3,
    "split": Split,
}


def make_paper_problem(name: str, n: int | None = None, seed: int | None = None,
                       hessian_mode: str | None = None) -> ObjectiveModel:
    """Instantiate one of the named analytic test problems.

    Parameters
    ----------
    name : str
        ``example1``, ``example2``, ``example3``, ``toy4_1``, ``split`` or
        ``polynomial``.
    n, seed : int, optional
        Dimension and seed of the ``polynomial`` problem (defaults 1000, 0).

    Raises
    ------
    UnknownProblem
        For any other name.
    """
    if name in _FIXED:
        return _FIXED[name](hessian_mode=hessian_mode)
    if name == "polynomial":
        return Polynomial(n=1000 if n is None else n, seed=0 if seed is None else seed,
                          hessian_mode=hessian_mode)
    raise UnknownProblem(f"unknown problem {name!r}")
