"""Common interface for smooth objectives."""

from __future__ import annotations

import copy
from typing import Any

import numpy as np

from ..linalg import fd_jacobian

HESSIAN_MODES = ("analytic", "finite_difference", "sr1")


class ObjectiveModel:
    """A twice continuously differentiable objective ``f: R^n -> R``.

    Subclasses implement :meth:`value` and :meth:`gradient`; those with an
    exact Hessian override :meth:`_analytic_hessian`.  Models hold no mutable
    evaluation state, so a single instance can be shared across threads.

    Parameters
    ----------
    dim : int
        Number of decision variables.
    hessian_mode : {"analytic", "finite_difference", "sr1"}
        How :meth:`hessian` is produced.  In ``"sr1"`` mode the model itself
        still returns a finite-difference Hessian; the continuation driver
        uses it only to seed a per-branch SR1 approximation.
    """

    name = "objective"
    has_analytic_hessian = False

    def __init__(self, dim: int, hessian_mode: str | None = None):
        self.dim = int(dim)
        if hessian_mode is None:
            hessian_mode = "analytic" if self.has_analytic_hessian else "finite_difference"
        if hessian_mode not in HESSIAN_MODES:
            raise ValueError(f"unknown hessian mode {hessian_mode!r}")
        self.hessian_mode = hessian_mode

    # -- evaluation -----------------------------------------------------
    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _analytic_hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.hessian_mode == "analytic" and self.has_analytic_hessian:
            return self._analytic_hessian(x)
        return fd_jacobian(self.gradient, x, rel_step=1e-5)

    def gradient_batch(self, X: np.ndarray) -> np.ndarray:
        """Gradients at the rows of ``X`` (shape ``(N, n)``)."""
        return np.array([self.gradient(row) for row in np.asarray(X, dtype=float)])

    def value_batch(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.value(row) for row in np.asarray(X, dtype=float)])

    __call__ = value

    # -- bookkeeping ----------------------------------------------------
    def params(self) -> dict[str, Any]:
        """JSON-friendly parameters that identify this instance."""
        return {}

    def with_hessian_mode(self, mode: str) -> "ObjectiveModel":
        if mode not in HESSIAN_MODES:
            raise ValueError(f"unknown hessian mode {mode!r}")
        clone = copy.copy(self)
        clone.hessian_mode = mode
        return clone

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, hessian_mode={self.hessian_mode!r})"


class VectorizedModel(ObjectiveModel):
    """Model whose formulas accept coordinates along the leading axis.

    Subclasses implement ``_f(X)`` and ``_g(X)`` where ``X`` has shape
    ``(n, ...)``; the single-point and batch entry points are derived.
    """

    def _f(self, X):
        raise NotImplementedError

    def _g(self, X):
        raise NotImplementedError

    def value(self, x):
        return float(self._f(np.asarray(x, dtype=float)))

    def gradient(self, x):
        return np.asarray(self._g(np.asarray(x, dtype=float)), dtype=float)

    def value_batch(self, X):
        return np.asarray(self._f(np.asarray(X, dtype=float).T), dtype=float)

    def gradient_batch(self, X):
        return np.asarray(self._g(np.asarray(X, dtype=float).T), dtype=float).T
