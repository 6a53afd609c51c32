"""Sparse identification of nonlinear dynamics: Lorenz data and the
polynomial-dictionary least-squares objective."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import InconsistentData
from .base import ObjectiveModel


def lorenz_rhs(x, sigma: float = 10.0, rho: float = 28.0, beta: float = 8.0 / 3.0) -> np.ndarray:
    """Right-hand side of the Lorenz system."""
    x = np.asarray(x, dtype=float)
    return np.array([
        sigma * (x[1] - x[0]),
        x[0] * (rho - x[2]) - x[1],
        x[0] * x[1] - beta * x[2],
    ])


@dataclass
class TrajectoryData:
    """Sampled states on a uniform time grid, optionally with derivatives.

    Attributes
    ----------
    t : ndarray, shape (N,)
    states : ndarray, shape (N, m)
    derivatives : ndarray or None, shape (N, m)
    """

    t: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray | None = None

    def to_csv(self, path) -> None:
        m = self.states.shape[1]
        dx = self.derivatives if self.derivatives is not None else central_differences(self.t, self.states)
        header = ",".join(["t"] + [f"x_{i + 1}" for i in range(m)] + [f"dx_{i + 1}" for i in range(m)])
        np.savetxt(path, np.column_stack([self.t, self.states, dx]), delimiter=",",
                   header=header, comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryData":
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if raw.shape[1] < 3 or (raw.shape[1] - 1) % 2:
            raise InconsistentData("trajectory CSV needs columns t, x_1..x_m, dx_1..dx_m")
        m = (raw.shape[1] - 1) // 2
        return cls(raw[:, 0], raw[:, 1:1 + m], raw[:, 1 + m:])


def central_differences(t, states) -> np.ndarray:
    """Second-order differences on a uniform grid (one-sided at the ends)."""
    t = np.asarray(t, dtype=float)
    if t.size < 3:
        raise InconsistentData("need at least three samples for differences")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise InconsistentData("time grid is not uniform")
    return np.gradient(np.asarray(states, dtype=float), dt[0], axis=0, edge_order=2)


def simulate_lorenz(sigma: float = 10.0, rho: float = 28.0, beta: float = 8.0 / 3.0,
                    x0=(-8.0, 8.0, 27.0), dt: float = 0.01, steps: int = 2000,
                    noise: float = 0.0, seed: int | None = None) -> TrajectoryData:
    """Integrate the Lorenz system with classical fixed-step RK4.

    Parameters
    ----------
    steps : int
        Number of samples returned (the initial state included).
    noise : float
        Standard deviation of additive Gaussian noise relative to each
        state's standard deviation; derivatives are then obtained from the
        noisy states by central differences.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    f = lambda x: lorenz_rhs(x, sigma, rho, beta)  # noqa: E731
    X = np.empty((steps, 3))
    X[0] = np.asarray(x0, dtype=float)
    for k in range(steps - 1):
        x = X[k]
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        X[k + 1] = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    t = dt * np.arange(steps)
    if noise > 0:
        rng = np.random.default_rng(seed)
        X = X + noise * X.std(axis=0) * rng.standard_normal(X.shape)
    return TrajectoryData(t, X, central_differences(t, X) if steps >= 3 else None)


def monomial_exponents(m: int, order: int) -> list[tuple[int, ...]]:
    """Exponent tuples in graded lexicographic order, constant first."""
    out = []
    for degree in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(m), degree):
            e = [0] * m
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def evaluate_dictionary(states, exponents) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    E = np.asarray(exponents, dtype=int)
    return np.prod(states[:, None, :] ** E[None, :, :], axis=2)


class SindyProblem(ObjectiveModel):
    """``f(W) = 1/(m c N) * sum_i ||W^T Theta(x_i) - xdot_i||^2``.

    ``W`` is the ``c x m`` coefficient matrix, flattened row-major into the
    decision vector, so ``W[i, k]`` sits at position ``i * m + k``.
    """

    name = "sindy"
    has_analytic_hessian = True

    def __init__(self, theta: np.ndarray, xdot: np.ndarray, exponents, state_scale=None,
                 hessian_mode=None):
        theta = np.asarray(theta, dtype=float)
        xdot = np.asarray(xdot, dtype=float)
        if theta.shape[0] != xdot.shape[0]:
            raise InconsistentData("dictionary rows and derivative samples differ")
        self.theta, self.xdot = theta, xdot
        self.N, self.c = theta.shape
        self.m = xdot.shape[1]
        self.exponents = list(exponents)
        self.state_scale = None if state_scale is None else np.asarray(state_scale, float)
        super().__init__(self.c * self.m, hessian_mode)
        self.weight = 1.0 / (self.m * self.c * self.N)
        self.gram = theta.T @ theta
        self.cross = theta.T @ xdot
        self.sq = float(np.sum(xdot * xdot))
        self._H = 2.0 * self.weight * np.kron(self.gram, np.eye(self.m))

    def _W(self, x):
        return np.asarray(x, dtype=float).reshape(self.c, self.m)

    def value(self, x):
        W = self._W(x)
        quad = np.sum(W * (self.gram @ W)) - 2.0 * np.sum(W * self.cross) + self.sq
        return float(self.weight * max(quad, 0.0))

    def residual_value(self, x) -> float:
        """Objective computed from residuals (slower, no cancellation)."""
        R = self.theta @ self._W(x) - self.xdot
        return float(self.weight * np.sum(R * R))

    def gradient(self, x):
        W = self._W(x)
        return (2.0 * self.weight * (self.gram @ W - self.cross)).ravel()

    def gradient_batch(self, X):
        Ws = np.asarray(X, dtype=float).reshape(-1, self.c, self.m)
        return (2.0 * self.weight * (np.einsum("ij,njk->nik", self.gram, Ws) - self.cross)).reshape(len(Ws), -1)

    def _analytic_hessian(self, x):
        return self._H.copy()

    def as_least_squares(self):
        """Return ``(A, b)`` with ``f(x) == ||A x - b||^2`` for the flattened layout."""
        s = np.sqrt(self.weight)
        A = s * np.kron(self.theta, np.eye(self.m))
        b = s * self.xdot.ravel()
        return A, b

    def labels(self) -> list[str]:
        names = []
        for e in self.exponents:
            term = "*".join(f"x{i + 1}" + (f"^{p}" if p > 1 else "") for i, p in enumerate(e) if p)
            names.append(term or "1")
        return names

    def params(self):
        return {"N": self.N, "c": self.c, "m": self.m}


def build_sindy(trajectory: TrajectoryData, poly_order: int = 3, normalize: bool = False,
                hessian_mode=None) -> SindyProblem:
    """Assemble the SINDy least-squares objective from trajectory data.

    Parameters
    ----------
    trajectory : TrajectoryData
        States and (optionally) derivatives; missing derivatives are
        estimated by central differences.
    poly_order : int
        Highest total degree of the monomial dictionary.
    normalize : bool
        Divide every state (and its derivative) by the state's largest
        magnitude before building the dictionary.  High-order monomials of
        raw Lorenz states span roughly eleven orders of magnitude in the
        Gram matrix; this rescaling reduces that to about six.
    """
    X = np.asarray(trajectory.states, dtype=float)
    if X.ndim != 2:
        raise InconsistentData("states must be a 2-D array")
    dX = trajectory.derivatives
    if dX is None:
        dX = central_differences(trajectory.t, X)
    dX = np.asarray(dX, dtype=float)
    if dX.shape != X.shape:
        raise InconsistentData(f"derivative shape {dX.shape} != state shape {X.shape}")
    if len(trajectory.t) != X.shape[0]:
        raise InconsistentData("time vector length differs from state count")
    scale = None
    if normalize:
        scale = np.abs(X).max(axis=0)
        scale[scale == 0] = 1.0
        X, dX = X / scale, dX / scale
    exps = monomial_exponents(X.shape[1], poly_order)
    return SindyProblem(evaluate_dictionary(X, exps), dX, exps, scale, hessian_mode)
