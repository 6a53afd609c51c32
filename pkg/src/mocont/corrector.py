"""Projection of a predicted point back onto the critical set.

For a structure with active indices ``P`` (anchor ``a = P[0]``) and signs
``s`` the corrector solves, in the active coordinates ``y``,

    min ||y - y_p||^2
    s.t. g_j^2 - g_a^2 = 0          for active j != a
         g_j^2 - g_a^2 <= 0         for inactive j
         s_j g_j <= 0,  -s_j y_j <= 0   for active j

with ``g = grad f(embed(y))``.  This is done by SQP with an l1 merit line
search.

The linearized equality rows are ``2 C G`` with ``G`` the reduced Hessian
and ``C`` the (k-1) x k matrix holding ``g_j`` on its diagonal and ``-g_a``
in the first column.  ``C`` always has the null vector ``1/g``, so when ``G``
is nonsingular the linearized equality set is a line ``d_p + t * eta``.
The QP subproblem is then a convex quadratic in ``t`` with interval
constraints and is solved in closed form.  A singular-value fallback covers
degenerate Jacobians.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import InfeasibleSigns, NotConverged
from .kkt import EPS_PA, EPS_ZERO, ActiveSet, criticality_residual
from .linalg import lu_factor

HessianFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class CorrectorOptions:
    """Tolerances of the corrector SQP and of the retreat fallback."""

    feas_tol: float = 1e-9
    step_tol: float = 1e-10
    max_iter: int = 100
    kkt_tol: float = 1e-6
    grad_zero_tol: float = 1e-7
    eps_zero: float = EPS_ZERO
    eps_pa: float = EPS_PA
    quasi_newton: bool = True
    armijo: float = 1e-4
    retreat_lambda: float = 0.5
    retreat_max: int = 5
    stall_window: int = 10


@dataclass
class CorrectorSpec:
    """Input of one corrector solve.

    Attributes
    ----------
    x_p : ndarray
        Predicted point (start and anchor of the distance objective).
    structure : ActiveSet
        Coordinates allowed to be nonzero and their required signs.
    x0 : ndarray, optional
        Last accepted critical point (used only for retreats).
    """

    x_p: np.ndarray
    structure: ActiveSet
    x0: np.ndarray | None = None

    @property
    def anchor(self) -> int:
        return self.structure.indices[0]


@dataclass
class CorrectorResult:
    x_c: np.ndarray
    converged: bool
    iterations: int
    kkt_residual_of_solver: float
    constraint_violation: float
    criticality_residual: float = np.inf
    merit_history: list = field(default_factory=list)
    message: str = ""
    sign_infeasible_iterations: int = 0


def retreat(x0, x_p, lam: float = 0.5) -> np.ndarray:
    """``x_p + lam * (x0 - x_p)``, a start closer to the last critical point."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    x0 = np.asarray(x0, dtype=float)
    x_p = np.asarray(x_p, dtype=float)
    return x_p + lam * (x0 - x_p)


class _Line:
    """Affine solution set ``{d : J_E d = -c_E}`` written as ``d_p + span(Z)``."""

    def __init__(self, G, gP, cE, kappa, JE, signs=None):
        k = G.shape[0]
        self.k = k
        self.JE = JE
        self.lu = None
        self.svd = None
        if k == 1:
            self.Z = np.ones((1, 1))
            self.d_p = np.zeros(1)
            return
        if signs is not None:
            gP = _regularized_gradient(gP, signs)
            big = float(np.max(np.abs(gP)))
        else:
            big = max(1.0, float(np.max(np.abs(gP))))
        if np.all(np.abs(gP) > 1e-13 * big):
            fac = lu_factor(G)
            if not fac.singular:
                u = np.zeros(k)
                u[1:] = -cE / (2.0 * kappa * gP[1:])
                sol = fac.solve(np.column_stack([u, 1.0 / gP]))
                eta = sol[:, 1]
                nrm = np.linalg.norm(eta)
                if np.isfinite(nrm) and nrm > 0:
                    eta = eta / nrm
                    d_p = sol[:, 0]
                    d_p = d_p - (eta @ d_p) * eta
                    if np.all(np.isfinite(d_p)):
                        self.lu, self.gP, self.kappa = fac, gP, kappa
                        self.Z = eta[:, None]
                        self.d_p = d_p
                        return
        # rows scale with the gradient entries; equilibrate before ranking
        rn = np.linalg.norm(JE, axis=1)
        live = rn > 0
        self.row_scale = np.where(live, 1.0 / np.where(live, rn, 1.0), 0.0)
        J = JE * self.row_scale[:, None]
        U, S, Vt = np.linalg.svd(J)
        r = int(np.sum(S > 1e-10 * (S[0] if S.size else 1.0)))
        self.svd = (U, S, Vt, r)
        self.Z = Vt[r:].T
        self.d_p = self.particular(cE)

    def particular(self, cE) -> np.ndarray:
        """Minimum-norm-like solution of ``J_E d = -cE`` (orthogonal to Z)."""
        if self.k == 1:
            return np.zeros(1)
        if self.lu is not None:
            u = np.zeros(self.k)
            u[1:] = -cE / (2.0 * self.kappa * self.gP[1:])
            d = self.lu.solve(u)
            eta = self.Z[:, 0]
            return d - (eta @ d) * eta
        U, S, Vt, r = self.svd
        rhs = -cE * self.row_scale
        return Vt[:r].T @ ((U[:, :r].T @ rhs) / S[:r]) if r else np.zeros(self.k)

    def equality_multipliers(self, rhs) -> np.ndarray:
        """Least-squares solution of ``J_E^T lam = rhs``."""
        if self.k == 1:
            return np.zeros(0)
        if self.lu is not None:
            w = self.lu.solve(rhs) / (2.0 * self.kappa)  # G symmetric
            return w[1:] / self.gP[1:]
        return np.linalg.lstsq(self.JE.T, rhs, rcond=None)[0]


def _regularized_gradient(gP, signs, rel: float = 1e-8):
    """Replace negligible active gradient entries by their critical value.

    A row ``g_j grad g_j - g_a grad g_a`` loses its ``g_j`` part when
    ``g_j`` vanishes, and several such rows are parallel.  Using
    ``-s_j |g|`` instead keeps the equality Jacobian of full rank.  The
    step is then an inexact Newton step, which the merit search accepts
    or shortens like any other.
    """
    ref = float(np.max(np.abs(gP)))
    if ref == 0.0:
        return -np.asarray(signs, dtype=float)
    bad = np.abs(gP) <= rel * ref
    if not np.any(bad):
        return gP
    return np.where(bad, -signs * ref, gP)


def _interval(alpha, beta, scale):
    """Feasible ``t`` for ``alpha + beta t <= 0``; returns (lo, hi, lo_idx, hi_idx, flat_bad)."""
    flat = np.abs(beta) <= 1e-14 * scale
    flat_bad = bool(np.any(alpha[flat] > 0)) if np.any(flat) else False
    lo, hi, lo_i, hi_i = -np.inf, np.inf, -1, -1
    pos = (~flat) & (beta > 0)
    neg = (~flat) & (beta < 0)
    if np.any(pos):
        ub = np.where(pos, -alpha / np.where(pos, beta, 1.0), np.inf)
        hi_i = int(np.argmin(ub))
        hi = float(ub[hi_i])
    if np.any(neg):
        lb = np.where(neg, -alpha / np.where(neg, beta, 1.0), -np.inf)
        lo_i = int(np.argmax(lb))
        lo = float(lb[lo_i])
    return lo, hi, lo_i, hi_i, flat_bad


def _least_violation(alpha, beta, scale):
    """Minimizer of ``sum max(0, alpha + beta t)`` over ``t``."""
    nz = np.abs(beta) > 1e-14 * scale
    if not np.any(nz):
        return 0.0
    a, b = alpha[nz], beta[nz]
    bp = -a / b
    order = np.argsort(bp)
    slope = np.sum(b[b < 0]) + np.cumsum(np.abs(b[order]))
    k = int(np.searchsorted(slope, 0.0))
    k = min(k, order.size - 1)
    return float(bp[order[k]])


class _Problem:
    """Constraint evaluation for a fixed structure."""

    def __init__(self, model, structure: ActiveSet, y_p: np.ndarray, hessian: HessianFn | None):
        self.model = model
        self.P = structure.index_array
        self.s = structure.sign_vector
        self.I = np.asarray(structure.inactive, dtype=int)
        self.n = structure.n
        self.y_p = y_p
        self.hessian = hessian
        g = model.gradient(self.embed(y_p))
        ga = abs(g[self.P[0]])
        self.kappa = 1.0 / max(1.0, ga * ga)
        self.kappa_g = 1.0 / max(1.0, ga)

    def embed(self, y):
        x = np.zeros(self.n)
        x[self.P] = y
        return x

    def values(self, y, g=None):
        x = self.embed(y)
        if g is None:
            g = self.model.gradient(x)
        gP = g[self.P]
        ga = gP[0]
        cE = self.kappa * (gP[1:] ** 2 - ga * ga)
        cI = np.concatenate([
            self.kappa * (g[self.I] ** 2 - ga * ga),
            self.kappa_g * self.s * gP,
            -self.s * y,
        ])
        return g, cE, cI

    def violation(self, cE, cI) -> float:
        return float(np.sum(np.abs(cE)) + np.sum(np.maximum(cI, 0.0)))

    def jacobians(self, x, g):
        H = self.model.hessian(x) if self.hessian is None else self.hessian(x, g)
        HP = H[:, self.P]
        G = HP[self.P]
        gP = g[self.P]
        ga = gP[0]
        rowa = HP[self.P[0]]
        JE = 2.0 * self.kappa * (gP[1:, None] * G[1:] - ga * rowa[None, :])
        JI = np.vstack([
            2.0 * self.kappa * (g[self.I, None] * HP[self.I] - ga * rowa[None, :]),
            self.kappa_g * self.s[:, None] * G,
            -np.diag(self.s),
        ])
        return G, gP, JE, JI


def correct(model, spec: CorrectorSpec, opts: CorrectorOptions | None = None,
            hessian: HessianFn | None = None, raise_on_failure: bool = True) -> CorrectorResult:
    """Run the SQP corrector from ``spec.x_p`` on ``spec.structure``.

    Parameters
    ----------
    hessian : callable, optional
        ``hessian(x, g)`` returning the full Hessian approximation; defaults
        to ``model.hessian``.  Stateful approximations (SR1) receive every
        accepted iterate in order.
    raise_on_failure : bool
        Raise :class:`NotConverged` (or :class:`InfeasibleSigns`) instead of
        returning an unconverged result.
    """
    opts = opts or CorrectorOptions()
    S = spec.structure
    if S.n_active == 0:
        raise ValueError("corrector needs a nonempty structure")
    x_start = np.asarray(spec.x_p, dtype=float)
    y_p = x_start[S.index_array].copy()
    s = S.sign_vector
    y = s * np.maximum(s * y_p, 0.0)
    prob = _Problem(model, S, y_p, hessian)
    k = y.size
    B = 2.0 * np.eye(k)
    rho = 1.0
    history = []
    sign_bad = 0
    prev = None  # (y, grad of Lagrangian part with old multipliers)
    g, cE, cI = prob.values(y)
    viol = prob.violation(cE, cI)
    it = 0
    step_norm = np.inf
    crit = np.inf
    converged = False
    message = "maximum iterations reached"
    for it in range(opts.max_iter + 1):
        x = prob.embed(y)
        G, gP, JE, JI = prob.jacobians(x, g)
        q = 2.0 * (y - y_p)
        if prev is not None and opts.quasi_newton:
            y_old, grad_old, lamE, muI = prev
            grad_new = q + JE.T @ lamE + JI.T @ muI
            B = _damped_bfgs(B, y - y_old, grad_new - grad_old)
        crit = criticality_residual(_clean(x, opts.eps_zero), g, opts.eps_zero, opts.eps_pa)
        if viol <= opts.feas_tol and crit <= opts.kkt_tol and float(np.max(np.abs(g))) <= opts.grad_zero_tol:
            # a stationary point of f is critical for every structure; the
            # distance objective no longer pins the iterate down
            d = np.zeros(k)
            converged = True
            message = "converged at a stationary point"
            break
        line = _Line(G, gP, cE, prob.kappa, JE, prob.s)
        d, lamE, muI, lin_viol, sign_ok = _subproblem(line, B, q, cI, JI, k)
        if not sign_ok:
            sign_bad += 1
        step_norm = float(np.max(np.abs(d))) if d.size else 0.0
        if viol <= opts.feas_tol and crit <= opts.kkt_tol and step_norm <= opts.step_tol * (1.0 + np.max(np.abs(y))):
            converged = True
            message = "converged"
            break
        if viol <= opts.feas_tol and crit <= opts.kkt_tol and it >= opts.max_iter:
            break
        if it == opts.max_iter:
            break
        mult = np.concatenate([np.abs(lamE), np.abs(muI)])
        if mult.size:
            rho = max(rho, 1.5 * float(np.max(mult)) + 1e-8)
        phi0 = float(q @ q) / 4.0 + rho * viol  # ||y - y_p||^2 == |q|^2/4
        D = float(q @ d) + rho * (lin_viol - viol)
        if D >= 0.0:
            rho *= 10.0
            phi0 = float(q @ q) / 4.0 + rho * viol
            D = float(q @ d) + rho * (lin_viol - viol)
        accepted = False
        alpha = 1.0
        trial = None
        while alpha >= 1e-12:
            yt = y + alpha * d
            gt, cEt, cIt = prob.values(yt)
            phit = float((yt - y_p) @ (yt - y_p)) + rho * prob.violation(cEt, cIt)
            if phit <= phi0 + opts.armijo * alpha * min(D, 0.0) or (D >= 0 and phit < phi0):
                accepted = True
                trial = (yt, gt, cEt, cIt, phit)
                break
            if alpha == 1.0:
                # second-order correction against the Maratos effect
                dc = line.particular(cEt)
                ys = y + d + dc
                gs, cEs, cIs = prob.values(ys)
                phis = float((ys - y_p) @ (ys - y_p)) + rho * prob.violation(cEs, cIs)
                if phis <= phi0 + opts.armijo * min(D, 0.0):
                    accepted = True
                    trial = (ys, gs, cEs, cIs, phis)
                    break
            alpha *= 0.5
        if not accepted:
            message = "line search failed"
            break
        history.append((phi0, trial[4]))
        if len(history) > opts.stall_window:
            past = history[-opts.stall_window - 1][0]
            if past - trial[4] <= 1e-10 * (1.0 + abs(past)):
                message = "merit stalled"
                y, g, cE, cI = trial[0], trial[1], trial[2], trial[3]
                viol = prob.violation(cE, cI)
                break
        prev = (y, q + JE.T @ lamE + JI.T @ muI, lamE, muI)
        y, g, cE, cI = trial[0], trial[1], trial[2], trial[3]
        viol = prob.violation(cE, cI)
    x_c = _clean(prob.embed(y), 0.0)
    if not converged:
        crit = criticality_residual(_clean(x_c, opts.eps_zero), model.gradient(x_c), opts.eps_zero, opts.eps_pa)
        if message != "maximum iterations reached" and viol <= opts.feas_tol and crit <= opts.kkt_tol:
            # the merit function ran into round-off at a point that already
            # meets both tolerances
            converged = True
            message = f"converged to tolerance ({message})"
    result = CorrectorResult(
        x_c=x_c, converged=converged, iterations=it,
        kkt_residual_of_solver=float(np.max(np.abs(B @ d))) if k else 0.0,
        constraint_violation=viol, criticality_residual=crit, merit_history=history,
        message=message, sign_infeasible_iterations=sign_bad,
    )
    if not converged and raise_on_failure:
        if sign_bad > 0 and sign_bad >= it + 1:
            raise InfeasibleSigns("sign constraints inconsistent at every iterate", result)
        raise NotConverged(f"corrector failed: {message}", result)
    return result


def _clean(x, eps_zero):
    x = np.array(x, dtype=float)
    x[np.abs(x) <= eps_zero] = 0.0
    return x


def _subproblem(line: _Line, B, q, cI, JI, k):
    """Solve the QP restricted to the equality line (or subspace)."""
    Z = line.Z
    d_p = line.d_p
    alpha = cI + JI @ d_p
    scale = max(1.0, float(np.max(np.abs(JI)))) if JI.size else 1.0
    n_sign = 2 * k
    if Z.shape[1] == 1:
        eta = Z[:, 0]
        beta = JI @ eta
        a2 = float(eta @ B @ eta)
        b1 = float(eta @ (B @ d_p + q))
        t_star = -b1 / a2
        lo, hi, lo_i, hi_i, flat_bad = _interval(alpha, beta, scale)
        slo, shi, _, _, sflat = _interval(alpha[-n_sign:], beta[-n_sign:], scale)
        sign_ok = (slo <= shi + 1e-14 * (1 + abs(shi))) and not sflat
        mu = np.zeros(alpha.size)
        if lo <= hi and not flat_bad:
            t = min(max(t_star, lo), hi)
            slope = a2 * t + b1
            if t == hi and hi_i >= 0 and slope < 0:
                mu[hi_i] = -slope / beta[hi_i]
            elif t == lo and lo_i >= 0 and slope > 0:
                mu[lo_i] = -slope / beta[lo_i]
        else:
            t = _least_violation(alpha, beta, scale)
        d = d_p + t * eta
    elif Z.shape[1] == 0:
        d = d_p
        mu = np.zeros(alpha.size)
        sign_ok = bool(np.all(alpha[-n_sign:] <= 1e-14))
    else:
        d, mu, sign_ok = _small_qp(Z, d_p, B, q, alpha, JI)
    resid = -(B @ d + q + JI.T @ mu)
    lamE = line.equality_multipliers(resid)
    # equalities hold exactly on the line, so only inequalities contribute
    lin_viol = float(np.sum(np.maximum(cI + JI @ d, 0.0)))
    return d, lamE, mu, lin_viol, sign_ok


def _small_qp(Z, d_p, B, q, alpha, JI):
    """Fallback for a null space of dimension > 1 (degenerate Jacobian)."""
    BZ = Z.T @ B @ Z
    bz = Z.T @ (B @ d_p + q)
    A = JI @ Z
    cons = {"type": "ineq", "fun": lambda z: -(alpha + A @ z), "jac": lambda z: -A}
    res = minimize(lambda z: 0.5 * z @ BZ @ z + bz @ z, np.zeros(Z.shape[1]),
                   jac=lambda z: BZ @ z + bz, constraints=[cons], method="SLSQP",
                   options={"maxiter": 200, "ftol": 1e-14})
    z = res.x
    mu = np.zeros(alpha.size)
    return d_p + Z @ z, mu, bool(res.success)


def _damped_bfgs(B, s, r):
    """Powell-damped BFGS update keeping ``B`` positive definite."""
    ss = float(s @ s)
    if ss == 0.0:
        return B
    Bs = B @ s
    sBs = float(s @ Bs)
    sr = float(s @ r)
    if sBs <= 0.0:
        return B
    if sr < 0.2 * sBs:
        theta = 0.8 * sBs / (sBs - sr)
        r = theta * r + (1.0 - theta) * Bs
        sr = float(s @ r)
    if sr <= 1e-16 * ss:
        return B
    Bn = B + np.outer(r, r) / sr - np.outer(Bs, Bs) / sBs
    if not np.all(np.isfinite(Bn)):
        return 2.0 * np.eye(B.shape[0])
    return Bn
