"""K-learning inner problem: optimistic smoothed game value from a Gaussian belief.

Minimizes, over row mixtures y on the simplex and a temperature tau in
[TAU_MIN, TAU_MAX], the objective

    f(y, tau) = tau * log sum_j exp(K_j(y / tau)),

where K_j is the posterior cumulant generating function of column j.  Each
perspective term tau * K_j(y / tau) is jointly convex, log-sum-exp preserves
that, so f is jointly convex on the feasible box.  The induced column policy
is the softmax of the CGF values at the minimizer.

Solved by alternating minimization: one exponentiated-gradient step on y per
sweep (backtracking step size), then an exact one-dimensional minimization in
tau by a vectorized bracketing grid plus golden-section refinement on log tau
(f is convex in tau at fixed y, hence unimodal in log tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from banditgames.beliefs import BeliefState
from banditgames.games import MixedStrategy

TAU_MIN = 1e-6
TAU_MAX = 1e4
MAX_SWEEPS = 5000

_LOG_TAU_LO = math.log(TAU_MIN)
_LOG_TAU_HI = math.log(TAU_MAX)
_TAU_GRID = np.exp(np.linspace(_LOG_TAU_LO, _LOG_TAU_HI, 64))
_LOG_TAU_GRID = np.log(_TAU_GRID)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class KLearnConvergenceError(RuntimeError):
    """Sweep cap hit before the objective stabilized; carries the best iterate."""

    def __init__(self, message: str, best: "KLearnSolution"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True, eq=False)
class KLearnSolution:
    y_star: MixedStrategy
    tau_star: float
    x_star: MixedStrategy
    objective: float
    iterations: int


def _check_pair(b: BeliefState, y, tau: float) -> np.ndarray:
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be positive and finite, got {tau!r}")
    yv = y.probs if isinstance(y, MixedStrategy) else np.asarray(y, dtype=float)
    if yv.shape != (b.m,):
        raise ValueError(f"y must have length {b.m}")
    return yv


def _cgf_values(mu: np.ndarray, var: np.ndarray, y: np.ndarray, tau: float) -> np.ndarray:
    """K_j(y/tau) for every column j at once."""
    return (y @ mu) / tau + ((y * y) @ var) / (2.0 * tau * tau)


def _f_of(lin: np.ndarray, quad: np.ndarray, tau: float) -> float:
    c = lin / tau + quad / (2.0 * tau * tau)
    cm = c.max()
    return tau * (cm + math.log(np.exp(c - cm).sum()))


def objective(b: BeliefState, y, tau: float) -> float:
    """tau * logsumexp_j K_j(y / tau), overflow-safe."""
    yv = _check_pair(b, y, tau)
    return _f_of(yv @ b.post_mean, (yv * yv) @ b.post_var, tau)


def objective_grad(b: BeliefState, y, tau: float) -> tuple[np.ndarray, float]:
    """Analytic (d f / d y, d f / d tau) at an interior point."""
    yv = _check_pair(b, y, tau)
    mu, var = b.post_mean, b.post_var
    lin = yv @ mu
    quad = (yv * yv) @ var
    c = lin / tau + quad / (2.0 * tau * tau)
    cm = c.max()
    e = np.exp(c - cm)
    se = e.sum()
    w = e / se
    lse = cm + math.log(se)
    grad_y = mu @ w + (var @ w) * yv / tau
    grad_tau = lse - float(w @ lin) / tau - float(w @ quad) / (tau * tau)
    return grad_y, grad_tau


def policy(b: BeliefState, y, tau: float) -> MixedStrategy:
    """Softmax of the column CGF values: the exploration policy at (y, tau)."""
    yv = _check_pair(b, y, tau)
    c = _cgf_values(b.post_mean, b.post_var, yv, tau)
    z = np.exp(c - c.max())
    return MixedStrategy(z / z.sum())


def lagrangian(b: BeliefState, x: MixedStrategy, y, tau: float) -> float:
    """sum_j x_j tau K_j(y/tau) + tau H(x), H the Shannon entropy (nats)."""
    yv = _check_pair(b, y, tau)
    xv = x.probs if isinstance(x, MixedStrategy) else np.asarray(x, dtype=float)
    if xv.shape != (b.k,):
        raise ValueError(f"x must have length {b.k}")
    c = _cgf_values(b.post_mean, b.post_var, yv, tau)
    pos = xv > 0.0
    entropy = -float(xv[pos] @ np.log(xv[pos]))
    return tau * float(xv @ c) + tau * entropy


def _tau_minimize(
    lin: np.ndarray,
    quad: np.ndarray,
    refine: int,
    incumbent: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """argmin over tau of f at fixed y: bracketing grid, then golden section.

    ``incumbent`` (tau, f) keeps the step monotone when the current off-grid
    tau is already better than anything the search visits.
    """
    c = lin[None, :] / _TAU_GRID[:, None] + quad[None, :] / (
        2.0 * _TAU_GRID[:, None] * _TAU_GRID[:, None]
    )
    cm = c.max(axis=1)
    f_grid = _TAU_GRID * (cm + np.log(np.exp(c - cm[:, None]).sum(axis=1)))
    i = int(np.argmin(f_grid))
    best_tau, best_f = float(_TAU_GRID[i]), float(f_grid[i])
    if incumbent is not None and incumbent[1] < best_f:
        best_tau, best_f = incumbent
    a = _LOG_TAU_GRID[max(i - 1, 0)]
    d = _LOG_TAU_GRID[min(i + 1, _TAU_GRID.size - 1)]
    p = d - _INVPHI * (d - a)
    q = a + _INVPHI * (d - a)
    fp = _f_of(lin, quad, math.exp(p))
    fq = _f_of(lin, quad, math.exp(q))
    for _ in range(refine):
        if fp <= fq:
            d, q, fq = q, p, fp
            p = d - _INVPHI * (d - a)
            fp = _f_of(lin, quad, math.exp(p))
        else:
            a, p, fp = p, q, fq
            q = a + _INVPHI * (d - a)
            fq = _f_of(lin, quad, math.exp(q))
    t = p if fp <= fq else q
    ft = fp if fp <= fq else fq
    if ft < best_f:
        best_tau, best_f = math.exp(t), ft
    return best_tau, best_f


def solve(
    b: BeliefState,
    tol: float = 1e-9,
    y0=None,
    tau0: float | None = None,
) -> KLearnSolution:
    """Minimize f over the simplex-box domain; supports warm starts.

    Converged when a full sweep (one y step, one exact tau step) decreases the
    objective by less than tol * max(1, |objective|).  Deterministic: a fixed
    sweep structure and no randomness.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    mu, var = b.post_mean, b.post_var
    m = b.m
    if y0 is None:
        y = np.full(m, 1.0 / m)
    else:
        y = _check_pair(b, y0, 1.0).copy()
        y = np.clip(y, 0.0, None)
        y /= y.sum()
    tau = 1.0 if tau0 is None else min(max(float(tau0), TAU_MIN), TAU_MAX)
    refine = max(12, int(math.ceil(math.log(max(tol, 1e-12)) / math.log(_INVPHI) / 2.0)))

    lin = y @ mu
    quad = (y * y) @ var
    f = _f_of(lin, quad, tau)
    eta = None
    for sweep in range(1, MAX_SWEEPS + 1):
        f_prev = f
        tau, f = _tau_minimize(lin, quad, refine, incumbent=(tau, f))
        y, lin, quad, f, eta = _y_descend(mu, var, y, lin, quad, tau, f, tol, eta)
        if f_prev - f < tol * max(1.0, abs(f)):
            return _finish(b, y, tau, sweep)
    raise KLearnConvergenceError(
        f"no convergence in {MAX_SWEEPS} sweeps", _finish(b, y, tau, MAX_SWEEPS)
    )


def _y_descend(mu, var, y, lin, quad, tau, f, tol, eta=None):
    """Exponentiated-gradient steps on y at fixed tau until progress stalls.

    Base step size 1/(1 + curvature of the quadratic term), halved on
    non-decrease and doubled across accepted steps so that runs toward a
    simplex face accelerate instead of crawling.  The step size carries over
    between calls so later sweeps do not rediscover the usable scale.
    """
    for _ in range(60):
        c = lin / tau + quad / (2.0 * tau * tau)
        e = np.exp(c - c.max())
        w = e / e.sum()
        sw = var @ w
        grad_y = mu @ w + sw * y / tau
        if eta is None:
            eta = 1.0 / (1.0 + float(sw.max()) / tau)
        accepted = False
        for _ in range(40):
            z = -eta * grad_y
            y_new = y * np.exp(z - z.max())
            y_new = np.maximum(y_new, 1e-17 * y_new.max())
            total = y_new.sum()
            if total > 0.0 and math.isfinite(total):
                y_new /= total
                lin_new = y_new @ mu
                quad_new = (y_new * y_new) @ var
                f_new = _f_of(lin_new, quad_new, tau)
                if math.isfinite(f_new) and f_new < f:
                    gain = f - f_new
                    y, lin, quad, f = y_new, lin_new, quad_new, f_new
                    accepted = True
                    break
            eta *= 0.5
        if not accepted:
            break
        eta = min(eta * 2.0, 1e8)
        if gain < 0.25 * tol * max(1.0, abs(f)):
            break
    return y, lin, quad, f, eta


def _finish(b: BeliefState, y: np.ndarray, tau: float, sweeps: int) -> KLearnSolution:
    c = _cgf_values(b.post_mean, b.post_var, y, tau)
    cm = c.max()
    x = np.exp(c - cm)
    x /= x.sum()
    obj = tau * (cm + math.log(np.exp(c - cm).sum()))
    return KLearnSolution(
        y_star=MixedStrategy.from_weights(y),
        tau_star=tau,
        x_star=MixedStrategy(x),
        objective=obj,
        iterations=sweeps,
    )
