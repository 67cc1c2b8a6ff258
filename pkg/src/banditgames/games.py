"""Exact solving of known zero-sum matrix games and strategy-space utilities.

Convention used throughout the package: the row player picks ``i``, the
column player picks ``j``, and the row player pays ``A[i, j]`` to the column
player.  The column player therefore maximizes and the row player minimizes,
and the value of the game is

    V* = max_{x in simplex(k)} min_i (A x)_i
       = min_{y in simplex(m)} max_j (A^T y)_j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    """Game solve failed; carries the pivot count reached."""

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """Payoff matrix of a zero-sum game; ``entries[i, j]`` flows row -> column."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"payoff matrix must be 2-D and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("payoff matrix entries must be finite")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def k(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """Probability vector over one player's actions."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("strategy must be a non-empty 1-D vector")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise ValueError("strategy components must be finite and non-negative")
        if abs(float(p.sum()) - 1.0) > 1e-9:
            raise ValueError(f"strategy must sum to 1 within 1e-9, got sum {p.sum()!r}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n: int) -> "MixedStrategy":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, index: int) -> "MixedStrategy":
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)

    @classmethod
    def from_weights(cls, weights) -> "MixedStrategy":
        """Clip negative rounding dust and renormalize."""
        w = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        total = w.sum()
        if not np.isfinite(total) or total <= 0.0:
            raise ValueError("weights must have a positive finite sum")
        return cls(w / total)


@dataclass(frozen=True, eq=False)
class GameSolution:
    """Saddle point of a known matrix: strategies, value, achieved duality gap."""

    x_star: MixedStrategy
    y_star: MixedStrategy
    value: float
    gap: float


def solve_zero_sum(A: PayoffMatrix, tol: float = 1e-9) -> GameSolution:
    """Saddle point of ``A`` via the classical LP transformation.

    The matrix is shifted entrywise positive, and one primal-simplex tableau
    (Bland's rule, so ties break deterministically toward low indices) yields
    the row strategy from the basis and the column strategy from the duals.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a = A.entries
    shift = 1.0 - float(a.min())
    w, duals, iterations = _simplex_max_ones(a.T + shift)
    y = MixedStrategy.from_weights(w)
    x = MixedStrategy.from_weights(duals)
    value = 1.0 / float(w.sum()) - shift
    gap = float((a.T @ y.probs).max() - (a @ x.probs).min())
    if gap > tol:
        raise SolverError(f"duality gap {gap:.3e} exceeds tol {tol:.3e}", iterations)
    return GameSolution(x_star=x, y_star=y, value=value, gap=gap)


def _simplex_max_ones(d: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Dense primal simplex for: max 1'w  s.t.  d w <= 1, w >= 0  (d > 0).

    The slack basis is immediately feasible and positivity of ``d`` bounds the
    optimum, so no phase 1 is needed.  Returns (w, constraint duals, pivots).
    """
    n_rows, n_vars = d.shape
    tableau = np.zeros((n_rows + 1, n_vars + n_rows + 1))
    tableau[:-1, :n_vars] = d
    tableau[:-1, n_vars:-1] = np.eye(n_rows)
    tableau[:-1, -1] = 1.0
    tableau[-1, :n_vars] = 1.0
    basis = np.arange(n_vars, n_vars + n_rows)
    cap = 10 * (n_rows + n_vars + 2) ** 2
    pivot_tol = 1e-9
    for iteration in range(cap):
        reduced = tableau[-1, :-1]
        improving = np.flatnonzero(reduced > pivot_tol)
        if improving.size == 0:
            duals = -tableau[-1, n_vars:-1]
            w = np.zeros(n_vars)
            basic_vars = basis < n_vars
            w[basis[basic_vars]] = tableau[:-1, -1][basic_vars]
            return w, duals, iteration
        enter = int(improving[0])
        col = tableau[:-1, enter]
        candidates = np.flatnonzero(col > pivot_tol)
        if candidates.size == 0:
            raise SolverError("unbounded tableau despite positive shift", iteration)
        ratios = tableau[candidates, -1] / col[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + 1e-10 * (1.0 + abs(best))]
        leave = int(ties[np.argmin(basis[ties])])
        _pivot(tableau, leave, enter)
        basis[leave] = enter
    raise SolverError(f"simplex exceeded {cap} pivots", cap)


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def best_response_row(A: PayoffMatrix, x: MixedStrategy) -> tuple[int, float]:
    """Row minimizing the expected payment against ``x``; ties go to the lowest index."""
    if len(x) != A.k:
        raise ValueError(f"strategy length {len(x)} does not match {A.k} columns")
    payoffs = A.entries @ x.probs
    i = int(np.argmin(payoffs))
    return i, float(payoffs[i])


def expected_payoff(A: PayoffMatrix, x: MixedStrategy, y: MixedStrategy) -> float:
    """y' A x."""
    if len(x) != A.k or len(y) != A.m:
        raise ValueError(
            f"strategy lengths ({len(y)}, {len(x)}) do not match matrix shape {A.entries.shape}"
        )
    return float(y.probs @ A.entries @ x.probs)


def kl_divergence(p: MixedStrategy, q: MixedStrategy) -> float:
    """Sum of p_i log(p_i / q_i), natural log, 0 log 0 = 0.

    Returns the ``inf`` sentinel (not an error) when ``q`` misses support of ``p``.
    """
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {len(p)} vs {len(q)}")
    support = p.probs > 0.0
    if np.any(q.probs[support] <= 0.0):
        return float("inf")
    ps = p.probs[support]
    return float(np.sum(ps * (np.log(ps) - np.log(q.probs[support]))))


def brute_force_solution(A: PayoffMatrix, max_dim: int = 5, tol: float = 1e-7) -> GameSolution:
    """Support-enumeration oracle, independent of the simplex path.

    Walks equal-size support pairs in lexicographic order, solves the bordered
    indifference systems, and returns the first pair whose strategies are
    feasible and certify the value on the full matrix.  Exponential in the
    dimensions, hence the cap.
    """
    a = A.entries
    m, k = a.shape
    if m > max_dim or k > max_dim:
        raise ValueError(f"oracle capped at {max_dim}x{max_dim}, got {m}x{k}")
    for size in range(1, min(m, k) + 1):
        for rows in itertools.combinations(range(m), size):
            for cols in itertools.combinations(range(k), size):
                solution = _support_solution(a, rows, cols, tol)
                if solution is not None:
                    return solution
    raise SolverError("support enumeration found no equilibrium", 0)


def _support_solution(a, rows, cols, tol):
    size = len(rows)
    sub = a[np.ix_(rows, cols)]
    # Bordered indifference system: sub @ x = v 1, sum(x) = 1; transpose for y.
    lhs = np.zeros((size + 1, size + 1))
    lhs[:size, :size] = sub
    lhs[:size, size] = -1.0
    lhs[size, :size] = 1.0
    rhs = np.zeros(size + 1)
    rhs[size] = 1.0
    lhs_t = lhs.copy()
    lhs_t[:size, :size] = sub.T
    try:
        x_sol = np.linalg.solve(lhs, rhs)
        y_sol = np.linalg.solve(lhs_t, rhs)
    except np.linalg.LinAlgError:
        return None  # rank-deficient support system: cannot certify, skip
    x_sub, vx = x_sol[:size], float(x_sol[size])
    y_sub, vy = y_sol[:size], float(y_sol[size])
    if abs(vx - vy) > tol or np.any(x_sub < -tol) or np.any(y_sub < -tol):
        return None
    m, k = a.shape
    x = np.zeros(k)
    x[list(cols)] = np.clip(x_sub, 0.0, None)
    y = np.zeros(m)
    y[list(rows)] = np.clip(y_sub, 0.0, None)
    x /= x.sum()
    y /= y.sum()
    if (a @ x).min() < vx - tol or (a.T @ y).max() > vx + tol:
        return None
    gap = float((a.T @ y).max() - (a @ x).min())
    return GameSolution(
        x_star=MixedStrategy(x), y_star=MixedStrategy(y), value=vx, gap=gap
    )
