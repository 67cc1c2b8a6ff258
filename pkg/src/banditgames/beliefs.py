"""Knowledge state about an unknown payoff matrix.

One ``BeliefState`` serves every learner: the frequentist path reads counts
and empirical means, the Bayesian path reads the conjugate Gaussian posterior
(independent per entry, known noise variance), and the risk-seeking path reads
the posterior through its cumulant generating function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from banditgames.games import PayoffMatrix

# Posterior variances never reach zero: floored here to keep CGFs and
# samplers finite after arbitrarily many observations.
VAR_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Counts, empirical means, and Gaussian posterior for each matrix entry.

    Value semantics: ``update`` returns a fresh state and never mutates.
    ``post_mean`` and ``post_var`` are derived from the other fields at
    construction, so the conjugate formulas hold by construction.
    """

    counts: np.ndarray
    emp_mean: np.ndarray
    prior_mean: float
    prior_var: float
    noise_var: float
    post_mean: np.ndarray = field(init=False, repr=False, default=None)
    post_var: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        counts = np.asarray(self.counts).copy()
        emp = np.asarray(self.emp_mean, dtype=float).copy()
        if counts.ndim != 2 or counts.shape != emp.shape:
            raise ValueError("counts and emp_mean must be matrices of equal shape")
        if not np.issubdtype(counts.dtype, np.integer) or np.any(counts < 0):
            raise ValueError("counts must be non-negative integers")
        if not np.all(np.isfinite(emp)):
            raise ValueError("empirical means must be finite")
        if np.any(emp[counts == 0] != 0.0):
            raise ValueError("emp_mean must be 0 exactly where counts is 0")
        if not (self.prior_var > 0.0 and self.noise_var > 0.0 and math.isfinite(self.prior_mean)):
            raise ValueError("prior_var and noise_var must be positive, prior_mean finite")
        post_var = np.maximum(
            1.0 / (1.0 / self.prior_var + counts / self.noise_var), VAR_FLOOR
        )
        post_mean = post_var * (
            self.prior_mean / self.prior_var + counts * emp / self.noise_var
        )
        for name, value in (
            ("counts", counts),
            ("emp_mean", emp),
            ("post_mean", post_mean),
            ("post_var", post_var),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    @property
    def k(self) -> int:
        return self.counts.shape[1]

    @classmethod
    def fresh(
        cls,
        m: int,
        k: int,
        prior_mean: float = 0.0,
        prior_var: float = 1.0,
        noise_var: float = 1.0,
    ) -> "BeliefState":
        if m < 1 or k < 1:
            raise ValueError("matrix dimensions must be at least 1")
        return cls(
            counts=np.zeros((m, k), dtype=np.int64),
            emp_mean=np.zeros((m, k)),
            prior_mean=prior_mean,
            prior_var=prior_var,
            noise_var=noise_var,
        )

    def to_json_dict(self) -> dict:
        """Row-major plain-list form for the JSON checkpoint schema."""
        return {
            "counts": self.counts.tolist(),
            "emp_mean": self.emp_mean.tolist(),
            "prior_mean": self.prior_mean,
            "prior_var": self.prior_var,
            "noise_var": self.noise_var,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "BeliefState":
        return cls(
            counts=np.asarray(payload["counts"], dtype=np.int64),
            emp_mean=np.asarray(payload["emp_mean"], dtype=float),
            prior_mean=float(payload["prior_mean"]),
            prior_var=float(payload["prior_var"]),
            noise_var=float(payload["noise_var"]),
        )


@dataclass(frozen=True)
class UcbParams:
    """Confidence schedule for the optimistic matrix."""

    horizon: int
    delta: float

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if 2.0 * math.log(1.0 / self.delta) < 1.0:
            raise ValueError("delta too large: need sqrt(2 log(1/delta)) >= 1")

    @classmethod
    def from_horizon(cls, horizon: int, m: int, k: int) -> "UcbParams":
        """The standard schedule delta = 1/(2 T^2 m k)."""
        return cls(horizon=horizon, delta=1.0 / (2.0 * horizon**2 * m * k))


def update(b: BeliefState, i: int, j: int, r: float) -> BeliefState:
    """Fold one observed payoff at entry (i, j) into a new state."""
    if not (0 <= i < b.m and 0 <= j < b.k):
        raise ValueError(f"entry ({i}, {j}) out of range for {b.m}x{b.k} belief")
    if not math.isfinite(r):
        raise ValueError(f"reward must be finite, got {r!r}")
    counts = b.counts.copy()
    emp = b.emp_mean.copy()
    counts[i, j] += 1
    emp[i, j] += (r - emp[i, j]) / counts[i, j]
    return BeliefState(
        counts=counts,
        emp_mean=emp,
        prior_mean=b.prior_mean,
        prior_var=b.prior_var,
        noise_var=b.noise_var,
    )


def ucb_matrix(b: BeliefState, p: UcbParams) -> PayoffMatrix:
    """Empirical means plus the count-discounted confidence bonus."""
    bonus = np.sqrt(2.0 * math.log(1.0 / p.delta) / np.maximum(1, b.counts))
    return PayoffMatrix(b.emp_mean + bonus)


def sample_matrix(b: BeliefState, rng: np.random.Generator) -> PayoffMatrix:
    """One entrywise-independent posterior draw."""
    draw = b.post_mean + np.sqrt(b.post_var) * rng.standard_normal(b.counts.shape)
    return PayoffMatrix(draw)


def cgf(b: BeliefState, j: int, v: np.ndarray) -> float:
    """Gaussian log-moment value for column j at vector v over rows.

    K_j(v) = sum_i mu_ij v_i + (1/2) sum_i var_ij v_i^2.
    """
    if not (0 <= j < b.k):
        raise ValueError(f"column {j} out of range for {b.k} columns")
    v = np.asarray(v, dtype=float)
    if v.shape != (b.m,) or not np.all(np.isfinite(v)):
        raise ValueError(f"v must be a finite vector of length {b.m}")
    return float(b.post_mean[:, j] @ v + 0.5 * (b.post_var[:, j] @ (v * v)))
