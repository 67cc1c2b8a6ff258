"""Round-by-round decision makers behind one interface.

Learners are written once as column-seat maximizers; ``RoleAdapter`` seats any
of them on the row side by feeding them the transformed game -A^T (swapped
actions, negated rewards).  Scripted opponents (Nash, best-response, fixed,
nature) emit row strategies directly.

The shared contract: ``act(t, announced=None) -> MixedStrategy`` over the
agent's own actions, ``observe(i, j, r)`` with the realized row action, column
action, and noisy reward, and ``reset(rng)``.  Only the best-response opponent
reads ``announced`` (the other side's mixed strategy this round).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from banditgames.beliefs import BeliefState, UcbParams, sample_matrix, ucb_matrix, update
from banditgames.games import MixedStrategy, PayoffMatrix, best_response_row, solve_zero_sum
from banditgames.klearning import solve as klearn_solve

# Entries listed in a `pin` are treated as known: pseudo-counts chosen so the
# posterior sd is ~1e-3 (negligible for play) without collapsing the CGF
# temperature to its clamp, which would make policy extraction ill-conditioned.
PIN_COUNT = 10**6


def _initial_belief(m, k, prior_mean, prior_var, noise_var, pin=None):
    counts = np.zeros((m, k), dtype=np.int64)
    emp = np.zeros((m, k))
    for i, j, value in pin or ():
        counts[i, j] = PIN_COUNT
        emp[i, j] = value
    return BeliefState(
        counts=counts,
        emp_mean=emp,
        prior_mean=prior_mean,
        prior_var=prior_var,
        noise_var=noise_var,
    )


@dataclass(frozen=True)
class AgentSpec:
    """Algorithm name plus hyperparameters, as found in run configs."""

    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Exp3State:
    """Cumulative importance-weighted reward estimates and the round counter."""

    cum_est: np.ndarray
    round: int

    def __post_init__(self):
        est = np.asarray(self.cum_est, dtype=float)
        if est.ndim != 1 or not np.all(np.isfinite(est)):
            raise ValueError("cum_est must be a finite vector")
        if self.round < 1:
            raise ValueError("round starts at 1")
        est = est.copy()
        est.setflags(write=False)
        object.__setattr__(self, "cum_est", est)


def exp3_weights(s: Exp3State) -> MixedStrategy:
    """Uniform-exploration mixture over the softmax of scaled estimates."""
    k = s.cum_est.size
    if k == 1:
        return MixedStrategy(np.ones(1))
    t = s.round
    gamma = min(math.sqrt(k * math.log(k) / t), 1.0)
    rho = math.sqrt(2.0 * math.log(k) / (t * k))
    z = rho * s.cum_est
    e = np.exp(z - z.max())
    return MixedStrategy(gamma / k + (1.0 - gamma) * e / e.sum())


def exp3_update(s: Exp3State, action: int, r: float, x_played: MixedStrategy) -> Exp3State:
    """Importance-weighted estimate: only the played arm's estimate moves."""
    if not (0 <= action < s.cum_est.size):
        raise ValueError(f"action {action} out of range")
    p = float(x_played.probs[action])
    if p <= 0.0:
        raise ValueError(f"played action {action} had zero recorded probability")
    est = s.cum_est.copy()
    est[action] += r / p
    return Exp3State(cum_est=est, round=s.round + 1)


class UcbAgent:
    """Solves the optimistic (confidence-bonus) game each round."""

    def __init__(self, m, k, horizon, prior_mean=0.0, prior_var=1.0, noise_var=1.0, pin=None):
        self._fresh = lambda: _initial_belief(m, k, prior_mean, prior_var, noise_var, pin)
        self.belief = self._fresh()
        self.params = UcbParams.from_horizon(horizon, m, k)

    def act(self, t, announced=None):
        return solve_zero_sum(ucb_matrix(self.belief, self.params)).x_star

    def observe(self, i, j, r):
        self.belief = update(self.belief, i, j, r)

    def reset(self, rng=None):
        self.belief = self._fresh()


class TsAgent:
    """Solves one posterior sample each round; consumes one draw per act."""

    def __init__(self, m, k, rng, prior_mean=0.0, prior_var=1.0, noise_var=1.0, pin=None):
        self._fresh = lambda: _initial_belief(m, k, prior_mean, prior_var, noise_var, pin)
        self.belief = self._fresh()
        self.rng = rng

    def act(self, t, announced=None):
        return solve_zero_sum(sample_matrix(self.belief, self.rng)).x_star

    def observe(self, i, j, r):
        self.belief = update(self.belief, i, j, r)

    def reset(self, rng=None):
        self.belief = self._fresh()
        if rng is not None:
            self.rng = rng


class KLearnAgent:
    """Plays the softmax policy of the risk-seeking convex program.

    Keeps the previous (y*, tau*) as a warm start; one observation barely
    moves the optimum, so warm solves converge in a couple of sweeps.
    """

    def __init__(self, m, k, tol=1e-8, prior_mean=0.0, prior_var=1.0, noise_var=1.0, pin=None):
        self._fresh = lambda: _initial_belief(m, k, prior_mean, prior_var, noise_var, pin)
        self.belief = self._fresh()
        self.tol = tol
        self._warm_y = None
        self._warm_tau = None

    def act(self, t, announced=None):
        sol = klearn_solve(self.belief, self.tol, y0=self._warm_y, tau0=self._warm_tau)
        self._warm_y = sol.y_star.probs
        self._warm_tau = sol.tau_star
        return sol.x_star

    def observe(self, i, j, r):
        self.belief = update(self.belief, i, j, r)

    def reset(self, rng=None):
        self.belief = self._fresh()
        self._warm_y = None
        self._warm_tau = None


class Exp3Agent:
    """Adversarial-bandit learner over own arms; ignores opponent actions."""

    def __init__(self, k):
        self.state = Exp3State(cum_est=np.zeros(k), round=1)
        self._last_x = None

    def act(self, t, announced=None):
        x = exp3_weights(self.state)
        self._last_x = x
        return x

    def observe(self, i, j, r):
        if self._last_x is None:
            raise ValueError("observe before any act")
        self.state = exp3_update(self.state, j, r, self._last_x)

    def reset(self, rng=None):
        self.state = Exp3State(cum_est=np.zeros(self.state.cum_est.size), round=1)
        self._last_x = None


class NaiveUcbAgent:
    """Stationary-bandit baseline: index over own arms, opponent ignored."""

    def __init__(self, k):
        self.counts = np.zeros(k, dtype=np.int64)
        self.means = np.zeros(k)

    def act(self, t, announced=None):
        bonus = np.sqrt(2.0 * math.log(max(t, 1)) / np.maximum(1, self.counts))
        return MixedStrategy.point_mass(self.counts.size, int(np.argmax(self.means + bonus)))

    def observe(self, i, j, r):
        self.counts[j] += 1
        self.means[j] += (r - self.means[j]) / self.counts[j]

    def reset(self, rng=None):
        self.counts[:] = 0
        self.means[:] = 0.0


class NaiveTsAgent:
    """Stationary-bandit baseline: per-arm Gaussian posterior samples."""

    def __init__(self, k, rng, prior_mean=0.0, prior_var=1.0, noise_var=1.0):
        self.k = k
        self.rng = rng
        self.prior_mean = prior_mean
        self.prior_var = prior_var
        self.noise_var = noise_var
        self.counts = np.zeros(k, dtype=np.int64)
        self.means = np.zeros(k)

    def act(self, t, announced=None):
        post_var = 1.0 / (1.0 / self.prior_var + self.counts / self.noise_var)
        post_mean = post_var * (
            self.prior_mean / self.prior_var + self.counts * self.means / self.noise_var
        )
        draws = post_mean + np.sqrt(post_var) * self.rng.standard_normal(self.k)
        return MixedStrategy.point_mass(self.k, int(np.argmax(draws)))

    def observe(self, i, j, r):
        self.counts[j] += 1
        self.means[j] += (r - self.means[j]) / self.counts[j]

    def reset(self, rng=None):
        self.counts[:] = 0
        self.means[:] = 0.0
        if rng is not None:
            self.rng = rng


class RoleAdapter:
    """Seats column-maximizer logic on the row side of the game.

    The wrapped agent believes it is maximizing on -A^T: its arms are the
    rows of A, its observed rewards are negated, and the opponent's action
    indices are swapped accordingly.
    """

    def __init__(self, inner):
        self.inner = inner

    def act(self, t, announced=None):
        return self.inner.act(t)

    def observe(self, i, j, r):
        self.inner.observe(j, i, -r)

    def reset(self, rng=None):
        self.inner.reset(rng)


class BestResponseOpponent:
    """Knows the true matrix; plays the payment-minimizing row against the
    announced column strategy."""

    def __init__(self, A_true: PayoffMatrix):
        self.A = A_true

    def act(self, t, announced=None):
        if announced is None:
            raise ValueError("best-response opponent needs the announced strategy")
        i, _ = best_response_row(self.A, announced)
        return MixedStrategy.point_mass(self.A.m, i)

    def observe(self, i, j, r):
        pass

    def reset(self, rng=None):
        pass


class NashOpponent:
    """Always plays the row side of a precomputed saddle point."""

    def __init__(self, A_true: PayoffMatrix):
        self.y_star = solve_zero_sum(A_true).y_star

    def act(self, t, announced=None):
        return self.y_star

    def observe(self, i, j, r):
        pass

    def reset(self, rng=None):
        pass


class FixedOpponent:
    def __init__(self, strategy):
        self.strategy = strategy if isinstance(strategy, MixedStrategy) else MixedStrategy(
            np.asarray(strategy, dtype=float)
        )

    def act(self, t, announced=None):
        return self.strategy

    def observe(self, i, j, r):
        pass

    def reset(self, rng=None):
        pass


class NatureOpponent:
    """Redraws a uniform simplex point (Dirichlet with unit concentration)
    every `period` rounds, starting at round 1."""

    def __init__(self, m, rng, period=50):
        if period < 1:
            raise ValueError("period must be at least 1")
        self.m = m
        self.rng = rng
        self.period = period
        self._current = None
        self._next_redraw = 1

    def act(self, t, announced=None):
        if t >= self._next_redraw:
            self._current = MixedStrategy(self.rng.dirichlet(np.ones(self.m)))
            self._next_redraw = t + self.period
        return self._current

    def observe(self, i, j, r):
        pass

    def reset(self, rng=None):
        self._current = None
        self._next_redraw = 1
        if rng is not None:
            self.rng = rng


LEARNER_NAMES = ("ucb", "ts", "klearn", "exp3", "naive-ucb", "naive-ts")
OPPONENT_NAMES = ("nash", "br", "fixed", "nature")


def make_learner(spec: AgentSpec, m: int, k: int, horizon: int, rng, defaults=None):
    """Column-seat learner from a config spec.

    ``defaults`` carries experiment-level prior_mean / prior_var / noise_var;
    per-agent params override them.
    """
    p = dict(defaults or {})
    p.update(spec.params)
    prior = {
        "prior_mean": p.get("prior_mean", 0.0),
        "prior_var": p.get("prior_var", 1.0),
        "noise_var": p.get("noise_var", 1.0),
    }
    pin = p.get("pin")
    name = spec.name
    if name == "ucb":
        return UcbAgent(m, k, horizon=p.get("horizon", horizon), pin=pin, **prior)
    if name == "ts":
        return TsAgent(m, k, rng=rng, pin=pin, **prior)
    if name == "klearn":
        return KLearnAgent(m, k, tol=p.get("tol", 1e-8), pin=pin, **prior)
    if name == "exp3":
        return Exp3Agent(k)
    if name == "naive-ucb":
        return NaiveUcbAgent(k)
    if name == "naive-ts":
        return NaiveTsAgent(k, rng=rng, **prior)
    if name == "fixed":
        if "strategy" not in p:
            raise ValueError("fixed column player needs a 'strategy' parameter")
        return FixedOpponent(p["strategy"])
    raise ValueError(
        f"unknown learner {name!r}; valid: {', '.join(LEARNER_NAMES + ('fixed',))}"
    )


def make_row_player(spec: AgentSpec, A_true: PayoffMatrix, horizon: int, rng, defaults=None):
    """Row-seat player: a scripted opponent, or any learner behind the adapter."""
    name = spec.name
    if name == "nash":
        return NashOpponent(A_true)
    if name == "br":
        return BestResponseOpponent(A_true)
    if name == "fixed":
        if "strategy" not in spec.params:
            raise ValueError("fixed opponent needs a 'strategy' parameter")
        return FixedOpponent(spec.params["strategy"])
    if name == "nature":
        return NatureOpponent(A_true.m, rng=rng, period=spec.params.get("period", 50))
    if name in LEARNER_NAMES:
        # the wrapped learner plays -A^T: its own arms are the rows of A
        return RoleAdapter(make_learner(spec, m=A_true.k, k=A_true.m, horizon=horizon, rng=rng, defaults=defaults))
    raise ValueError(
        f"unknown row player {name!r}; valid: {', '.join(OPPONENT_NAMES + LEARNER_NAMES)}"
    )
