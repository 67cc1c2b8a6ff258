"""Repeated-play driver: seeded episodes, regret accounting, aggregation,
experiment presets, and CSV/JSON artifacts.

Each round t = 1..T the column player announces a mixed strategy x_t, the row
player emits y_t (best-response opponents get to see x_t first), actions are
sampled, and both players observe the triple (i_t, j_t, r_t) where
r_t = A[i_t, j_t] + Gaussian noise.  Regret is accounted on expected payoffs
y_tᵀ A x_t against the true game value, never on realized rewards.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from banditgames import __version__
from banditgames.agents import AgentSpec, LEARNER_NAMES, make_learner, make_row_player
from banditgames.games import (
    PayoffMatrix,
    kl_divergence,
    solve_zero_sum,
)

# Row pays column: entry (i, j) is what the column player receives when the
# row player picks i.  Rock=0, paper=1, scissors=2.
RPS_MATRIX = np.array(
    [
        [0.0, 1.0, -1.0],
        [-1.0, 0.0, 1.0],
        [1.0, -1.0, 0.0],
    ]
)

# The three structurally known entries of the 2x2 counterexample
# [[r, 0], [0, -1]]; only r is learned from feedback.
COUNTEREXAMPLE_PIN = ((0, 1, 0.0), (1, 0, 0.0), (1, 1, -1.0))

GAME_KINDS = ("explicit", "rps", "counterexample", "gaussian")

CSV_HEADER = (
    "seed,t,i,j,r,x_probs,y_probs,expected_payoff,v_star,"
    "abs_regret_cum,signed_regret_cum,kl_x,kl_y"
)

_SCALAR_FIELDS = (
    "t",
    "i",
    "j",
    "r",
    "expected_payoff",
    "v_star",
    "abs_regret_cum",
    "signed_regret_cum",
    "kl_x",
    "kl_y",
)


class EpisodeError(RuntimeError):
    """An agent failed mid-episode; carries the 1-based round index."""

    def __init__(self, round_idx, message):
        super().__init__(f"round {round_idx}: {message}")
        self.round = round_idx


@dataclass(frozen=True)
class GameSpec:
    """How the true payoff matrix is produced for each seed.

    kinds:
      explicit       use `matrix` as-is
      rps            the rock-paper-scissors matrix
      counterexample [[r, 0], [0, -1]] with r = +-1 equiprobably per seed
      gaussian       (m, k) entries drawn iid N(mean, var) per seed
    """

    kind: str
    matrix: np.ndarray | None = None
    mean: float = 0.0
    var: float = 1.0
    m: int = 2
    k: int = 2

    def __post_init__(self):
        if self.kind not in GAME_KINDS:
            raise ValueError(f"unknown game kind {self.kind!r}; valid: {', '.join(GAME_KINDS)}")
        if self.kind == "explicit":
            if self.matrix is None:
                raise ValueError("explicit game needs a matrix")
            object.__setattr__(self, "matrix", np.array(self.matrix, dtype=float))
        if self.kind == "gaussian":
            if self.m < 1 or self.k < 1:
                raise ValueError("gaussian game needs positive dimensions")
            if self.var < 0.0:
                raise ValueError("gaussian game variance must be non-negative")

    @property
    def shape(self):
        if self.kind == "explicit":
            return self.matrix.shape
        if self.kind == "rps":
            return (3, 3)
        if self.kind == "counterexample":
            return (2, 2)
        return (self.m, self.k)

    def draw(self, rng) -> PayoffMatrix:
        if self.kind == "explicit":
            return PayoffMatrix(self.matrix)
        if self.kind == "rps":
            return PayoffMatrix(RPS_MATRIX)
        if self.kind == "counterexample":
            r = 1.0 if rng.random() < 0.5 else -1.0
            return PayoffMatrix(np.array([[r, 0.0], [0.0, -1.0]]))
        entries = self.mean + math.sqrt(self.var) * rng.standard_normal((self.m, self.k))
        return PayoffMatrix(entries)

    def to_json_dict(self):
        d = {"kind": self.kind}
        if self.kind == "explicit":
            d["matrix"] = self.matrix.tolist()
        if self.kind == "gaussian":
            d.update(mean=self.mean, var=self.var, m=self.m, k=self.k)
        return d


@dataclass(frozen=True)
class RunConfig:
    game: GameSpec
    column_agent: AgentSpec
    row_agent: AgentSpec
    horizon: int = 1000
    noise_var: float = 1.0
    seeds: tuple = tuple(range(100))
    out: str | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ValueError("need at least one seed")
        object.__setattr__(self, "seeds", seeds)
        if self.noise_var < 0.0:
            raise ValueError("noise variance must be non-negative")

    def to_json_dict(self):
        return {
            "game": self.game.to_json_dict(),
            "column_agent": _spec_json(self.column_agent),
            "row_agent": _spec_json(self.row_agent),
            "horizon": self.horizon,
            "noise_var": self.noise_var,
            "seeds": list(self.seeds),
            "out": self.out,
        }


def _spec_json(spec: AgentSpec):
    return {"name": spec.name, "params": _jsonable(spec.params)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(key): _jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    return obj


@dataclass(frozen=True)
class StepRecord:
    t: int
    i: int
    j: int
    r: float
    x_t: np.ndarray
    y_t: np.ndarray
    expected_payoff: float
    v_star: float
    abs_regret_cum: float
    signed_regret_cum: float
    kl_x: float
    kl_y: float


def _episode_streams(seed):
    # One child stream per concern so adding a consumer never shifts the rest.
    s_game, s_env, s_col, s_row = np.random.SeedSequence(seed).spawn(4)
    return (
        np.random.default_rng(s_game),
        np.random.default_rng(s_env),
        np.random.default_rng(s_col),
        np.random.default_rng(s_row),
    )


def drawn_game(cfg: RunConfig, seed) -> PayoffMatrix:
    """The true matrix episode `seed` plays; pure function of (cfg, seed)."""
    rng_game, _, _, _ = _episode_streams(seed)
    return cfg.game.draw(rng_game)


def run_episode(cfg: RunConfig, seed) -> list:
    rng_game, rng_env, rng_col, rng_row = _episode_streams(seed)
    game = cfg.game.draw(rng_game)
    sol = solve_zero_sum(game)
    a = game.entries
    col = make_learner(cfg.column_agent, game.m, game.k, cfg.horizon, rng_col)
    row = make_row_player(cfg.row_agent, game, cfg.horizon, rng_row)
    noise_sd = math.sqrt(cfg.noise_var)

    records = []
    abs_cum = 0.0
    signed_cum = 0.0
    for t in range(1, cfg.horizon + 1):
        try:
            x = col.act(t)
            y = row.act(t, announced=x)
        except Exception as exc:
            raise EpisodeError(t, str(exc)) from exc
        i = int(rng_env.choice(game.m, p=y.probs))
        j = int(rng_env.choice(game.k, p=x.probs))
        r = float(a[i, j] + noise_sd * rng_env.standard_normal())
        col.observe(i, j, r)
        row.observe(i, j, r)
        ep = float(y.probs @ a @ x.probs)
        abs_cum += abs(sol.value - ep)
        signed_cum += sol.value - ep
        records.append(
            StepRecord(
                t=t,
                i=i,
                j=j,
                r=r,
                x_t=x.probs,
                y_t=y.probs,
                expected_payoff=ep,
                v_star=sol.value,
                abs_regret_cum=abs_cum,
                signed_regret_cum=signed_cum,
                kl_x=kl_divergence(x, sol.x_star),
                kl_y=kl_divergence(y, sol.y_star),
            )
        )
    return records


def _episode_task(args):
    cfg, seed = args
    return seed, run_episode(cfg, seed)


def run_many(cfg: RunConfig, jobs: int = 1) -> dict:
    """All configured seeds; a dict seed -> record list, insertion-ordered."""
    if jobs <= 1 or len(cfg.seeds) == 1:
        return {seed: run_episode(cfg, seed) for seed in cfg.seeds}
    out = {}
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for seed, records in pool.map(_episode_task, [(cfg, s) for s in cfg.seeds]):
            out[seed] = records
    return out


@dataclass(frozen=True)
class Aggregate:
    """Per-round pointwise statistics over seeds (population convention).

    KL fields skip sentinel (infinite) values; `excluded` counts how many
    seeds were dropped at each round, and rounds where every seed is a
    sentinel report NaN.
    """

    n_runs: int
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)
    excluded: dict = field(default_factory=dict)


def aggregate(runs) -> Aggregate:
    if isinstance(runs, dict):
        runs = list(runs.values())
    runs = list(runs)
    if not runs:
        raise ValueError("no runs to aggregate")
    length = len(runs[0])
    if any(len(run) != length for run in runs):
        raise ValueError("runs have unequal lengths")
    if length == 0:
        raise ValueError("runs are empty")

    mean, std, excluded = {}, {}, {}
    for name in _SCALAR_FIELDS:
        mat = np.array([[getattr(rec, name) for rec in run] for run in runs], dtype=float)
        if name in ("kl_x", "kl_y"):
            finite = np.isfinite(mat)
            cnt = finite.sum(axis=0)
            safe = np.where(finite, mat, 0.0)
            with np.errstate(invalid="ignore", divide="ignore"):
                mu = np.where(cnt > 0, safe.sum(axis=0) / np.maximum(cnt, 1), np.nan)
                var = np.where(
                    cnt > 0,
                    np.where(finite, (mat - mu) ** 2, 0.0).sum(axis=0) / np.maximum(cnt, 1),
                    np.nan,
                )
            mean[name] = mu
            std[name] = np.sqrt(var)
            excluded[name] = len(runs) - cnt
        else:
            mean[name] = mat.mean(axis=0)
            std[name] = mat.std(axis=0)
    return Aggregate(n_runs=len(runs), mean=mean, std=std, excluded=excluded)


def hindsight_regret(records, A_true: PayoffMatrix) -> float:
    """Best fixed column in hindsight versus rewards actually earned.

    Counterfactual column payoffs are evaluated against the realized row
    actions, the standard adversarial-bandit accounting for the column seat.
    """
    if not records:
        raise ValueError("no records")
    a = A_true.entries
    counterfactual = np.zeros(A_true.k)
    earned = 0.0
    for rec in records:
        counterfactual += a[rec.i, :]
        earned += rec.r
    return float(counterfactual.max() - earned)


def negative_return_stats(runs):
    """(fraction of rounds with expected payoff < 0, mean expected payoff),
    pooled across seeds.  Accepts one record list or a collection of them."""
    records = _flatten(runs)
    if not records:
        raise ValueError("no records")
    eps = np.array([rec.expected_payoff for rec in records])
    return float(np.mean(eps < 0.0)), float(eps.mean())


def _flatten(runs):
    if isinstance(runs, dict):
        runs = list(runs.values())
    runs = list(runs)
    if runs and isinstance(runs[0], StepRecord):
        return runs
    return [rec for run in runs for rec in run]


def selection_weight_sum(probs, chosen) -> float:
    """Sum of p_i^t / (1 v n_i^t) over rounds and indices, where n_i^t counts
    selections of i strictly before round t.  Bounded by q*(2 + log T)."""
    probs = np.asarray(probs, dtype=float)
    chosen = np.asarray(chosen, dtype=int)
    if probs.ndim != 2 or chosen.shape != (probs.shape[0],):
        raise ValueError("need probs of shape (T, q) and chosen of shape (T,)")
    counts = np.zeros(probs.shape[1])
    total = 0.0
    for t in range(probs.shape[0]):
        total += float((probs[t] / np.maximum(1.0, counts)).sum())
        counts[chosen[t]] += 1
    return total


# ---------------------------------------------------------------------------
# presets

_RPS_PRIOR = {"prior_mean": 0.0, "prior_var": 1.0}


def _learner_spec(alg, noise_var, prior, tol=None, pin=None):
    if alg not in LEARNER_NAMES:
        raise ValueError(f"unknown learner {alg!r}; valid: {', '.join(LEARNER_NAMES)}")
    params = dict(prior)
    params["noise_var"] = noise_var
    if tol is not None:
        params["tol"] = tol
    if pin is not None:
        params["pin"] = tuple(pin)
    return AgentSpec(alg, params)


def _seed_tuple(seeds):
    if seeds is None:
        return tuple(range(100))
    return tuple(int(s) for s in seeds)


def rps_selfplay(alg, horizon=1000, seeds=None, noise_var=1.0, out=None, tol=None):
    """Both seats run independent instances of the same algorithm on RPS."""
    return RunConfig(
        game=GameSpec("rps"),
        column_agent=_learner_spec(alg, noise_var, _RPS_PRIOR, tol),
        row_agent=_learner_spec(alg, noise_var, _RPS_PRIOR, tol),
        horizon=horizon,
        noise_var=noise_var,
        seeds=_seed_tuple(seeds),
        out=out,
    )


def rps_vs_best_response(alg, horizon=1000, seeds=None, noise_var=1.0, out=None, tol=None):
    return RunConfig(
        game=GameSpec("rps"),
        column_agent=_learner_spec(alg, noise_var, _RPS_PRIOR, tol),
        row_agent=AgentSpec("br"),
        horizon=horizon,
        noise_var=noise_var,
        seeds=_seed_tuple(seeds),
        out=out,
    )


def rps_head_to_head(alg1, alg2, horizon=1000, seeds=None, noise_var=1.0, out=None, tol=None):
    """alg1 takes the maximizer (column) seat; signed regret is logged from
    that seat's point of view."""
    return RunConfig(
        game=GameSpec("rps"),
        column_agent=_learner_spec(alg1, noise_var, _RPS_PRIOR, tol),
        row_agent=_learner_spec(alg2, noise_var, _RPS_PRIOR, tol),
        horizon=horizon,
        noise_var=noise_var,
        seeds=_seed_tuple(seeds),
        out=out,
    )


def counterexample_2x2(alg, horizon=1000, seeds=None, noise_var=1.0, out=None, tol=None):
    """[[r, 0], [0, -1]] against the exact Nash row mixture, r drawn +-1 per
    seed.  The three known entries are pinned so only r is learned."""
    return RunConfig(
        game=GameSpec("counterexample"),
        column_agent=_learner_spec(alg, noise_var, _RPS_PRIOR, tol, pin=COUNTEREXAMPLE_PIN),
        row_agent=AgentSpec("nash"),
        horizon=horizon,
        noise_var=noise_var,
        seeds=_seed_tuple(seeds),
        out=out,
    )


def robust_bandit(alg, vs="nature", horizon=1000, seeds=None, noise_var=1.0, out=None, tol=None):
    """10 column arms, 5 row outcomes, entries iid N(0.5, 2.0) per seed; the
    learner's prior matches the generator.  `vs` picks the row seat: nature
    redraws a uniform simplex point every 50 rounds, best_response exploits."""
    if vs == "nature":
        row = AgentSpec("nature", {"period": 50})
    elif vs == "best_response":
        row = AgentSpec("br")
    else:
        raise ValueError(f"unknown opponent kind {vs!r}; valid: nature, best_response")
    prior = {"prior_mean": 0.5, "prior_var": 2.0}
    return RunConfig(
        game=GameSpec("gaussian", mean=0.5, var=2.0, m=5, k=10),
        column_agent=_learner_spec(alg, noise_var, prior, tol),
        row_agent=row,
        horizon=horizon,
        noise_var=noise_var,
        seeds=_seed_tuple(seeds),
        out=out,
    )


# ---------------------------------------------------------------------------
# artifacts

def _fmt_vector(vec):
    return ";".join(repr(float(v)) for v in vec)


def write_csv(path, runs: dict):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for seed, records in runs.items():
            for rec in records:
                writer.writerow(
                    [
                        seed,
                        rec.t,
                        rec.i,
                        rec.j,
                        repr(rec.r),
                        _fmt_vector(rec.x_t),
                        _fmt_vector(rec.y_t),
                        repr(rec.expected_payoff),
                        repr(rec.v_star),
                        repr(rec.abs_regret_cum),
                        repr(rec.signed_regret_cum),
                        repr(rec.kl_x),
                        repr(rec.kl_y),
                    ]
                )


def read_csv(path) -> dict:
    """Inverse of write_csv: field-identical records keyed by seed."""
    runs = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"unexpected CSV header {header!r}; want {CSV_HEADER!r}")
        for row in reader:
            seed = int(row[0])
            rec = StepRecord(
                t=int(row[1]),
                i=int(row[2]),
                j=int(row[3]),
                r=float(row[4]),
                x_t=np.array([float(v) for v in row[5].split(";")]),
                y_t=np.array([float(v) for v in row[6].split(";")]),
                expected_payoff=float(row[7]),
                v_star=float(row[8]),
                abs_regret_cum=float(row[9]),
                signed_regret_cum=float(row[10]),
                kl_x=float(row[11]),
                kl_y=float(row[12]),
            )
            runs.setdefault(seed, []).append(rec)
    return runs


def summarize(cfg: RunConfig, runs: dict) -> dict:
    """JSON-ready digest: config echo, per-seed finals, pooled return stats."""
    per_seed = {}
    finals_abs, finals_signed = [], []
    for seed, records in runs.items():
        game = drawn_game(cfg, seed)
        last = records[-1]
        info = {
            "final_abs_regret": last.abs_regret_cum,
            "final_signed_regret": last.signed_regret_cum,
            "hindsight_regret": hindsight_regret(records, game),
        }
        if cfg.game.kind == "counterexample":
            info["game_r"] = float(game.entries[0, 0])
        per_seed[str(seed)] = info
        finals_abs.append(last.abs_regret_cum)
        finals_signed.append(last.signed_regret_cum)
    frac_neg, mean_ep = negative_return_stats(runs)
    return {
        "version": __version__,
        "config": cfg.to_json_dict(),
        "per_seed": per_seed,
        "final": {
            "mean_abs_regret": float(np.mean(finals_abs)),
            "std_abs_regret": float(np.std(finals_abs)),
            "mean_signed_regret": float(np.mean(finals_signed)),
            "std_signed_regret": float(np.std(finals_signed)),
        },
        "negative_returns": {"fraction": frac_neg, "mean_expected_payoff": mean_ep},
    }


def write_summary(path, cfg: RunConfig, runs: dict) -> dict:
    summary = summarize(cfg, runs)
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary
