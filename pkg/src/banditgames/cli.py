"""Command-line entry point: experiment presets, custom runs, and a
self-contained validation pass, all writing the CSV/JSON artifact pair.

Exit codes: 0 success, 2 invalid arguments or unknown names, 1 runtime
failure mid-experiment.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from banditgames.agents import AgentSpec, LEARNER_NAMES, OPPONENT_NAMES
from banditgames.beliefs import BeliefState, update
from banditgames.games import PayoffMatrix, brute_force_solution, solve_zero_sum
from banditgames.harness import (
    GameSpec,
    RunConfig,
    counterexample_2x2,
    robust_bandit,
    rps_head_to_head,
    rps_selfplay,
    rps_vs_best_response,
    run_many,
    selection_weight_sum,
    summarize,
    write_csv,
    write_summary,
)
from banditgames.klearning import objective, objective_grad

EXPERIMENTS = ("rps-selfplay", "rps-br", "rps-h2h", "counterexample", "robust-bandit", "custom")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditgames",
        description="Repeated zero-sum matrix games under noisy bandit feedback.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--horizon", type=int, default=1000, help="rounds per episode")
    common.add_argument("--seeds", type=int, default=100, help="number of seeds")
    common.add_argument("--seed-base", type=int, default=0, help="first seed; list is base..base+seeds-1")
    common.add_argument("--noise-var", type=float, default=1.0, help="reward noise variance")
    common.add_argument("--prior-mean", type=float, default=None, help="override the preset prior mean")
    common.add_argument("--prior-var", type=float, default=None, help="override the preset prior variance")
    common.add_argument("--tol", type=float, default=None, help="solver tolerance for the K-learning agent")
    common.add_argument("--out", default=".", help="output directory for CSV/JSON artifacts")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    agent = argparse.ArgumentParser(add_help=False)
    agent.add_argument("--agent", required=True, help=f"column learner: one of {', '.join(LEARNER_NAMES)}")

    sub.add_parser("rps-selfplay", parents=[common, agent], help="both seats run --agent on rock-paper-scissors")
    sub.add_parser("rps-br", parents=[common, agent], help="--agent against the exploiting best-response row")
    h2h = sub.add_parser("rps-h2h", parents=[common, agent], help="two learners head to head")
    h2h.add_argument("--agent2", required=True, help="row-seat learner")
    sub.add_parser("counterexample", parents=[common, agent], help="[[r,0],[0,-1]] against the exact Nash row")
    robust = sub.add_parser("robust-bandit", parents=[common, agent], help="10-arm robust bandit, 5 outcomes")
    robust.add_argument("--opponent", default="nature", choices=("nature", "br"), help="row seat")
    custom = sub.add_parser("custom", parents=[common, agent], help="Gaussian random game, any seats")
    custom.add_argument("--opponent", default="nash", help=f"row seat: {', '.join(OPPONENT_NAMES + LEARNER_NAMES)}")
    custom.add_argument("--m", type=int, default=3, help="rows of the game")
    custom.add_argument("--k", type=int, default=3, help="columns of the game")
    custom.add_argument("--game-mean", type=float, default=0.0, help="entry mean of the random game")
    custom.add_argument("--game-var", type=float, default=1.0, help="entry variance of the random game")
    custom.add_argument("--strategy", default=None, help="comma-separated mixture for the fixed opponent")
    custom.add_argument("--period", type=int, default=50, help="redraw period for the nature opponent")

    sub.add_parser("validate", help="run the oracle and invariant checks, report pass/fail counts")
    return parser


def _seed_range(args):
    if args.seeds < 1:
        raise ValueError("--seeds must be at least 1")
    return range(args.seed_base, args.seed_base + args.seeds)


def _apply_prior_overrides(cfg: RunConfig, args) -> RunConfig:
    overrides = {}
    if args.prior_mean is not None:
        overrides["prior_mean"] = args.prior_mean
    if args.prior_var is not None:
        overrides["prior_var"] = args.prior_var
    if not overrides:
        return cfg
    from dataclasses import replace

    def patched(spec):
        if spec.name not in LEARNER_NAMES:
            return spec
        return AgentSpec(spec.name, {**spec.params, **overrides})

    return replace(cfg, column_agent=patched(cfg.column_agent), row_agent=patched(cfg.row_agent))


def _build_config(args) -> tuple[RunConfig, str]:
    seeds = _seed_range(args)
    kw = dict(horizon=args.horizon, seeds=seeds, noise_var=args.noise_var, tol=args.tol)
    if args.command == "rps-selfplay":
        cfg, stem = rps_selfplay(args.agent, **kw), f"rps-selfplay_{args.agent}"
    elif args.command == "rps-br":
        cfg, stem = rps_vs_best_response(args.agent, **kw), f"rps-br_{args.agent}"
    elif args.command == "rps-h2h":
        cfg = rps_head_to_head(args.agent, args.agent2, **kw)
        stem = f"rps-h2h_{args.agent}_vs_{args.agent2}"
    elif args.command == "counterexample":
        cfg, stem = counterexample_2x2(args.agent, **kw), f"counterexample_{args.agent}"
    elif args.command == "robust-bandit":
        vs = "nature" if args.opponent == "nature" else "best_response"
        cfg = robust_bandit(args.agent, vs=vs, **kw)
        stem = f"robust-bandit_{args.agent}_vs_{args.opponent}"
    elif args.command == "custom":
        cfg = _custom_config(args, seeds)
        stem = f"custom_{args.agent}_vs_{args.opponent}"
    else:
        raise ValueError(f"unknown command {args.command!r}")
    return _apply_prior_overrides(cfg, args), stem


def _custom_config(args, seeds) -> RunConfig:
    if args.agent not in LEARNER_NAMES:
        raise ValueError(f"unknown learner {args.agent!r}; valid: {', '.join(LEARNER_NAMES)}")
    if args.opponent not in OPPONENT_NAMES + LEARNER_NAMES:
        raise ValueError(
            f"unknown row player {args.opponent!r}; valid: {', '.join(OPPONENT_NAMES + LEARNER_NAMES)}"
        )
    col_params = {
        "prior_mean": args.game_mean,
        "prior_var": args.game_var,
        "noise_var": args.noise_var,
    }
    if args.tol is not None:
        col_params["tol"] = args.tol
    row_params = {}
    if args.opponent == "fixed":
        if args.strategy is None:
            raise ValueError("--opponent fixed needs --strategy, e.g. 0.2,0.2,0.6")
        row_params["strategy"] = tuple(float(v) for v in args.strategy.split(","))
    if args.opponent == "nature":
        row_params["period"] = args.period
    if args.opponent in LEARNER_NAMES:
        row_params = dict(col_params)
    return RunConfig(
        game=GameSpec("gaussian", mean=args.game_mean, var=args.game_var, m=args.m, k=args.k),
        column_agent=AgentSpec(args.agent, col_params),
        row_agent=AgentSpec(args.opponent, row_params),
        horizon=args.horizon,
        noise_var=args.noise_var,
        seeds=seeds,
    )


def _print_summary(args, stem, summary, csv_path, json_path):
    final = summary["final"]
    neg = summary["negative_returns"]
    row_name = summary["config"]["row_agent"]["name"]
    lines = [
        f"experiment           {args.command}",
        f"column agent         {args.agent}",
        f"row seat             {row_name}",
        f"horizon x seeds      {args.horizon} x {args.seeds}",
        f"mean final |regret|  {final['mean_abs_regret']:.3f} (std {final['std_abs_regret']:.3f})",
        f"mean final regret    {final['mean_signed_regret']:.3f} (std {final['std_signed_regret']:.3f})",
        f"rounds w/ return<0   {100.0 * neg['fraction']:.1f}%",
        f"mean return          {neg['mean_expected_payoff']:.4f}",
        f"artifacts            {csv_path} {json_path}",
    ]
    print("\n".join(lines))


def _run_experiment(args) -> int:
    try:
        cfg, stem = _build_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        runs = run_many(cfg, jobs=args.jobs)
        csv_path = out_dir / f"{stem}.csv"
        json_path = out_dir / f"{stem}.json"
        write_csv(csv_path, runs)
        summary = write_summary(json_path, cfg, runs)
    except Exception as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1
    _print_summary(args, stem, summary, csv_path, json_path)
    return 0


# ---------------------------------------------------------------------------
# validate

def _check_solver_oracle(rng):
    failures = 0
    for _ in range(50):
        m, k = rng.integers(1, 5, size=2)
        game = PayoffMatrix(rng.uniform(-1.0, 1.0, size=(int(m), int(k))))
        got = solve_zero_sum(game)
        want = brute_force_solution(game)
        if abs(got.value - want.value) > 1e-6 or got.gap > 2e-6 or want.gap > 2e-6:
            failures += 1
    return 50, failures


def _check_gradients(rng):
    failures = 0
    for _ in range(20):
        m, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        belief = BeliefState.fresh(m, k)
        for _ in range(10):
            belief = update(belief, int(rng.integers(m)), int(rng.integers(k)), float(rng.normal()))
        y = rng.dirichlet(np.ones(m))
        tau = float(rng.uniform(0.05, 5.0))
        gy, gt = objective_grad(belief, y, tau)
        step = 1e-6
        bad = False
        for idx in range(m):
            bump = y.copy()
            bump[idx] += step
            fd = (objective(belief, bump, tau) - objective(belief, y, tau)) / step
            if abs(fd - gy[idx]) > 1e-4 * max(1.0, abs(fd)):
                bad = True
        fd_t = (objective(belief, y, tau + step) - objective(belief, y, tau)) / step
        if abs(fd_t - gt) > 1e-4 * max(1.0, abs(fd_t)):
            bad = True
        failures += bad
    return 20, failures


def _check_counting(rng):
    failures = 0
    for _ in range(200):
        q = int(rng.integers(1, 11))
        horizon = int(rng.integers(1, 1001))
        probs = rng.dirichlet(np.ones(q), size=horizon)
        chosen = np.array([rng.choice(q, p=p) for p in probs])
        if selection_weight_sum(probs, chosen) > q * (2 + math.log(horizon)):
            failures += 1
    return 200, failures


def _run_validate() -> int:
    rng = np.random.default_rng(0)
    checks = (
        ("game solver vs support enumeration", _check_solver_oracle),
        ("convex objective gradients vs finite differences", _check_gradients),
        ("index-selection counting bound", _check_counting),
    )
    total_failures = 0
    for label, fn in checks:
        n, failures = fn(rng)
        total_failures += failures
        status = "pass" if failures == 0 else "FAIL"
        print(f"{status}  {label}: {n - failures}/{n}")
    if total_failures:
        print(f"{total_failures} check(s) failed", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "validate":
        return _run_validate()
    return _run_experiment(args)


if __name__ == "__main__":
    sys.exit(main())
