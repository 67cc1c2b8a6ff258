#!/usr/bin/env python3
"""Run the full experiment battery and leave CSV/JSON artifacts in one place.

Each experiment goes through the installed command-line interface so the
artifacts are exactly what any downstream consumer (for example the plotting
package) will see.  With default settings this takes a while on one core;
use --quick for a smoke pass.
"""

import argparse
import sys
import time

from banditgames import cli

LEARNERS = ("ucb", "ts", "klearn", "exp3")
ALL_ALGS = LEARNERS + ("naive-ucb", "naive-ts")


def battery():
    """(label, argv-tail) pairs for every experiment in the suite."""
    runs = []
    for alg in LEARNERS:
        runs.append((f"self-play {alg}", ["rps-selfplay", "--agent", alg]))
    for alg in LEARNERS:
        runs.append((f"vs best response {alg}", ["rps-br", "--agent", alg]))
    runs.append(("head-to-head klearn/exp3", ["rps-h2h", "--agent", "klearn", "--agent2", "exp3"]))
    runs.append(("head-to-head ucb/exp3", ["rps-h2h", "--agent", "ucb", "--agent2", "exp3"]))
    for alg in ("ts", "klearn"):
        runs.append((f"counterexample {alg}", ["counterexample", "--agent", alg]))
    for alg in ALL_ALGS:
        for opp in ("nature", "br"):
            runs.append(
                (f"robust {alg} vs {opp}", ["robust-bandit", "--agent", alg, "--opponent", opp])
            )
    return runs


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="artifact directory")
    parser.add_argument("--seeds", type=int, default=100)
    parser.add_argument("--horizon", type=int, default=1000)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument(
        "--quick", action="store_true", help="10 seeds, horizon 200: smoke test the pipeline"
    )
    parser.add_argument("--only", default=None, help="substring filter on experiment labels")
    args = parser.parse_args(argv)

    seeds = 10 if args.quick else args.seeds
    horizon = 200 if args.quick else args.horizon
    common = [
        "--out", args.out,
        "--seeds", str(seeds),
        "--horizon", str(horizon),
        "--jobs", str(args.jobs),
    ]

    selected = [
        (label, tail) for label, tail in battery()
        if args.only is None or args.only in label
    ]
    if not selected:
        print(f"no experiment label contains {args.only!r}", file=sys.stderr)
        return 2

    failures = []
    for n, (label, tail) in enumerate(selected, start=1):
        print(f"[{n}/{len(selected)}] {label}")
        start = time.perf_counter()
        code = cli.main(tail + common)
        print(f"    exit {code}, {time.perf_counter() - start:.1f}s")
        if code != 0:
            failures.append(label)
    if failures:
        print(f"{len(failures)} experiment(s) failed: {', '.join(failures)}", file=sys.stderr)
        return 1
    print(f"all {len(selected)} experiments done -> {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
