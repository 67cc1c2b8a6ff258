"""Parse experiment CSV artifacts into per-seed numpy arrays.

The CSV contract is an external interface: a fixed 13-column header, one row
per (seed, round), floats written with full repr precision, probability
vectors semicolon-joined, and KL columns using ``inf`` as the undefined-value
sentinel.  This module owns the schema knowledge so the figure code never
touches raw rows.
"""

import csv

import numpy as np

EXPECTED_HEADER = [
    "seed",
    "t",
    "i",
    "j",
    "r",
    "x_probs",
    "y_probs",
    "expected_payoff",
    "v_star",
    "abs_regret_cum",
    "signed_regret_cum",
    "kl_x",
    "kl_y",
]

SCALAR_COLUMNS = (
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


class SchemaError(ValueError):
    """Raised when a CSV does not match the artifact contract."""


def check_header(header, path):
    if header == EXPECTED_HEADER:
        return
    missing = [name for name in EXPECTED_HEADER if name not in header]
    unexpected = [name for name in header if name not in EXPECTED_HEADER]
    parts = [f"CSV schema mismatch in {path}"]
    if missing:
        parts.append(f"missing columns: {', '.join(missing)}")
    if unexpected:
        parts.append(f"unexpected columns: {', '.join(unexpected)}")
    if not missing and not unexpected:
        parts.append(f"column order differs: got {', '.join(header)}")
    raise SchemaError("; ".join(parts))


def load_runs(path):
    """{seed: {column: array}} with rows in file order within each seed.

    Scalar columns become float arrays, ``x_probs``/``y_probs`` become
    (rounds, dims) arrays.  Raises SchemaError on a bad header and
    ValueError when the file holds no data rows.
    """
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise SchemaError(f"CSV schema mismatch in {path}; file is empty")
    check_header(rows[0], path)
    if len(rows) == 1:
        raise ValueError(f"{path} has no data rows (empty seed set)")

    by_seed = {}
    for row in rows[1:]:
        if len(row) != len(EXPECTED_HEADER):
            raise SchemaError(
                f"CSV schema mismatch in {path}; row has {len(row)} fields, "
                f"expected {len(EXPECTED_HEADER)}"
            )
        rec = dict(zip(EXPECTED_HEADER, row))
        by_seed.setdefault(int(rec["seed"]), []).append(rec)

    runs = {}
    for seed, recs in by_seed.items():
        columns = {
            name: np.array([float(rec[name]) for rec in recs]) for name in SCALAR_COLUMNS
        }
        for name in ("x_probs", "y_probs"):
            columns[name] = np.array(
                [[float(v) for v in rec[name].split(";")] for rec in recs]
            )
        runs[seed] = columns
    return runs


def curve_stats(runs, column):
    """Pointwise (mean, std) over seeds for one scalar column.

    Rows are aligned by position, so every seed must cover the same number
    of rounds.  Non-finite entries (the KL sentinel) are excluded pointwise;
    the second return value counts how many were dropped in total.  Rounds
    where every seed is non-finite come back as NaN.
    """
    lengths = {len(cols[column]) for cols in runs.values()}
    if len(lengths) != 1:
        raise ValueError(f"seeds disagree on round count: {sorted(lengths)}")
    stacked = np.stack([cols[column] for cols in runs.values()])
    finite = np.isfinite(stacked)
    dropped = int(stacked.size - finite.sum())
    masked = np.ma.masked_array(stacked, mask=~finite)
    mean = masked.mean(axis=0).filled(np.nan)
    std = masked.std(axis=0).filled(np.nan)
    return (mean, std), dropped


def pooled_column(runs, column):
    """One flat array of a scalar column across every seed and round."""
    return np.concatenate([cols[column] for cols in runs.values()])
