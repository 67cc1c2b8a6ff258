"""Figure and table rendering from experiment CSV artifacts.

Five kinds, one output file each:

- ``regret``: mean cumulative absolute regret over seeds, one band per input.
- ``kl``: mean KL divergence to the reference equilibrium strategy
  (column seat), sentinel values dropped.
- ``h2h``: mean cumulative signed regret from the maximizer seat.
- ``histogram``: per-round expected payoffs pooled across seeds, 50 bins.
- ``table``: text table with the negative-return fraction and mean return
  per algorithm.

Rendering is pure: the same inputs yield byte-identical tables, and figures
identical up to the image encoder.
"""

import os
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import curve_stats, load_runs, pooled_column

KINDS = ("regret", "kl", "h2h", "histogram", "table")
HIST_BINS = 50


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input CSVs, a kind from the closed set, an
    output path, and optional per-input labels (default: file stems)."""

    inputs: tuple
    kind: str
    out: str
    labels: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise ValueError("need at least one input CSV")
        for path in self.inputs:
            if not os.path.isfile(path):
                raise ValueError(f"input does not exist: {path}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; valid: {', '.join(KINDS)}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.inputs):
                raise ValueError(
                    f"{len(self.labels)} labels for {len(self.inputs)} inputs"
                )

    def resolved_labels(self):
        if self.labels is not None:
            return self.labels
        return tuple(
            os.path.splitext(os.path.basename(path))[0] for path in self.inputs
        )


def render(spec: FigureSpec) -> str:
    """Write the requested file and return its path.

    All inputs are read and validated before the output is opened, so a bad
    input never leaves a partial file behind.
    """
    loaded = [
        (label, path, load_runs(path))
        for label, path in zip(spec.resolved_labels(), spec.inputs)
    ]
    if spec.kind == "table":
        text = _table_text(loaded)
        with open(spec.out, "w") as handle:
            handle.write(text)
        return spec.out
    fig = _FIGURES[spec.kind](loaded)
    try:
        fig.savefig(spec.out, dpi=150)
    finally:
        plt.close(fig)
    return spec.out


def _curve_figure(loaded, column, ylabel):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for label, path, runs in loaded:
        (mean, std), dropped = curve_stats(runs, column)
        if dropped:
            print(
                f"note: dropped {dropped} non-finite {column} values from {path}",
                file=sys.stderr,
            )
        t = np.arange(1, len(mean) + 1)
        ax.plot(t, mean, label=label)
        ax.fill_between(t, mean - std, mean + std, alpha=0.2)
    ax.set_xlabel("round")
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


def _histogram_figure(loaded):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    pooled = [(label, pooled_column(runs, "expected_payoff")) for label, _, runs in loaded]
    lo = min(values.min() for _, values in pooled)
    hi = max(values.max() for _, values in pooled)
    for label, values in pooled:
        ax.hist(values, bins=HIST_BINS, range=(lo, hi), alpha=0.5, label=label)
    ax.set_xlabel("per-round expected payoff")
    ax.set_ylabel("count")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


_FIGURES = {
    "regret": lambda loaded: _curve_figure(loaded, "abs_regret_cum", "cumulative |regret|"),
    "kl": lambda loaded: _curve_figure(loaded, "kl_x", "KL to equilibrium strategy"),
    "h2h": lambda loaded: _curve_figure(loaded, "signed_regret_cum", "cumulative regret"),
    "histogram": _histogram_figure,
}


def _table_text(loaded):
    """Fixed-layout text: algorithm, % of rounds with expected payoff < 0,
    mean expected payoff.  Pure string assembly, so byte-identical reruns."""
    rows = []
    for label, _, runs in loaded:
        payoffs = pooled_column(runs, "expected_payoff")
        rows.append((label, 100.0 * float((payoffs < 0).mean()), float(payoffs.mean())))
    headers = ("algorithm", "% returns < 0", "mean return")
    cells = [(label, f"{frac:.1f}%", f"{mean:.3f}") for label, frac, mean in rows]
    widths = [
        max(len(headers[col]), max(len(row[col]) for row in cells))
        for col in range(3)
    ]
    lines = [
        "  ".join(
            [headers[0].ljust(widths[0])]
            + [headers[col].rjust(widths[col]) for col in (1, 2)]
        )
    ]
    for row in cells:
        lines.append(
            "  ".join(
                [row[0].ljust(widths[0])] + [row[col].rjust(widths[col]) for col in (1, 2)]
            )
        )
    return "\n".join(lines) + "\n"
