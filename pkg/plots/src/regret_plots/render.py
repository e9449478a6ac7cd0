"""Figure rendering: median regret curves with quartile bands, plus a
delay-robustness comparison of final regrets across input files."""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import ResultTable, read_results


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple
    output: str
    logx: bool = False
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _label(spec: PlotSpec, table: ResultTable, algo: str) -> str:
    key = f"{table.path}:{algo}"
    if key in spec.labels:
        return spec.labels[key]
    if algo in spec.labels:
        return spec.labels[algo]
    if len(spec.inputs) == 1:
        return algo
    return f"{algo} ({table.path})"


def _quartiles(values: np.ndarray) -> tuple:
    """Lower order statistics, matching the harness aggregation."""
    ordered = np.sort(values)
    n = len(ordered)
    return (
        ordered[int(0.25 * (n - 1))],
        ordered[int(0.5 * (n - 1))],
        ordered[int(0.75 * (n - 1))],
    )


def render_regret_curves(spec: PlotSpec) -> str:
    """Write a regret-versus-round figure: one median curve per (file, algo)
    with the interquartile range shaded. Returns the output path."""
    tables = [read_results(path) for path in spec.inputs]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for table in tables:
        for algo in table.algos:
            checkpoints = table.checkpoints(algo)
            q25, med, q75 = [], [], []
            for cp in checkpoints:
                lo, mid, hi = _quartiles(table.regrets_at(algo, cp))
                q25.append(lo)
                med.append(mid)
                q75.append(hi)
            label = _label(spec, table, algo)
            (line,) = ax.plot(checkpoints, med, marker="o", markersize=3,
                              label=label)
            ax.fill_between(checkpoints, q25, q75, alpha=0.2,
                            color=line.get_color())
    if spec.logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel("round")
    ax.set_ylabel("pseudo-regret")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
    return spec.output


def render_delay_robustness(spec: PlotSpec) -> str:
    """Write a bar chart of median final regret per (file, algo), for
    comparing the same algorithm across delay environments."""
    tables = [read_results(path) for path in spec.inputs]
    labels, medians, spans = [], [], []
    for table in tables:
        for algo in table.algos:
            final = table.checkpoints(algo)[-1]
            lo, mid, hi = _quartiles(table.regrets_at(algo, final))
            labels.append(_label(spec, table, algo))
            medians.append(mid)
            spans.append((mid - lo, hi - mid))
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    positions = np.arange(len(labels))
    ax.bar(positions, medians, yerr=np.transpose(spans), capsize=4)
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("final pseudo-regret (median, IQR)")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
    return spec.output
