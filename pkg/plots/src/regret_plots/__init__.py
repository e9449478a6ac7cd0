"""Regret-curve figures from experiment harness CSVs."""

from .render import PlotSpec, render_delay_robustness, render_regret_curves
from .schema import EXPECTED_HEADER, ResultTable, SchemaError, read_results

__all__ = [
    "EXPECTED_HEADER",
    "PlotSpec",
    "ResultTable",
    "SchemaError",
    "read_results",
    "render_delay_robustness",
    "render_regret_curves",
]
