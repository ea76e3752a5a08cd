"""Render comparison figures from rl-balance experiment exports.

The input contract is the exporter's file formats, nothing else: sweep.csv
(one row per load multiplier, policy, and seed) and summary.json (one entry
per policy and seed). This package never imports the simulator.
"""

from .io import PlotDataError, read_summary, read_sweep
from .render import plot_completion_rate, plot_response_time, plot_utilization

__version__ = "0.1.0"

__all__ = [
    "PlotDataError",
    "read_summary",
    "read_sweep",
    "plot_completion_rate",
    "plot_response_time",
    "plot_utilization",
]
