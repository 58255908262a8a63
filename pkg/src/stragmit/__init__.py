"""Cost vs latency of straggler mitigation for distributed jobs.

Closed-form models for replicated and MDS-coded redundancy, delayed
launch and straggler relaunch; a Monte-Carlo oracle; a discrete-event
cluster simulator with limited processor sharing; Pareto-family tail
fitting; and a trace-extraction pipeline for empirical task times.
"""

from . import (
    analytic_models,
    cluster_sim,
    distributions,
    errors,
    fitting,
    monte_carlo,
    special_functions,
    trace,
)

__all__ = [
    "analytic_models",
    "cluster_sim",
    "distributions",
    "errors",
    "fitting",
    "monte_carlo",
    "special_functions",
    "trace",
]

__version__ = "0.1.0"
