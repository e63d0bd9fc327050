"""Boundary-driven exclusion process simulator with a matching SPDE toolkit.

The package has three layers:

- microscopic: `core` defines the jump rates and exact small-system
  checks, `engine` runs the kinetic Monte Carlo dynamics, `fields`
  turns trajectories into fluctuation fields and related observables;
- macroscopic: `spectral` holds the deterministic kernel/basis
  analysis, `spde` the spectral reference processes on [0, 1];
- harness: `experiments` packages both sides into seeded, replicated
  statistical checks, and `cli` exposes them as a command line tool.
"""

from wasep.core import SimParams, channel_rates, dirichlet_form, exact_generator
from wasep.engine import simulate
from wasep.experiments import EXPERIMENTS, run_experiment

__version__ = "0.1.0"

__all__ = [
    "SimParams",
    "channel_rates",
    "exact_generator",
    "dirichlet_form",
    "simulate",
    "EXPERIMENTS",
    "run_experiment",
    "__version__",
]
