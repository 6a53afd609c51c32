"""Predictor-corrector continuation of the Pareto critical set of
``min (f(x), ||x||_1)``."""

__version__ = "0.1.0"

from .driver import ContinuationConfig, FrontArchive, nondominance_filter, run  # noqa: E402
from .kkt import ActiveSet, CriticalPoint, criticality_residual, is_pareto_critical  # noqa: E402

__all__ = ["__version__", "run", "ContinuationConfig", "FrontArchive", "nondominance_filter", "ActiveSet",
           "CriticalPoint", "criticality_residual", "is_pareto_critical"]
