"""Coarse Ricci curvature and concentration bounds for Markov chains."""

from ._core import *  # noqa: F401,F403
from ._core import (  # noqa: F401
    ChainError,
    ConvergenceError,
    DomainError,
    Error,
    InfeasibleError,
    MetricChain,
)

__version__ = "0.1.0"
