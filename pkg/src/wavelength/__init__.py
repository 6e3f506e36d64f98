"""Pragmatic listener/speaker inference and evaluation for the Wavelength game.

Players communicate positions on a 0-100 scale between two contrasting
concepts using short clues. This package provides the pragmatic-inference
core (literal listeners, soft-max speakers, Bayesian and state-marginal
pragmatic listeners), evaluation pipelines against human guess data, mock
and live-endpoint agents, a data-collection HTTP service, and a CLI.
"""

__version__ = "0.1.0"

from . import agents, data, metrics, pipelines, reports, rsa
from .errors import WavelengthError

__all__ = [
    "WavelengthError",
    "__version__",
    "agents",
    "data",
    "metrics",
    "pipelines",
    "reports",
    "rsa",
]
