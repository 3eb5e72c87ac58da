"""Multimode squeezed frequency combs: Gaussian states, SPOPO simulation,
covariance reconstruction, entanglement tests and cluster-state analysis."""

__version__ = "0.1.0"

from . import cluster, entanglement, gaussian, model, reconstruction  # noqa: E402,F401
from .config import DEFAULT_TOLERANCES, Tolerances  # noqa: E402,F401
