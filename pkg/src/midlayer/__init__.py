"""Exact polymer-model and cluster-expansion computations for q-colorings of
the middle two layers B_d of the hypercube.
"""

from __future__ import annotations

from .errors import ConsistencyError, MidlayerError, ParameterError, ResourceLimitError, ValidationError
from .graph import MidLayerGraph, build_graph
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConsistencyError",
    "MidLayerGraph",
    "MidlayerError",
    "ParameterError",
    "ResourceLimitError",
    "ValidationError",
    "build_graph",
    "__version__",
]
