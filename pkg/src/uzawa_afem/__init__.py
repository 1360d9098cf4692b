"""Adaptive Uzawa finite elements for the stationary Stokes problem."""
from .mesh import (
    MeshForest,
    Partition,
    Triangulation,
    close,
    initial_mesh,
    overlay,
    refine_conforming,
)
from .uzawa import AlgorithmConfig, RunLog, run

__all__ = [
    "MeshForest",
    "Partition",
    "Triangulation",
    "close",
    "initial_mesh",
    "overlay",
    "refine_conforming",
    "AlgorithmConfig",
    "RunLog",
    "run",
]
__version__ = "0.1.0"
