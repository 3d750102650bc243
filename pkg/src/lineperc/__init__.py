"""Bernoulli line percolation on Z^d: sampling, cluster observables, planar
crossing tools, path products, block renormalization and Monte Carlo
estimators."""

from .kernels import BACKEND
from .lattice import (
    BoxRegion,
    Configuration,
    ParamVector,
    PlaneField,
    SeedSpec,
    domination_inequalities,
    materialize,
    prob_box_all_vacant,
    sample_plane_fields,
    vacancy,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoxRegion",
    "Configuration",
    "ParamVector",
    "PlaneField",
    "SeedSpec",
    "domination_inequalities",
    "materialize",
    "prob_box_all_vacant",
    "sample_plane_fields",
    "vacancy",
]
