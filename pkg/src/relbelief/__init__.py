"""Relative belief inference with Monte Carlo bias assessment."""

from .core import DomainError, RandomSource
from .engine import (
    DiscreteBeliefs,
    Grid,
    Region,
    build_grid,
    credible_region,
    implausible_region,
    plausible_region,
    rb_estimate,
    relative_belief,
)
from .mc import MCEstimate

__all__ = [
    "DiscreteBeliefs",
    "DomainError",
    "Grid",
    "MCEstimate",
    "RandomSource",
    "Region",
    "build_grid",
    "credible_region",
    "implausible_region",
    "plausible_region",
    "rb_estimate",
    "relative_belief",
]
