"""Unsplittable transshipments: exact rounding of fractional flows, rounds, checks."""

from .graph import Arc, Instance, PathFlow, UnsplittableSolution, decompose, validate_instance
from .solver import (
    solve_auto,
    solve_dgg_ssuf,
    solve_lower_bound,
    solve_modified_dgg,
    solve_reversed,
)

__all__ = [
    "Arc",
    "Instance",
    "PathFlow",
    "UnsplittableSolution",
    "decompose",
    "validate_instance",
    "solve_auto",
    "solve_dgg_ssuf",
    "solve_lower_bound",
    "solve_modified_dgg",
    "solve_reversed",
]
