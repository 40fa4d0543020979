"""Python bindings for the lsemink solvers."""

from ._core import (
    LseminkError,
    Objective,
    logsumexp,
    make_gp,
    make_synthetic_mlr,
    solve,
)

METHODS = ("lsemink", "ncg", "smnk", "ngd")

__all__ = [
    "LseminkError",
    "METHODS",
    "Objective",
    "logsumexp",
    "make_gp",
    "make_synthetic_mlr",
    "solve",
]
