"""Random-permutation overlay streaming simulator."""

from ._regraph import (  # noqa: F401
    RegraphError,
    dstar,
    hypergeom_pmf,
    layers,
    simulate,
    sweep,
    verify,
)

__all__ = ["RegraphError", "dstar", "hypergeom_pmf", "layers", "simulate", "sweep", "verify"]
