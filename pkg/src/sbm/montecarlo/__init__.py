"""Monte Carlo simulation of killed subordinate Brownian motions."""

from ._accel import backend_name, numba_enabled
from .core import (
    ANYWHERE,
    ExitTarget,
    McEstimate,
    PathParams,
    PathRun,
    exit_into_domain_mc,
    extrapolate_dt,
    green_mc,
    green_mc_multi,
    harmonic_mc,
    sample_subordinator_increment,
    simulate,
    step_position,
    target_radius,
)

__all__ = [
    "ANYWHERE", "ExitTarget", "McEstimate", "PathParams", "PathRun", "backend_name", "exit_into_domain_mc",
    "extrapolate_dt", "green_mc", "green_mc_multi", "harmonic_mc", "numba_enabled",
    "sample_subordinator_increment", "simulate", "step_position", "target_radius",
]
