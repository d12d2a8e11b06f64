"""Time-periodic Navier-Stokes flow past a translating body: kernels, solver, far field."""

from ._backend import BACKEND
from .asymptotics import DecayFit, ExpansionReport, fit_decay, remainder
from .core import Params, TPField, build_lattice, lp_norm, transform
from .kernels import (
    mode_velocity_kernel,
    oseen_gamma,
    set_threads,
    tp_kernel_l2t,
    tp_kernel_timeslice,
)
from .solver import ForcingSpec, Solution, picard_solve, sample_forcing
from .verify import CLAIMS, VerificationReport, run_claim

__all__ = [
    "BACKEND",
    "CLAIMS",
    "DecayFit",
    "ExpansionReport",
    "ForcingSpec",
    "Params",
    "Solution",
    "TPField",
    "VerificationReport",
    "build_lattice",
    "fit_decay",
    "lp_norm",
    "mode_velocity_kernel",
    "oseen_gamma",
    "picard_solve",
    "remainder",
    "run_claim",
    "sample_forcing",
    "set_threads",
    "tp_kernel_l2t",
    "tp_kernel_timeslice",
    "transform",
]
