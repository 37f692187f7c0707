"""ZeroFPR and forward-backward envelope tools for nonconvex composite minimization."""

from .baselines import afbs_solve, fbs_solve, ifbs_solve
from .directions import BFGS, LBFGS, Broyden, NullDirection, SymmetrizedBFGS, make_engine
from .fbe import GammaManager, ProxGradStep, prox_grad_step
from .kernels import BACKEND
from .problem import NonsmoothOracle, Problem, SmoothOracle, compose_least_squares, moreau_envelope
from .solver import RunTrace, SolverConfig, zerofpr_solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BFGS",
    "Broyden",
    "GammaManager",
    "LBFGS",
    "NonsmoothOracle",
    "NullDirection",
    "Problem",
    "ProxGradStep",
    "RunTrace",
    "SmoothOracle",
    "SolverConfig",
    "SymmetrizedBFGS",
    "afbs_solve",
    "compose_least_squares",
    "fbs_solve",
    "ifbs_solve",
    "make_engine",
    "moreau_envelope",
    "prox_grad_step",
    "zerofpr_solve",
]
