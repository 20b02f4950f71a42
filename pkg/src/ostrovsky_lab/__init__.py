"""Numerical laboratory for the vanishing viscosity-dispersion limit of the
Ostrovsky equation on a periodic domain."""
from .errors import (BlowUp, ConfigError, DegenerateBound, IncompatibleWindows, InsufficientSampling,
                     InvalidGrid, InvalidProfile, MissingData, NonZeroMean, OstrovskyError, UnderResolved)
from .spectral import Field, Grid, make_grid
from .nonlocal_terms import InitialData, compute_F, compute_P, make_initial_data
from .regularized import Coupling, RegParams, State, Trajectory, simulate, step
from .limit import EntropyPair, entropy_residual, fv_simulate, tol_entropy
from .estimates import AuditReport, QuarticBound, audit_limit, audit_regularized, quartic_root
from .convergence import ConvergenceTable, SweepConfig, Window, compare_trajectories, run_sweep

__all__ = [
    "BlowUp", "ConfigError", "DegenerateBound", "IncompatibleWindows", "InsufficientSampling",
    "InvalidGrid", "InvalidProfile", "MissingData", "NonZeroMean", "OstrovskyError", "UnderResolved",
    "Field", "Grid", "make_grid", "InitialData", "compute_F", "compute_P", "make_initial_data",
    "Coupling", "RegParams", "State", "Trajectory", "simulate", "step",
    "EntropyPair", "entropy_residual", "fv_simulate", "tol_entropy",
    "AuditReport", "QuarticBound", "audit_limit", "audit_regularized", "quartic_root",
    "ConvergenceTable", "SweepConfig", "Window", "compare_trajectories", "run_sweep",
]
