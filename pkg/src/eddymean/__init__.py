"""Pseudospectral eddy-mean beta-plane dynamics: solvers, fixed-point construction and bound probes."""

__version__ = "0.1.0"

from .spectral import (
    GridSpec,
    SpectralField2D,
    ZonalSpectral1D,
    derivative,
    dealias_product,
    forward_transform,
    inverse_laplacian,
    inverse_transform,
    laplacian,
    sobolev_norm,
    zonal_average,
)
from .dynamics import SolverParams, State, compute_F, compute_G, full_tendency, model_tendency, split_tendency
from .integrator import IntegratorConfig, Trajectory, simulate, step
from .picard import PicardConfig, continuation_run, picard_iterate
from .diagnostics import DiagnosticsRecord, energy_budget
from .initdata import init_data

__all__ = [
    "GridSpec",
    "SpectralField2D",
    "ZonalSpectral1D",
    "derivative",
    "dealias_product",
    "forward_transform",
    "inverse_laplacian",
    "inverse_transform",
    "laplacian",
    "sobolev_norm",
    "zonal_average",
    "SolverParams",
    "State",
    "compute_F",
    "compute_G",
    "full_tendency",
    "model_tendency",
    "split_tendency",
    "IntegratorConfig",
    "Trajectory",
    "simulate",
    "step",
    "PicardConfig",
    "continuation_run",
    "picard_iterate",
    "DiagnosticsRecord",
    "energy_budget",
    "init_data",
]
