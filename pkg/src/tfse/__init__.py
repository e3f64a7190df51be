"""Linearised L1 finite-difference solver for the 2-D nonlinear time-fractional Schrodinger equation."""

from tfse.caputo import L1Kernel, ThetaKernel, caputo_l1_apply, e_alpha_apply, l1_weights, theta_multipliers, truncation_probe
from tfse.grid import ComplexField, MeshSpec, inner_product, l2_norm, laplacian_5pt, linf_norm, sample, seminorm_h2
from tfse.linsolve import ShiftedLaplacian, solve_dense_reference, solve_dst
from tfse.stepper import History, Nonlinearity, SchrodingerProblem, run, step

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "History",
    "L1Kernel",
    "MeshSpec",
    "Nonlinearity",
    "SchrodingerProblem",
    "ShiftedLaplacian",
    "ThetaKernel",
    "caputo_l1_apply",
    "e_alpha_apply",
    "inner_product",
    "l1_weights",
    "l2_norm",
    "laplacian_5pt",
    "linf_norm",
    "run",
    "sample",
    "seminorm_h2",
    "solve_dense_reference",
    "solve_dst",
    "step",
    "theta_multipliers",
    "truncation_probe",
]
