"""Exact diagonalization of a qubit coupled to a squeezed mechanical mode.

Quick start::

    from hybridspt import runs
    row = runs.evaluate_point(runs.PointSpec(gtilde_c=0.5, Omega_over_omega_s=1e3))
    row["g2"], row["g2_oracle"]
"""
from .errors import (
    ConfigError, ConvergenceFailure, DispersiveRegimeError, HybridSptError, IncompleteInput,
    InvalidDimension, InvalidOrder, MechanicalInstability, NotHermitian, PhaseDomainError,
    ResonanceError, ShapeError, SymmetryError, UndefinedCorrelation,
)
from .hilbert import HilbertSpace, SparseOperator
from .model import ModelParams, SqueezedFrame, derive_squeezed_frame, critical_coupling
from .spectra import SpectrumResult, diagonalize, converge_truncation

__version__ = "0.1.0"
