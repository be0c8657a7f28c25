"""Almost complete local revivals (ACLR) in periodic spin-S chains.

Exact-diagonalization toolkit: build the XY chain with in-plane fields,
construct initial states whose edge spin revives at a chosen time, and
analyse them (level statistics, preparation benchmarking, delayed reveal).
"""

from aclr.errors import (
    ACLRError,
    ContractError,
    DegeneracyError,
    DimensionError,
    FitError,
    InvalidSpecError,
    SymmetryError,
)
from aclr.model import ChainSpec, Couplings, build_hamiltonian, spin_matrices
from aclr.evolution import EigenSystem, eigendecompose, evolve, propagator
from aclr.revival import RevivalConstruction, build_revival

__version__ = "0.1.0"

__all__ = [
    "ACLRError",
    "ChainSpec",
    "ContractError",
    "Couplings",
    "DegeneracyError",
    "DimensionError",
    "EigenSystem",
    "FitError",
    "InvalidSpecError",
    "RevivalConstruction",
    "SymmetryError",
    "build_hamiltonian",
    "build_revival",
    "eigendecompose",
    "evolve",
    "propagator",
    "spin_matrices",
]
