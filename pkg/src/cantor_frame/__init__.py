"""Frame operators of Bernoulli cylinder indicators on the Cantor set.

Finite operators K_m, compressions of their norm limit K_inf in a weighted
Haar basis, the self-similar fixed-point map, moments of the rooted spectral
measure, and the secular equation for the top eigenvalue.
"""
from .errors import BracketFailure, CantorFrameError, CertificationError, NonConvergence, SizeLimitError
from .haar import ROOT, BasisIndex, HaarFrame, atom_change_of_basis, indicator_to_haar
from .moments import (MomentSequence, moments_closed, moments_operator_oracle, moments_recursive,
                      renormalization_residual)
from .operators import (EigenvalueGroup, Provenance, SymMatrix, assemble_kinf_truncated,
                        assemble_km_closed, assemble_km_filtration, assemble_km_gram_oracle,
                        compression_2x2, schatten_symmetric_closed, symmetric_closed_spectrum,
                        truncation_error_bound)
from .secular import SecularSolve, secular_value, simplicity_report, solve_top_eigenvalue
from .selfsim import (BranchMap, block_form_residual, branch_isometry, cuntz_check,
                      neumann_partial_sum, phi_apply, psi_apply)
from .series import LaurentTail
from .spectral import (RootedMeasure, SpectralData, eigh, resolvent_value, rooted_spectral_measure,
                       schatten_partial_sum)
from .words import BranchWeights, Word, mass, relation

__version__ = "0.1.0"

__all__ = [
    "BasisIndex",
    "BracketFailure",
    "BranchMap",
    "BranchWeights",
    "CantorFrameError",
    "CertificationError",
    "EigenvalueGroup",
    "HaarFrame",
    "LaurentTail",
    "MomentSequence",
    "NonConvergence",
    "Provenance",
    "ROOT",
    "RootedMeasure",
    "SecularSolve",
    "SizeLimitError",
    "SpectralData",
    "SymMatrix",
    "Word",
    "assemble_kinf_truncated",
    "assemble_km_closed",
    "assemble_km_filtration",
    "assemble_km_gram_oracle",
    "atom_change_of_basis",
    "block_form_residual",
    "branch_isometry",
    "compression_2x2",
    "cuntz_check",
    "eigh",
    "indicator_to_haar",
    "mass",
    "moments_closed",
    "moments_operator_oracle",
    "moments_recursive",
    "neumann_partial_sum",
    "phi_apply",
    "psi_apply",
    "relation",
    "renormalization_residual",
    "resolvent_value",
    "rooted_spectral_measure",
    "schatten_partial_sum",
    "schatten_symmetric_closed",
    "secular_value",
    "simplicity_report",
    "solve_top_eigenvalue",
    "symmetric_closed_spectrum",
    "truncation_error_bound",
]
