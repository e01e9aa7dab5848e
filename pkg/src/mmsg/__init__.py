"""Mixed membership estimation for sub-Gaussian mixtures.

The main entry points are `synthesize` (draw data), `spg` (estimate
memberships), `aligned_l1_error` (score them) and `diagnostics` (theory
parameters of an instance).
"""
from .diagnostics import DiagnosticsReport, check_conditions, diagnostics
from .errors import (CellFailure, DataError, InvalidConfig, MMSGError, NumericalError, ParseError,
                     RankDeficient, SchemaMismatch, SingularVertexMatrix)
from .estimators import EstimationResult, HardClustering, hollow_gram, oracle_memberships, spa, spg, wsc
from .linalg import min_cost_permutation, top_k_eig_sym
from .metrics import MixingStats, aligned_l1_error, max_row_l1_error, mixing_stats
from .model import ModelInstance, NoiseScenario, synthesize

__version__ = "0.1.0"

__all__ = [
    "CellFailure", "DataError", "DiagnosticsReport", "EstimationResult", "HardClustering", "InvalidConfig",
    "MMSGError", "MixingStats", "ModelInstance", "NoiseScenario", "NumericalError", "ParseError",
    "RankDeficient", "SchemaMismatch", "SingularVertexMatrix", "aligned_l1_error", "check_conditions",
    "diagnostics", "hollow_gram", "max_row_l1_error", "min_cost_permutation", "mixing_stats",
    "oracle_memberships", "spa", "spg", "synthesize", "top_k_eig_sym", "wsc",
]
