"""Centralized numeric tolerance budget.

Every module draws its thresholds from the single record below so that a
tolerance change propagates consistently (algebraic identities vs solver
residuals are the two distinct budgets; the rest are derived conventions).
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = 1e-12        # exact identities: Hermiticity, unitarity
    solver_residual: float = 1e-10  # linear-solve and eigensolver reconstruction
    normalization: float = 1e-10    # |norm^2 - 1| for states treated as normalized
    eigenvalue_clip: float = 1e-12  # density-matrix eigenvalues in [-clip, 0) clip to 0
    zero_identity: float = 1e-15    # channel operators at zero coupling vs identity


DEFAULT = Tolerances()
