"""Observability analysis and the observer right-hand side."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericalError
from .model import psi

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class ObservabilityReport:
    """Outcome of a PBH rank test.

    ``numerical_rank_defect`` is the worst column-rank deficiency of
    ``[lambda I - A; C]`` over the tested eigenvalues.  ``detectable`` repeats
    the test restricted to eigenvalues with nonnegative real part.
    ``min_relative_sv`` is the smallest ``sigma_min / sigma_max`` seen, at
    ``worst_eigenvalue``.
    """

    observable: bool
    detectable: bool
    numerical_rank_defect: int
    tolerance: float
    min_relative_sv: float
    worst_eigenvalue: complex


def hautus_check(A_eff, C, tol: float = DEFAULT_RANK_TOL) -> ObservabilityReport:
    A_eff = np.asarray(A_eff, dtype=float)
    C = np.asarray(C, dtype=float)
    n = A_eff.shape[0]
    if A_eff.shape != (n, n) or C.ndim != 2 or C.shape[1] != n:
        raise DomainError(f"inconsistent shapes A {A_eff.shape}, C {C.shape}")
    try:
        eigs = linalg.eigvals(A_eff)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(eigs)):
        raise NumericalError("eigenvalue computation returned non-finite values")

    eye = np.eye(n)
    worst_defect = 0
    unstable_defect = 0
    worst_ratio = np.inf
    worst_eig = complex("nan")
    for lam in eigs:
        s = linalg.svdvals(np.vstack([lam * eye - A_eff, C.astype(complex)]))
        ratio = s[-1] / s[0] if s[0] > 0 else 0.0
        defect = int(n - np.count_nonzero(s > tol * s[0]))
        worst_defect = max(worst_defect, defect)
        if lam.real >= 0:
            unstable_defect = max(unstable_defect, defect)
        if ratio < worst_ratio:
            worst_ratio, worst_eig = float(ratio), complex(lam)
    return ObservabilityReport(
        observable=worst_defect == 0,
        detectable=unstable_defect == 0,
        numerical_rank_defect=worst_defect,
        tolerance=tol,
        min_relative_sv=worst_ratio,
        worst_eigenvalue=worst_eig,
    )


def observer_rhs(xhat, u, y, sys, params, L) -> np.ndarray:
    """``A xhat + B u + Psi(xhat) + L (y - C xhat)``.

    This equals ``(A - A_tilde) xhat + Phi(xhat, u) + L (y - C xhat)``, so
    the coupling matrix drops out of the evaluation.
    """
    xhat = np.asarray(xhat, dtype=float)
    y = np.asarray(y, dtype=float)
    L = np.asarray(L, dtype=float)
    if xhat.shape != (sys.n,):
        raise DomainError(f"observer state must have length {sys.n}")
    if y.shape != (sys.p,):
        raise DomainError(f"measurement must have length {sys.p}, got {y.shape}")
    if L.shape != (sys.n, sys.p):
        raise DomainError(f"gain must be {sys.n}x{sys.p}, got {L.shape}")
    return sys.A @ xhat + sys.B @ np.asarray(u, float) + psi(xhat, sys.layout, params) + L @ (y - sys.C @ xhat)
