"""Continuous algebraic Riccati equation via the ordered Hamiltonian Schur form."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericalError


def care(A, G, H) -> np.ndarray:
    """Stabilising solution of ``A^T X + X A - X G X + H = 0``.

    ``G`` and ``H`` must be symmetric.  The stable invariant subspace of the
    Hamiltonian ``[[A, -G], [-H, -A^T]]`` is isolated with a real Schur form
    sorted to the open left half-plane; ``X = U21 U11^{-1}``.

    Raises
    ------
    NumericalError
        If the Hamiltonian has eigenvalues on (or numerically near) the
        imaginary axis, or ``U11`` is singular.
    """
    A = np.asarray(A, dtype=float)
    G = np.asarray(G, dtype=float)
    H = np.asarray(H, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or G.shape != (n, n) or H.shape != (n, n):
        raise DomainError("care needs square matrices of equal size")
    for name, S in (("G", G), ("H", H)):
        if not np.allclose(S, S.T, rtol=1e-12, atol=0):
            raise DomainError(f"{name} must be symmetric")
    ham = np.block([[A, -G], [-H, -A.T]])
    if not np.all(np.isfinite(ham)):
        raise DomainError("non-finite entries in Riccati data")
    _, U, sdim = linalg.schur(ham, output="real", sort="lhp")
    if sdim != n:
        raise NumericalError(f"Hamiltonian has {sdim} stable eigenvalues, expected {n}")
    U11, U21 = U[:n, :n], U[n:, :n]
    if np.linalg.cond(U11) > 1.0 / np.finfo(float).eps:
        raise NumericalError("stable subspace is not a graph (U11 singular)")
    X = linalg.solve(U11.T, U21.T).T
    return 0.5 * (X + X.T)


def care_residual(A, G, H, X) -> np.ndarray:
    return A.T @ X + X @ A - X @ G @ X + H
