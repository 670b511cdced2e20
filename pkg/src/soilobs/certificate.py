"""Independent re-verification of observer certificates.

Nothing here reuses the construction path in :mod:`soilobs.synthesis`; the
residuals are recomputed from ``(A_eff, C, L, P, Q, gamma)`` alone so that a
design loaded from disk can be checked on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

SYMMETRY_TOL = 1e-10
STRICTNESS = 1e-9


def strict_margin(A_eff) -> float:
    """Strictness threshold ``1e-9 * ||A_eff||_F``."""
    return STRICTNESS * float(np.linalg.norm(A_eff, "fro"))


def thau_residual(A_eff, C, L, P, Q) -> np.ndarray:
    Acl = A_eff - L @ C
    R = Acl.T @ P + P @ Acl + Q
    return 0.5 * (R + R.T)


def rh_residual(A_eff, C, L, P, gamma) -> np.ndarray:
    Acl = A_eff - L @ C
    R = Acl.T @ P + P @ Acl + gamma**2 * (P @ P) + np.eye(P.shape[0])
    return 0.5 * (R + R.T)


def thau_gamma_max(P, Q) -> float:
    """``lambda_min(Q) / (2 lambda_max(P))``."""
    return float(np.linalg.eigvalsh(Q)[0] / (2.0 * np.linalg.eigvalsh(P)[-1]))


@dataclass(frozen=True)
class CertificateCheck:
    variant: str
    passed: bool
    residual_max: float
    strict_margin: float
    p_min_eig: float
    symmetry_error: float
    abscissa: float
    gamma: float
    gamma_max: Optional[float] = None

    @property
    def converges(self) -> bool:
        if not self.passed:
            return False
        if self.gamma_max is None:
            return True
        return self.gamma < self.gamma_max


def verify(A_eff, C, L, P, variant: str, gamma: float, Q=None) -> CertificateCheck:
    """Recompute the inequality residual and the side conditions of a design."""
    A_eff, C, L, P = (np.asarray(a, dtype=float) for a in (A_eff, C, L, P))
    eps = strict_margin(A_eff)
    sym = float(np.linalg.norm(P - P.T, "fro") / max(np.linalg.norm(P, "fro"), np.finfo(float).tiny))
    Ps = 0.5 * (P + P.T)
    p_min = float(np.linalg.eigvalsh(Ps)[0])
    abscissa = float(np.max(np.linalg.eigvals(A_eff - L @ C).real))
    gamma_max = None
    if variant == "thau":
        if Q is None:
            raise ValueError("Thau certificate needs Q")
        Q = np.asarray(Q, dtype=float)
        res = thau_residual(A_eff, C, L, Ps, Q)
        gamma_max = thau_gamma_max(Ps, Q)
    elif variant == "rh":
        res = rh_residual(A_eff, C, L, Ps, gamma)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    res_max = float(np.linalg.eigvalsh(res)[-1])
    passed = res_max < -eps and p_min > 0 and sym < SYMMETRY_TOL and abscissa < 0
    return CertificateCheck(
        variant=variant,
        passed=bool(passed),
        residual_max=res_max,
        strict_margin=eps,
        p_min_eig=p_min,
        symmetry_error=sym,
        abscissa=abscissa,
        gamma=float(gamma),
        gamma_max=gamma_max,
    )
