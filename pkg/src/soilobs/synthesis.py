"""Observer gain synthesis: Thau margin test and Raghavan-Hedrick Riccati design.

Both constructions use dense linear algebra only.  A design is returned only
after :func:`soilobs.certificate.verify` has confirmed its inequality on the
final ``(L, P)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .certificate import strict_margin, verify
from .errors import NumericalError, SynthesisError
from .observer import hautus_check
from .riccati import care

THAU = "thau"
RH = "rh"
VARIANTS = (THAU, RH)

#: Weights tried for the Raghavan-Hedrick output-injection term, largest first.
RH_EPS_SCHEDULE = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
#: State weights ``S = alpha I`` of the dual Riccati gain used by the fallback.
RH_ALPHA_SCHEDULE = (1.0, 1e1, 1e2, 1e3, 1e4, 1e-1, 1e-2)


@dataclass(frozen=True)
class ObserverDesign:
    """Observer gain with its Lyapunov certificate.

    ``Q`` and ``gamma_max`` are only set for the Thau variant.  ``margin`` is
    the strictness threshold the residual was checked against and
    ``construction`` records the knobs that produced ``L``.
    """

    variant: str
    L: np.ndarray
    P: np.ndarray
    gamma: float
    residual_max: float
    margin: float
    abscissa: float
    Q: Optional[np.ndarray] = None
    gamma_max: Optional[float] = None
    construction: dict = field(default_factory=dict)

    @property
    def converges(self) -> bool:
        """Whether the certificate guarantees convergence for ``gamma``."""
        if self.gamma_max is None:
            return True
        return self.gamma < self.gamma_max


def _margins(eps):
    base = max(eps, 1e-10)
    return tuple(base * 10.0**k for k in range(1, 8))


def _check_inputs(A_eff, C, check_detectability):
    A_eff = np.asarray(A_eff, dtype=float)
    C = np.asarray(C, dtype=float)
    n = A_eff.shape[0]
    if A_eff.shape != (n, n) or C.ndim != 2 or C.shape[1] != n:
        raise SynthesisError(
            f"inconsistent shapes A_eff {A_eff.shape}, C {C.shape}", {"stage": "input"}
        )
    if check_detectability:
        rep = hautus_check(A_eff, C)
        if not rep.detectable:
            raise SynthesisError(
                "pair (A_eff, C) is not detectable: an unstable mode is invisible to the output",
                {
                    "rank_defect": rep.numerical_rank_defect,
                    "worst_eigenvalue": rep.worst_eigenvalue,
                    "min_relative_sv": rep.min_relative_sv,
                },
            )
    return A_eff, C


def _design_from_check(chk, variant, L, P, Q, construction):
    return ObserverDesign(
        variant=variant,
        L=L,
        P=P,
        Q=Q,
        gamma=chk.gamma,
        gamma_max=chk.gamma_max,
        residual_max=chk.residual_max,
        margin=chk.strict_margin,
        abscissa=chk.abscissa,
        construction=construction,
    )


def stabilizing_gain(A_eff, C, S=None) -> np.ndarray:
    """``L = X C^T`` from the dual Riccati equation ``A X + X A^T - X C^T C X + S = 0``."""
    n = A_eff.shape[0]
    S = np.eye(n) if S is None else np.asarray(S, dtype=float)
    X = care(A_eff.T, C.T @ C, S)
    return X @ C.T


def synthesize_thau(A_eff, C, Q=None, gamma: float = 0.0, *, S=None, check_detectability=True) -> ObserverDesign:
    """Thau observer: stabilising gain plus Lyapunov certificate.

    ``P`` solves ``(A_eff - LC)^T P + P (A_eff - LC) = -(Q + mu I)``, so the
    Thau residual equals ``-mu I`` up to round-off.  ``mu`` starts at ten
    times the strictness threshold and grows while round-off in an
    ill-conditioned ``P`` still hides the margin.  The design records
    ``gamma_max`` and whether ``gamma < gamma_max``; a failed margin test is
    reported, not raised.
    """
    A_eff, C = _check_inputs(A_eff, C, check_detectability)
    n = A_eff.shape[0]
    Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
    if Q.shape != (n, n) or np.linalg.eigvalsh(0.5 * (Q + Q.T))[0] <= 0:
        raise SynthesisError("Q must be symmetric positive definite", {"stage": "input"})
    if gamma < 0:
        raise SynthesisError("gamma must be nonnegative", {"stage": "input"})
    try:
        L = stabilizing_gain(A_eff, C, S)
    except NumericalError as exc:
        raise SynthesisError(f"dual Riccati equation failed: {exc}", {"stage": "care"}) from exc
    Acl = A_eff - L @ C
    eps = strict_margin(A_eff)
    for mu in _margins(eps):
        P = linalg.solve_continuous_lyapunov(Acl.T, -(Q + mu * np.eye(n)))
        P = 0.5 * (P + P.T)
        chk = verify(A_eff, C, L, P, THAU, gamma, Q)
        if chk.passed:
            break
    else:
        raise SynthesisError(
            "Thau certificate did not verify",
            {
                "residual_max": chk.residual_max,
                "margin": chk.strict_margin,
                "p_min_eig": chk.p_min_eig,
                "abscissa": chk.abscissa,
                "cond_P": float(np.linalg.cond(P)),
            },
        )
    return _design_from_check(chk, THAU, L, P, Q, {"mu": mu})


def _rh_weighted(A_eff, C, gamma, eps_schedule, mu, attempts):
    n = A_eff.shape[0]
    eye = np.eye(n)
    H = (gamma**2 + mu) * eye
    CtC = C.T @ C
    best = None
    for eps in eps_schedule:
        G = CtC / eps - (1.0 + mu) * eye
        try:
            Y = care(A_eff.T, G, H)
        except NumericalError as exc:
            attempts.append({"eps": eps, "failure": str(exc)})
            continue
        y_min = float(np.linalg.eigvalsh(Y)[0])
        if y_min <= 0:
            attempts.append({"eps": eps, "failure": f"Y not positive definite (min eig {y_min:.3e})"})
            continue
        P = np.linalg.inv(Y)
        P = 0.5 * (P + P.T)
        L = Y @ C.T / (2.0 * eps)
        chk = verify(A_eff, C, L, P, RH, gamma)
        attempts.append({"eps": eps, "residual_max": chk.residual_max, "passed": chk.passed})
        if chk.passed:
            best = _design_from_check(chk, RH, L, P, None, {"method": "weighted", "eps": eps, "mu": mu})
    return best


def _rh_bounded_real(A_eff, C, gamma, alpha_schedule, mu, attempts):
    n = A_eff.shape[0]
    eye = np.eye(n)
    for alpha in alpha_schedule:
        try:
            L = stabilizing_gain(A_eff, C, alpha * eye)
            P = care(A_eff - L @ C, -(gamma**2) * eye, (1.0 + mu) * eye)
        except NumericalError as exc:
            attempts.append({"alpha": alpha, "failure": str(exc)})
            continue
        chk = verify(A_eff, C, L, P, RH, gamma)
        attempts.append({"alpha": alpha, "residual_max": chk.residual_max, "passed": chk.passed})
        if chk.passed:
            return _design_from_check(chk, RH, L, P, None, {"method": "bounded-real", "alpha": alpha, "mu": mu})
    return None


def synthesize_rh(
    A_eff, C, gamma: float, *, eps_schedule=RH_EPS_SCHEDULE, alpha_schedule=RH_ALPHA_SCHEDULE,
    check_detectability=True,
) -> ObserverDesign:
    """Raghavan-Hedrick observer for a Lipschitz bound ``gamma``.

    For each weight ``eps`` the Riccati equation

        A Y + Y A^T + Y (I - C^T C / eps) Y + gamma^2 I = -mu (Y Y + I)

    is solved for ``Y``.  If ``Y`` is positive definite, ``P = Y^{-1}`` and
    ``L = Y C^T / (2 eps)`` satisfy the Raghavan-Hedrick inequality with
    residual ``-mu (I + P P)``.  The certified design with the smallest
    ``eps`` (largest gain) is returned.

    If no weight yields a positive definite ``Y``, the gain is taken from
    the dual Riccati equation with state weight ``alpha I`` and ``P`` from
    the bounded-real equation ``A_cl^T P + P A_cl + gamma^2 P P + (1 + mu) I
    = 0``, which has a positive definite solution whenever
    ``gamma ||(sI - A_cl)^{-1}||_inf < 1``.
    """
    A_eff, C = _check_inputs(A_eff, C, check_detectability)
    if gamma < 0:
        raise SynthesisError("gamma must be nonnegative", {"stage": "input"})
    mu = max(10.0 * strict_margin(A_eff), 1e-9)
    attempts = []
    best = _rh_weighted(A_eff, C, gamma, eps_schedule, mu, attempts)
    if best is None:
        best = _rh_bounded_real(A_eff, C, gamma, alpha_schedule, mu, attempts)
    if best is None:
        residuals = [a["residual_max"] for a in attempts if "residual_max" in a]
        raise SynthesisError(
            "no Raghavan-Hedrick certificate found within the search budget",
            {
                "best_residual": min(residuals) if residuals else None,
                "margin": strict_margin(A_eff),
                "attempts": attempts,
            },
        )
    return best


def synthesize(variant: str, A_eff, C, gamma: float, Q=None, **kwargs) -> ObserverDesign:
    if variant == THAU:
        return synthesize_thau(A_eff, C, Q, gamma, **kwargs)
    if variant == RH:
        return synthesize_rh(A_eff, C, gamma, **kwargs)
    raise SynthesisError(f"unknown variant {variant!r}", {"stage": "input"})
