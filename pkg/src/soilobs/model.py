"""Monod reaction kinetics and the nonlinear plant right-hand side."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError


class NegativeConcentrationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ReactionParams:
    """Monod constants: ``r_max`` in 1/s, half-velocity constants in mol/kgw."""

    r_max: float
    K_na: float
    K_oc: float

    def __post_init__(self):
        if not (np.isfinite(self.r_max) and self.r_max >= 0):
            raise DomainError(f"r_max must be >= 0, got {self.r_max!r}")
        for name in ("K_na", "K_oc"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")


def _check_poles(c_na, c_oc, params):
    if np.any(np.asarray(c_na) == -params.K_na) or np.any(np.asarray(c_oc) == -params.K_oc):
        raise SingularityError("Monod factor is singular at c = -K")


def monod_rate(c_na, c_oc, c_mi, params: ReactionParams, *, warn_negative=True):
    """Reaction rate ``r_max * c_na/(K_na+c_na) * c_oc/(K_oc+c_oc) * c_mi``.

    Works elementwise on arrays.  Negative concentrations are evaluated as
    given but trigger a :class:`NegativeConcentrationWarning`.
    """
    c_na, c_oc, c_mi = (np.asarray(c, dtype=float) for c in (c_na, c_oc, c_mi))
    _check_poles(c_na, c_oc, params)
    if warn_negative and (np.any(c_na < 0) or np.any(c_oc < 0) or np.any(c_mi < 0)):
        warnings.warn("negative concentration passed to monod_rate", NegativeConcentrationWarning, stacklevel=2)
    rate = params.r_max * c_na / (params.K_na + c_na) * c_oc / (params.K_oc + c_oc) * c_mi
    return rate[()] if rate.ndim == 0 else rate


def monod_gradient(c_na, c_oc, c_mi, params: ReactionParams):
    """Partial derivatives of :func:`monod_rate` w.r.t. ``(c_na, c_oc, c_mi)``."""
    c_na, c_oc, c_mi = (np.asarray(c, dtype=float) for c in (c_na, c_oc, c_mi))
    _check_poles(c_na, c_oc, params)
    f_na = c_na / (params.K_na + c_na)
    f_oc = c_oc / (params.K_oc + c_oc)
    df_na = params.K_na / (params.K_na + c_na) ** 2
    df_oc = params.K_oc / (params.K_oc + c_oc) ** 2
    r = params.r_max
    return r * df_na * f_oc * c_mi, r * f_na * df_oc * c_mi, r * f_na * f_oc


def psi(x, layout, params: ReactionParams) -> np.ndarray:
    """Stacked reaction map ``(-R, -R, -R, 0)``.

    ``x`` may also be a 2-D array with one state per row; the reaction is
    then evaluated for every row at once.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != layout.n:
        raise DomainError(f"state must have length {layout.n}, got {x.shape[-1]}")
    n2 = layout.N**2
    c_na, c_oc, c_mi = x[..., :n2], x[..., n2:2 * n2], x[..., 2 * n2:3 * n2]
    R = monod_rate(c_na, c_oc, c_mi, params, warn_negative=False)
    out = np.zeros_like(x)
    out[..., :n2] = -R
    out[..., n2:2 * n2] = -R
    out[..., 2 * n2:3 * n2] = -R
    return out


def plant_rhs(x, u, sys, params: ReactionParams) -> np.ndarray:
    """``A x + B u + Psi(x)`` for the full nonlinear plant."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (sys.n,):
        raise DomainError(f"state must have length {sys.n}, got {x.shape}")
    if u.shape != (sys.m,):
        raise DomainError(f"input must have length {sys.m}, got {u.shape}")
    return sys.A @ x + sys.B @ u + psi(x, sys.layout, params)
