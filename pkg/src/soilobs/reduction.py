"""Reduced nitrate-only model with the reaction replaced by a decaying disturbance.

The reaction at each point is approximated for small concentrations by
``r_max / (K_na K_oc) * c_na c_oc c_mi``.  If each concentration decays like
``c0 * exp(-lambda t)`` the approximated reaction is ``C_d x_d(t)`` with
``x_d' = A_d x_d``, ``x_d(0) = 1`` and ``A_d = -(lambda_na + lambda_oc +
lambda_mi)``.  The reaction consumes nitrate, so it enters the nitrate rows
as ``-C_d x_d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import GridSpec, selection_matrix, transport_matrices
from .model import ReactionParams


@dataclass(frozen=True)
class ReducedSystem:
    """Augmented system on ``(C_na, Cbar_na, x_d)``.

    ``C_d`` is the nonnegative disturbance column (sensor rows zero); the
    nitrate rows of ``A_aug`` carry ``-C_d``.
    """

    A_aug: np.ndarray
    B_aug: np.ndarray
    C_aug: np.ndarray
    C_d: np.ndarray
    A_d: float
    initial_products: np.ndarray
    N: int
    p: int
    tau_na: float

    # generic system interface used by the simulator and the CLI
    @property
    def A(self):
        return self.A_aug

    @property
    def B(self):
        return self.B_aug

    @property
    def C(self):
        return self.C_aug

    @property
    def n(self) -> int:
        return self.A_aug.shape[0]

    @property
    def m(self) -> int:
        return self.B_aug.shape[1]

    @property
    def disturbance_index(self) -> int:
        return self.n - 1

    def disturbance(self, t):
        """Approximated reaction field ``C_d exp(A_d t)`` (column per time)."""
        t = np.asarray(t, dtype=float)
        return np.multiply.outer(self.C_d, np.exp(self.A_d * t))


def _decay_rate(lambdas) -> float:
    lam = tuple(float(v) for v in lambdas)
    if len(lam) != 3:
        raise DomainError("need (lambda_na, lambda_oc, lambda_mi)")
    if not all(np.isfinite(v) for v in lam):
        raise DomainError("decay rates must be finite")
    total = sum(lam)
    if total <= 0:
        raise DomainError(f"decay-rate sum must be positive, got {total}")
    if any(v <= 0 for v in lam):
        raise DomainError(f"every decay rate must be positive, got {lam}")
    return -total


def disturbance_from_products(params: ReactionParams, products, N: int, p: int, lambdas):
    """``(C_d, A_d)`` from per-point products ``c0_na * c0_oc * c0_mi``.

    ``products`` is a scalar (uniform field) or an array of length ``N^2``
    in block order.
    """
    prod = np.asarray(products, dtype=float)
    prod = np.full(N * N, float(prod)) if prod.ndim == 0 else prod.ravel()
    if prod.shape != (N * N,):
        raise DomainError(f"need {N * N} products, got {prod.size}")
    if np.any(prod < 0) or not np.all(np.isfinite(prod)):
        raise DomainError("initial products must be finite and nonnegative")
    A_d = _decay_rate(lambdas)
    scale = params.r_max / (params.K_na * params.K_oc)
    return np.concatenate([scale * prod, np.zeros(p)]), A_d


def approximate_disturbance(params: ReactionParams, lambdas, initial_fields, N: int, p: int):
    """``(C_d, A_d, products)`` from initial nitrate, carbon and microbe fields.

    Each field is a scalar or an ``(N, N)`` array indexed ``[j-1, k-1]``.
    """
    fields = []
    for name, f in zip(("nitrate", "carbon", "microbe"), initial_fields):
        a = np.asarray(f, dtype=float)
        if a.ndim == 0:
            a = np.full((N, N), float(a))
        if a.shape != (N, N):
            raise DomainError(f"initial {name} field must be scalar or {N}x{N}")
        if np.any(a < 0):
            raise DomainError(f"initial {name} field must be nonnegative")
        fields.append(a.ravel())
    if len(fields) != 3:
        raise DomainError("need nitrate, carbon and microbe initial fields")
    products = fields[0] * fields[1] * fields[2]
    C_d, A_d = disturbance_from_products(params, products, N, p, lambdas)
    return C_d, A_d, products


def assemble_reduced(grid: GridSpec, tau_na: float, C_d, A_d: float, initial_products=None) -> ReducedSystem:
    """Nitrate transport block, sensor lag and disturbance state in one system."""
    if not (np.isfinite(tau_na) and tau_na > 0):
        raise DomainError(f"sensor time constant must be positive, got {tau_na!r}")
    N, p = grid.N, grid.p
    n2 = N * N
    C_d = np.array(C_d, dtype=float).ravel()
    if C_d.shape != (n2 + p,):
        raise DomainError(f"C_d must have length {n2 + p}, got {C_d.size}")
    if np.any(C_d[n2:] != 0):
        raise DomainError("sensor rows of C_d must be zero")
    if not (np.isfinite(A_d) and A_d < 0):
        raise DomainError(f"A_d must be negative, got {A_d!r}")
    T, BT = transport_matrices(grid)
    M = selection_matrix(grid)
    n = n2 + p + 1
    A = np.zeros((n, n))
    A[:n2, :n2] = T
    A[n2:n2 + p, :n2] = M / tau_na
    A[n2:n2 + p, n2:n2 + p] = -np.eye(p) / tau_na
    A[:n2 + p, -1] = -C_d
    A[-1, -1] = A_d
    B = np.zeros((n, N))
    B[:n2] = BT
    C = np.zeros((p, n))
    C[:, n2:n2 + p] = np.eye(p)
    if initial_products is None:
        initial_products = np.full(n2, np.nan)
    prods = np.array(initial_products, dtype=float).ravel()
    for arr in (A, B, C, C_d, prods):
        arr.setflags(write=False)
    return ReducedSystem(
        A_aug=A, B_aug=B, C_aug=C, C_d=C_d, A_d=float(A_d),
        initial_products=prods, N=N, p=p, tau_na=float(tau_na),
    )

