"""Artificial coupling matrix and Lipschitz certificates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError
from .model import ReactionParams, monod_gradient, psi

DEFAULT_BOX = ((0.0, 1e-4), (0.0, 1e-4), (0.0, 1e-4))


@dataclass(frozen=True)
class CouplingMatrix:
    """Linearised reaction moved into the linear part of the observer.

    ``A_tilde`` holds the Jacobian of the stacked reaction map at the
    operating point, restricted to the nitrate/carbon and carbon/microbe
    blocks.  ``q_oc`` and ``q_mi`` are the (positive) Monod partials that
    populate those diagonal blocks with a minus sign.
    """

    A_tilde: np.ndarray
    operating_point: tuple
    q_oc: float
    q_mi: float
    frobenius_norm: float


@dataclass(frozen=True)
class LipschitzCertificate:
    rho: float
    gamma: float
    search_box: tuple
    resolution: int
    frobenius_norm: float


def build_coupling(sys, params: ReactionParams, operating_point) -> CouplingMatrix:
    op = tuple(float(c) for c in operating_point)
    if len(op) != 3:
        raise DomainError("operating point needs (c_na, c_oc, c_mi)")
    if not all(np.isfinite(c) and c > 0 for c in op):
        raise DomainError(f"operating point must be strictly positive, got {op}")
    _, q_oc, q_mi = (float(g) for g in monod_gradient(*op, params))
    n2 = sys.N**2
    At = np.zeros((sys.n, sys.n))
    idx = np.arange(n2)
    At[idx, n2 + idx] = -q_oc
    At[n2 + idx, 2 * n2 + idx] = -q_mi
    At.setflags(write=False)
    return CouplingMatrix(
        A_tilde=At,
        operating_point=op,
        q_oc=q_oc,
        q_mi=q_mi,
        frobenius_norm=float(np.linalg.norm(At, "fro")),
    )


def _gradient_norm(c, params):
    g = monod_gradient(c[..., 0], c[..., 1], c[..., 2], params)
    return np.sqrt(g[0] ** 2 + g[1] ** 2 + g[2] ** 2)


def _validate_box(box):
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box) != 3:
        raise DomainError("search box needs bounds for c_na, c_oc, c_mi")
    for lo, hi in box:
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise DomainError("search box bounds must be finite")
        if lo < 0 or hi < 0:
            raise DomainError("search box bounds must be nonnegative")
        if hi < lo:
            raise DomainError(f"empty search interval [{lo}, {hi}]")
    return box


def certify_rho(params: ReactionParams, search_box=DEFAULT_BOX, resolution: int = 21) -> float:
    """Largest Euclidean norm of the Monod gradient over a box.

    A ``resolution**3`` grid scan locates the best sample, which is then
    polished by bounded quasi-Newton ascent.  The result never falls below
    the best sample.
    """
    box = _validate_box(search_box)
    if resolution < 2:
        raise DomainError("resolution must be >= 2 per axis")
    if params.r_max == 0:
        return 0.0
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    values = _gradient_norm(grid, params)
    best = int(np.argmax(values))
    rho = float(values[best])
    if rho == 0.0:
        return 0.0

    lo = np.array([b[0] for b in box])
    width = np.array([b[1] - b[0] for b in box])
    free = width > 0
    if free.any():
        def objective(s):
            c = lo.copy()
            c[free] += s * width[free]
            return -float(_gradient_norm(c, params)) / rho

        s0 = (grid[best] - lo)[free] / width[free]
        res = optimize.minimize(objective, s0, method="L-BFGS-B", bounds=[(0.0, 1.0)] * int(free.sum()))
        rho = max(rho, -float(res.fun) * rho)
    return rho


def certify_gamma(rho: float, N: int, coupling: CouplingMatrix) -> float:
    """Global Lipschitz constant ``sqrt(3) * rho * N + ||A_tilde||_F``."""
    if rho < 0:
        raise DomainError("rho must be nonnegative")
    return float(np.sqrt(3.0) * rho * N + coupling.frobenius_norm)


def certify(sys, params, coupling, search_box=DEFAULT_BOX, resolution: int = 21) -> LipschitzCertificate:
    rho = certify_rho(params, search_box, resolution)
    return LipschitzCertificate(
        rho=rho,
        gamma=certify_gamma(rho, sys.N, coupling),
        search_box=_validate_box(search_box),
        resolution=resolution,
        frobenius_norm=coupling.frobenius_norm,
    )


def lumped_nonlinearity(x, u, sys, params, coupling) -> np.ndarray:
    """``Phi(x, u) = A_tilde x + B u + Psi(x)``; ``x`` may hold one state per row."""
    x = np.asarray(x, dtype=float)
    lin = coupling.A_tilde @ x if x.ndim == 1 else x @ coupling.A_tilde.T
    return lin + sys.B @ u + psi(x, sys.layout, params)
