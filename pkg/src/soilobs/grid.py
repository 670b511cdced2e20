"""Spatial grid, boundary folding and assembly of the linear plant.

Interior points carry 1-based coordinates ``(j, k)`` with ``j`` the column
(x direction, periodic) and ``k`` the row counted from the surface: row
``k = 0`` is the upper boundary (an input), row ``k = N + 1`` the lower
boundary (replicated from row ``N``).  Inside each substance block the point
``(j, k)`` lives at 0-based offset ``(j - 1) * N + k - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

SUBSTANCES = ("na", "oc", "mi")

#: Stencil neighbour offsets ``(dj, dk)``.
CENTER, EAST, WEST, SOUTH, NORTH = (0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)


def _field(value, N, name):
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full((N, N), float(arr))
    if arr.shape != (N, N):
        raise DomainError(f"{name} must be a scalar or a {N}x{N} array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def layered_velocity(N: int, upper: float, lower: float) -> np.ndarray:
    """Velocity field that is ``upper`` in rows ``k < N/2`` and ``lower`` below.

    Returned as an ``(N, N)`` array indexed ``[j - 1, k - 1]``.
    """
    k = np.arange(1, N + 1)
    row = np.where(k < N / 2, upper, lower).astype(float)
    return np.tile(row, (N, 1))


def equidistant_top_sensors(N: int, p: int = 3) -> tuple:
    """``p`` sensors spread evenly along the uppermost interior row."""
    if p < 1 or p > N:
        raise DomainError("need 1 <= p <= N")
    if p == 1:
        return ((1, 1),)
    cols = np.rint(np.linspace(1, N, p)).astype(int)
    return tuple((int(j), 1) for j in cols)


@dataclass(frozen=True)
class GridSpec:
    """Geometry, transport coefficients and sensor placement.

    Parameters
    ----------
    N : int
        Interior points per direction.
    spacing : float
        Grid spacing Δ in cm.
    vx, vy : float or (N, N) array
        Velocities in cm/s at every interior point, indexed ``[j-1, k-1]``.
    diffusivity : float
        Molecular diffusivity Γ in cm²/s.
    sensors : sequence of (j, k)
        1-based interior coordinates of the nitrate sensors.
    y_axis : {"down", "up"}
        Orientation of ``vy`` relative to the row index.  ``"down"`` treats
        ``vy`` as the velocity along increasing ``k`` (the finite-difference
        formula taken literally).  ``"up"`` means ``vy`` is measured along
        the physical upward axis while ``k`` grows with depth, so the
        velocity along ``k`` is ``-vy``.
    """

    N: int
    spacing: float
    vx: np.ndarray
    vy: np.ndarray
    diffusivity: float
    sensors: tuple
    y_axis: str = "down"

    def __post_init__(self):
        N = self.N
        if not isinstance(N, (int, np.integer)) or N < 2:
            raise DomainError(f"N must be an integer >= 2, got {N!r}")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise DomainError(f"grid spacing must be positive, got {self.spacing!r}")
        if not (np.isfinite(self.diffusivity) and self.diffusivity > 0):
            raise DomainError(f"diffusivity must be positive, got {self.diffusivity!r}")
        if self.y_axis not in ("down", "up"):
            raise DomainError(f"y_axis must be 'down' or 'up', got {self.y_axis!r}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "vx", _field(self.vx, N, "vx"))
        object.__setattr__(self, "vy", _field(self.vy, N, "vy"))
        sensors = tuple((int(j), int(k)) for j, k in self.sensors)
        if not sensors:
            raise DomainError("at least one sensor is required")
        for j, k in sensors:
            if not (1 <= j <= N and 1 <= k <= N):
                raise DomainError(f"sensor ({j}, {k}) outside the interior 1..{N}")
        if len(set(sensors)) != len(sensors):
            raise DomainError("sensor positions must be distinct")
        object.__setattr__(self, "sensors", sensors)

    @property
    def p(self) -> int:
        return len(self.sensors)

    @property
    def n(self) -> int:
        return 3 * self.N**2 + self.p

    @property
    def m(self) -> int:
        return 3 * self.N

    def index(self, j: int, k: int) -> int:
        """0-based offset of interior point ``(j, k)`` within a substance block."""
        if not (1 <= j <= self.N and 1 <= k <= self.N):
            raise DomainError(f"({j}, {k}) is not an interior point of a {self.N}x{self.N} grid")
        return (j - 1) * self.N + k - 1

    def along_k_velocity(self, j: int, k: int) -> float:
        v = float(self.vy[j - 1, k - 1])
        return -v if self.y_axis == "up" else v


@dataclass(frozen=True)
class StateLayout:
    """Index map of the stacked state ``(C_na, C_oc, C_mi, Cbar_na)``."""

    N: int
    p: int

    @property
    def n(self) -> int:
        return 3 * self.N**2 + self.p

    def block(self, substance: str) -> slice:
        if substance == "sensor":
            start = 3 * self.N**2
            return slice(start, start + self.p)
        b = SUBSTANCES.index(substance)
        n2 = self.N**2
        return slice(b * n2, (b + 1) * n2)

    def index(self, substance: str, j: int, k: int) -> int:
        if not (1 <= j <= self.N and 1 <= k <= self.N):
            raise DomainError(f"({j}, {k}) is not an interior point")
        return self.block(substance).start + (j - 1) * self.N + k - 1

    def stack(self, c_na, c_oc, c_mi, sensor) -> np.ndarray:
        parts = []
        for c, size in ((c_na, self.N**2), (c_oc, self.N**2), (c_mi, self.N**2), (sensor, self.p)):
            a = np.asarray(c, float)
            a = np.full(size, float(a)) if a.ndim == 0 else a.ravel()
            if a.shape != (size,):
                raise DomainError(f"block has length {a.size}, expected {size}")
            parts.append(a)
        return np.concatenate(parts)

    def unstack(self, x):
        x = np.asarray(x, float)
        if x.shape != (self.n,):
            raise DomainError(f"state must have length {self.n}, got {x.shape}")
        return tuple(x[self.block(s)] for s in (*SUBSTANCES, "sensor"))


@dataclass(frozen=True)
class LinearSystem:
    """Semi-discretised plant ``x' = A x + B u + Psi(x)``, ``y = C x``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    M: np.ndarray
    tau_na: float
    layout: StateLayout = field(repr=False)

    @property
    def N(self) -> int:
        return self.layout.N

    @property
    def p(self) -> int:
        return self.layout.p

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


def transport_stencil(j: int, k: int, spec: GridSpec) -> dict:
    """Five-point advection-diffusion coefficients at interior point ``(j, k)``.

    Diffusion uses the standard 5-point Laplacian; advection uses backward
    differences in both index directions, whatever the sign of the velocity.
    No boundary folding is applied here.

    Returns
    -------
    dict
        ``{(dj, dk): coefficient}`` for the centre and its four neighbours.
    """
    N = spec.N
    if not (1 <= j <= N and 1 <= k <= N):
        raise DomainError(f"({j}, {k}) is not an interior point of a {N}x{N} grid")
    d = spec.diffusivity / spec.spacing**2
    ax = spec.vx[j - 1, k - 1] / spec.spacing
    ak = spec.along_k_velocity(j, k) / spec.spacing
    return {
        CENTER: -4.0 * d - ax - ak,
        EAST: d,
        WEST: d + ax,
        SOUTH: d,
        NORTH: d + ak,
    }


def transport_matrices(spec: GridSpec):
    """Transport block ``T`` (N²×N²) and boundary-input block ``B_T`` (N²×N).

    Folding: columns are periodic, the row below ``k = N`` replicates row
    ``N``, and the row above ``k = 1`` is the input vector.
    """
    N = spec.N
    n2 = N * N
    T = np.zeros((n2, n2))
    BT = np.zeros((n2, N))
    for j in range(1, N + 1):
        for k in range(1, N + 1):
            row = (j - 1) * N + k - 1
            for (dj, dk), coef in transport_stencil(j, k, spec).items():
                jj, kk = j + dj, k + dk
                if jj == 0:
                    jj = N
                elif jj == N + 1:
                    jj = 1
                if kk == N + 1:
                    kk = N
                if kk == 0:
                    BT[row, jj - 1] += coef
                else:
                    T[row, (jj - 1) * N + kk - 1] += coef
    return T, BT


def selection_matrix(spec: GridSpec) -> np.ndarray:
    M = np.zeros((spec.p, spec.N**2))
    for r, (j, k) in enumerate(spec.sensors):
        M[r, spec.index(j, k)] = 1.0
    return M


def assemble(spec: GridSpec, tau_na: float) -> LinearSystem:
    """Assemble ``A``, ``B``, ``C`` and ``M`` of the semi-discretised plant.

    The three substances share the transport block; the sensor rows append
    the first-order lag ``(M C_na - Cbar_na) / tau_na``.
    """
    if not (np.isfinite(tau_na) and tau_na > 0):
        raise DomainError(f"sensor time constant must be positive, got {tau_na!r}")
    N, p = spec.N, spec.p
    n2 = N * N
    n, m = 3 * n2 + p, 3 * N
    T, BT = transport_matrices(spec)
    M = selection_matrix(spec)

    A = np.zeros((n, n))
    B = np.zeros((n, m))
    for b in range(3):
        A[b * n2:(b + 1) * n2, b * n2:(b + 1) * n2] = T
        B[b * n2:(b + 1) * n2, b * N:(b + 1) * N] = BT
    A[3 * n2:, :n2] = M / tau_na
    A[3 * n2:, 3 * n2:] = -np.eye(p) / tau_na
    C = np.zeros((p, n))
    C[:, 3 * n2:] = np.eye(p)

    for arr in (A, B, C, M):
        arr.setflags(write=False)
    return LinearSystem(A=A, B=B, C=C, M=M, tau_na=float(tau_na), layout=StateLayout(N, p))
