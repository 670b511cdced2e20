"""Fixed-step RK4 integration of a plant together with its observer."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergenceError, DomainError
from .model import ReactionParams, psi
from .reduction import ReducedSystem

DEFAULT_DT = 0.01
DEFAULT_STRIDE = 100


@dataclass(frozen=True)
class SimConfig:
    """Horizon, step, initial states and the constant input vector.

    ``x0``, ``xhat0`` and ``u`` are validated against a system in
    :func:`integrate`.  Samples are stored every ``stride`` steps and at the
    final time.
    """

    t_end: float
    x0: np.ndarray
    xhat0: np.ndarray
    u: np.ndarray
    dt: float = DEFAULT_DT
    stride: int = DEFAULT_STRIDE

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise DomainError(f"dt must be positive, got {self.dt!r}")
        if not (np.isfinite(self.t_end) and self.t_end >= self.dt):
            raise DomainError(f"t_end must be >= dt, got {self.t_end!r}")
        if int(self.stride) < 1:
            raise DomainError("stride must be >= 1")
        for name in ("x0", "xhat0", "u"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            if not np.all(np.isfinite(a)):
                raise DomainError(f"{name} contains non-finite entries")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "stride", int(self.stride))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class SimRecord:
    """Sampled plant and observer trajectories.

    ``error_norms`` is the Euclidean norm of ``x - xhat`` restricted to
    ``error_slice`` (for reduced systems the disturbance state is left out).
    """

    times: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    error_norms: np.ndarray
    error_slice: slice

    def t_cross(self, eps: float) -> Optional[float]:
        """First sample time after which every error norm is below ``eps``."""
        above = np.nonzero(self.error_norms >= eps)[0]
        if above.size == 0:
            return float(self.times[0])
        i = above[-1] + 1
        return None if i >= self.times.size else float(self.times[i])


@dataclass(frozen=True)
class ErrorSummary:
    t_cross: Optional[float]
    eps: float
    initial_error: float
    final_error: float
    decay_rate: float


def _error_slice(system) -> slice:
    if isinstance(system, ReducedSystem):
        return slice(0, system.disturbance_index)
    return slice(0, system.n)


def integrate(system, L, cfg: SimConfig, params: Optional[ReactionParams] = None) -> SimRecord:
    """Integrate plant and observer side by side with classical RK4.

    With ``params`` the Monod reaction is added to both the plant and the
    observer (full model); without it both are linear (reduced model, or the
    linear limit).  ``L`` is the gain matrix or an object with an ``L``
    attribute such as :class:`~soilobs.synthesis.ObserverDesign`.
    """
    L = np.asarray(getattr(L, "L", L), dtype=float)
    A, B, C = system.A, system.B, system.C
    n, p = A.shape[0], C.shape[0]
    if L.shape != (n, p):
        raise DomainError(f"gain must be {n}x{p}, got {L.shape}")
    for name, v, size in (("x0", cfg.x0, n), ("xhat0", cfg.xhat0, n), ("u", cfg.u, B.shape[1])):
        if v.shape != (size,):
            raise DomainError(f"{name} has length {v.size}, system needs {size}")
    if params is not None and isinstance(system, ReducedSystem):
        raise DomainError("the reduced model has no reaction term")

    LC = L @ C
    K = np.block([[A, np.zeros((n, n))], [LC, A - LC]])
    Bu = B @ cfg.u
    c = np.concatenate([Bu, Bu])
    layout = getattr(system, "layout", None)

    if params is None:
        def f(z):
            return K @ z + c
    else:
        def f(z):
            r = psi(z.reshape(2, n), layout, params).ravel()
            return K @ z + c + r

    dt = cfg.dt
    steps = cfg.n_steps
    sample_steps = list(range(0, steps + 1, cfg.stride))
    if sample_steps[-1] != steps:
        sample_steps.append(steps)
    samples = np.empty((len(sample_steps), 2 * n))
    z = np.concatenate([cfg.x0, cfg.xhat0])
    samples[0] = z
    s = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, steps + 1):
            k1 = f(z)
            k2 = f(z + 0.5 * dt * k1)
            k3 = f(z + 0.5 * dt * k2)
            k4 = f(z + dt * k3)
            z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(z)):
                raise DivergenceError(f"non-finite state at t = {i * dt!r} s", i * dt)
            if s < len(sample_steps) and i == sample_steps[s]:
                samples[s] = z
                s += 1

    times = np.array(sample_steps, dtype=float) * dt
    x, xhat = samples[:, :n], samples[:, n:]
    sl = _error_slice(system)
    err = np.linalg.norm(x[:, sl] - xhat[:, sl], axis=1)
    for arr in (times, x, xhat, err):
        arr.setflags(write=False)
    return SimRecord(times=times, x=x, xhat=xhat, error_norms=err, error_slice=sl)


def decay_rate(times, errors, transient_fraction: float = 0.1, floor: float = 1e-12) -> float:
    """Least-squares slope of ``log(error)`` after the initial transient.

    Samples earlier than ``transient_fraction`` of the horizon are skipped,
    as are samples at or below ``floor`` times the initial error (round-off
    plateau).
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    t0 = times[0] + transient_fraction * (times[-1] - times[0])
    keep = (times >= t0) & (errors > floor * max(errors[0], np.finfo(float).tiny))
    if np.count_nonzero(keep) < 2:
        return 0.0
    slope = np.polyfit(times[keep], np.log(errors[keep]), 1)[0]
    return float(slope)


def error_metrics(record: SimRecord, eps: float, transient_fraction: float = 0.1) -> ErrorSummary:
    if record.times.size == 0:
        raise DomainError("empty record")
    return ErrorSummary(
        t_cross=record.t_cross(eps),
        eps=float(eps),
        initial_error=float(record.error_norms[0]),
        final_error=float(record.error_norms[-1]),
        decay_rate=decay_rate(record.times, record.error_norms, transient_fraction),
    )


def write_csv(path, record: SimRecord, full_state: bool = False) -> None:
    """``t,err_norm`` per sample, optionally followed by every plant and observer state."""
    names = ["t", "err_norm"]
    n = record.x.shape[1]
    if full_state:
        names += [f"x{i}" for i in range(n)] + [f"xhat{i}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i, t in enumerate(record.times):
            row = [repr(float(t)), repr(float(record.error_norms[i]))]
            if full_state:
                row += [repr(float(v)) for v in record.x[i]] + [repr(float(v)) for v in record.xhat[i]]
            w.writerow(row)
