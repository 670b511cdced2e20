"""Stage functions shared by the command-line front-end.

Each stage takes a validated :class:`~soilobs.scenario.Scenario` (or the
output of an earlier stage) and returns immutable results; writing files is
left to :mod:`soilobs.cli`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import certificate
from .coupling import CouplingMatrix, LipschitzCertificate, build_coupling, certify
from .grid import assemble
from .observer import hautus_check
from .reduction import assemble_reduced, disturbance_from_products
from .scenario import Scenario
from .simulator import SimConfig, SimRecord, error_metrics, integrate
from .synthesis import ObserverDesign, synthesize


@dataclass(frozen=True)
class Model:
    scenario: Scenario
    system: object
    A_eff: np.ndarray
    coupling: Optional[CouplingMatrix] = None

    @property
    def reduced(self) -> bool:
        return self.scenario.reduced


def build_model(sc: Scenario) -> Model:
    if sc.reduced:
        N, p = sc.grid.N, sc.grid.p
        # the configured value is the per-point product c_na * c_oc * c_mi
        C_d, A_d = disturbance_from_products(sc.reaction, sc.initial_product, N, p, sc.lambdas)
        products = np.full(N * N, sc.initial_product)
        rs = assemble_reduced(sc.grid, sc.tau_na, C_d, A_d, products)
        return Model(sc, rs, rs.A)
    sys = assemble(sc.grid, sc.tau_na)
    cp = build_coupling(sys, sc.reaction, sc.operating_point)
    return Model(sc, sys, sys.A - cp.A_tilde, cp)


def observability(model: Model):
    """PBH reports for ``(A_eff, C)`` and, for the full model, ``(A, C)``."""
    rep = hautus_check(model.A_eff, model.system.C)
    bare = None if model.reduced else hautus_check(model.system.A, model.system.C)
    return rep, bare


def lipschitz(model: Model) -> Optional[LipschitzCertificate]:
    if model.reduced:
        return None
    sc = model.scenario
    return certify(model.system, sc.reaction, model.coupling, sc.search_box, sc.resolution)


def design_gamma(model: Model, cert: Optional[LipschitzCertificate]) -> float:
    if model.reduced:
        return float(model.scenario.disturbance_gamma)
    return float(cert.gamma)


def synthesize_all(model: Model, gamma: float, variants) -> dict:
    return {v: synthesize(v, model.A_eff, model.system.C, gamma) for v in variants}


def design_matrices(model: Model, design: ObserverDesign) -> dict:
    mats = {"A_eff": model.A_eff, "C": model.system.C, "L": design.L, "P": design.P}
    if design.Q is not None:
        mats["Q"] = design.Q
    mats["gamma"] = np.array([[design.gamma]])
    return mats


def reverify(mats: dict, variant: str) -> certificate.CertificateCheck:
    """Re-check a design from its dumped matrices only."""
    return certificate.verify(
        mats["A_eff"], mats["C"], mats["L"], mats["P"], variant,
        float(mats["gamma"][0, 0]), mats.get("Q"),
    )


def sim_config(model: Model) -> SimConfig:
    sc = model.scenario
    N, n = sc.grid.N, model.system.n
    if model.reduced:
        x0 = np.r_[np.full(n - 1, sc.x0), sc.xd0]
        xhat0 = np.r_[np.full(n - 1, sc.xhat0), sc.xhat_d0]
        u = np.full(N, sc.u_levels[0])
    else:
        x0 = np.full(n, sc.x0)
        xhat0 = np.full(n, sc.xhat0)
        u = np.repeat(np.asarray(sc.u_levels, dtype=float), N)
    return SimConfig(t_end=sc.t_end, x0=x0, xhat0=xhat0, u=u, dt=sc.dt, stride=sc.stride)


def simulate(model: Model, design: ObserverDesign) -> SimRecord:
    params = None if model.reduced else model.scenario.reaction
    return integrate(model.system, design, sim_config(model), params)


def summarize(model: Model, record: SimRecord):
    return error_metrics(record, model.scenario.eps_cross)
