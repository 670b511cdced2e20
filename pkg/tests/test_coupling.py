import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import OP
from oracles import central_difference, rho_grid
from soilobs.coupling import (
    DEFAULT_BOX, build_coupling, certify, certify_gamma, certify_rho, lumped_nonlinearity,
)
from soilobs.errors import DomainError
from soilobs.model import ReactionParams, monod_rate, psi

# analytic Monod partials at (5e-3, 3e-3, 2e-4), evaluated by hand
Q_MI = 1.2e-4 * (5e-3 / 9.5e-3) * (3e-3 / 9e-3)
Q_OC = 1.2e-4 * (5e-3 / 9.5e-3) * 6e-3 / 9e-3**2 * 2e-4


def test_zero_rate_gives_zero_coupling(sys_up):
    cp = build_coupling(sys_up, ReactionParams(0.0, 4.5e-3, 6e-3), OP)
    assert not cp.A_tilde.any()
    assert cp.frobenius_norm == 0.0


def test_blocks_and_values(coupling_up):
    At = coupling_up.A_tilde
    n2 = 49
    assert coupling_up.q_mi == pytest.approx(2.1052631578947e-5, rel=1e-12)
    assert coupling_up.q_mi == pytest.approx(Q_MI, rel=1e-14)
    assert coupling_up.q_oc == pytest.approx(Q_OC, rel=1e-14)
    assert np.array_equal(At[:n2, n2:2 * n2], -coupling_up.q_oc * np.eye(n2))
    assert np.array_equal(At[n2:2 * n2, 2 * n2:3 * n2], -coupling_up.q_mi * np.eye(n2))
    mask = np.zeros_like(At, dtype=bool)
    mask[:n2, n2:2 * n2] = True
    mask[n2:2 * n2, 2 * n2:3 * n2] = True
    assert not At[~mask].any()


def test_frobenius_double_sum(coupling_up):
    At = coupling_up.A_tilde
    total = 0.0
    for i in range(At.shape[0]):
        for j in range(At.shape[1]):
            total += At[i, j] ** 2
    assert coupling_up.frobenius_norm == pytest.approx(np.sqrt(total), rel=1e-14)
    assert coupling_up.frobenius_norm == pytest.approx(1.4751389830528e-4, rel=1e-10)


def test_matches_finite_differences_of_psi(sys_up, params, coupling_up):
    n2 = 49
    x_op = sys_up.layout.stack(OP[0], OP[1], OP[2], 0.0)
    for (row_block, col_block) in ((0, 1), (1, 2)):
        i = row_block * n2 + 17
        j = col_block * n2 + 17
        e = np.zeros(150)
        e[j] = 1.0
        errs = []
        for h in (1e-5, 5e-6):
            fd = central_difference(lambda s: psi(x_op + s * e, sys_up.layout, params)[i], 0.0, h)
            errs.append(abs(fd - coupling_up.A_tilde[i, j]))
            assert fd == pytest.approx(coupling_up.A_tilde[i, j], rel=1e-5)
        # second-order convergence, allowing for round-off
        assert errs[1] <= errs[0] / 2 or errs[1] < 1e-18


def test_scalar_fd_oracle_for_q_oc(params, coupling_up):
    h = 1e-6
    fd = (monod_rate(OP[0], OP[1] + h, OP[2], params) - monod_rate(OP[0], OP[1] - h, OP[2], params)) / (2 * h)
    assert fd == pytest.approx(coupling_up.q_oc, rel=1e-6)


@pytest.mark.parametrize("op", [(0.0, 3e-3, 2e-4), (5e-3, -1e-3, 2e-4), (5e-3, 3e-3, np.nan)])
def test_nonpositive_operating_point(sys_up, params, op):
    with pytest.raises(DomainError):
        build_coupling(sys_up, params, op)


def test_rho_matches_dense_grid_oracle(params):
    oracle = rho_grid(params.r_max, params.K_na, params.K_oc, DEFAULT_BOX, 200)
    rho = certify_rho(params)
    assert rho >= oracle * (1 - 1e-2)
    assert rho <= oracle * (1 + 1e-2)


def test_rho_interior_maximum_is_refined():
    # pick a box whose gradient maximum is not on the coarse grid
    p = ReactionParams(1.0, 1.0, 1.0)
    box = ((0.0, 3.0), (0.0, 3.0), (0.0, 3.0))
    coarse = certify_rho(p, box, resolution=3)
    fine = rho_grid(1.0, 1.0, 1.0, box, 301)
    assert coarse >= fine * (1 - 1e-2)


def test_rho_zero_rate():
    assert certify_rho(ReactionParams(0.0, 1.0, 1.0)) == 0.0


def test_rho_degenerate_box(params):
    box = ((1e-4, 1e-4), (1e-4, 1e-4), (1e-4, 1e-4))
    g = np.array([
        params.r_max * params.K_na / (params.K_na + 1e-4) ** 2 * 1e-4 / (params.K_oc + 1e-4) * 1e-4,
        params.r_max * 1e-4 / (params.K_na + 1e-4) * params.K_oc / (params.K_oc + 1e-4) ** 2 * 1e-4,
        params.r_max * 1e-4 / (params.K_na + 1e-4) * 1e-4 / (params.K_oc + 1e-4),
    ])
    assert certify_rho(params, box) == pytest.approx(np.linalg.norm(g), rel=1e-12)


@pytest.mark.parametrize("box", [((1.0, 0.0),) * 3, ((-1.0, 0.0),) * 3, ((0.0, 1.0),) * 2, ((0.0, np.inf),) * 3])
def test_rho_box_validation(params, box):
    with pytest.raises(DomainError):
        certify_rho(params, box)


def test_rho_is_deterministic(params):
    assert certify_rho(params) == certify_rho(params)


def test_gamma_formula(coupling_up):
    class Zero:
        frobenius_norm = 0.0

    class Fixed:
        frobenius_norm = 1e-5

    assert certify_gamma(0.0, 7, Zero()) == 0.0
    assert certify_gamma(1e-8, 7, Fixed()) == pytest.approx(np.sqrt(3) * 7e-8 + 1e-5, rel=1e-14)
    assert certify_gamma(1e-8, 7, Fixed()) == pytest.approx(1.0121e-5, rel=1e-4)
    with pytest.raises(DomainError):
        certify_gamma(-1.0, 7, Fixed())


def _pairs(rng, count, n, box_hi=1e-4):
    W = rng.uniform(0.0, box_hi, (count, n))
    Z = rng.uniform(0.0, box_hi, (count, n))
    return W, Z


def test_sampled_lipschitz_psi(sys_up, params, coupling_up, rng):
    cert = certify(sys_up, params, coupling_up)
    W, Z = _pairs(rng, 10_000, 150)
    lhs = np.linalg.norm(psi(W, sys_up.layout, params) - psi(Z, sys_up.layout, params), axis=1)
    rhs = np.sqrt(3) * 7 * cert.rho * np.linalg.norm(W - Z, axis=1)
    assert np.all(lhs <= rhs)


def test_sampled_lipschitz_phi(sys_up, params, coupling_up, rng):
    cert = certify(sys_up, params, coupling_up)
    W, Z = _pairs(rng, 10_000, 150)
    u = rng.uniform(0.0, 1e-2, 21)
    phi_w = W @ coupling_up.A_tilde.T + sys_up.B @ u + psi(W, sys_up.layout, params)
    phi_z = Z @ coupling_up.A_tilde.T + sys_up.B @ u + psi(Z, sys_up.layout, params)
    lhs = np.linalg.norm(phi_w - phi_z, axis=1)
    assert np.all(lhs <= cert.gamma * np.linalg.norm(W - Z, axis=1))


def test_lumped_nonlinearity_definition(sys_up, params, coupling_up, rng):
    x, u = rng.uniform(0, 1e-4, 150), rng.uniform(0, 1e-2, 21)
    got = lumped_nonlinearity(x, u, sys_up, params, coupling_up)
    ref = coupling_up.A_tilde @ x + sys_up.B @ u + psi(x, sys_up.layout, params)
    assert np.array_equal(got, ref)


@given(st.floats(1e-9, 1e-2), st.floats(1e-9, 1e-2), st.floats(1e-9, 1e-2))
def test_certificate_fields(a, b, c):
    p = ReactionParams(1.2e-4, 4.5e-3, 6e-3)
    rho = certify_rho(p, ((0.0, a), (0.0, b), (0.0, c)), resolution=5)
    assert rho >= 0.0
    # the gradient norm at the far corner is a lower bound
    g = [
        p.r_max * p.K_na / (p.K_na + a) ** 2 * b / (p.K_oc + b) * c,
        p.r_max * a / (p.K_na + a) * p.K_oc / (p.K_oc + b) ** 2 * c,
        p.r_max * a / (p.K_na + a) * b / (p.K_oc + b),
    ]
    assert rho >= np.linalg.norm(g) * (1 - 1e-12)
