import math

import numpy as np
import pytest

from laue_lab.exterior import Signature, multi_indices
from laue_lab.fields import (
    FormField,
    MetricField,
    ScalarField,
    SymTensorField,
    VectorField,
    active_transform,
    boost_emt_analytic,
    christoffels,
    contract_coform,
    current_from_killing,
    divergence,
    emt_to_form,
    exterior_derivative,
    fd_partial,
    identity_residuals,
    killing_residual,
    lie_derivative,
    stationarity_residual,
    symmetry_residual,
)
from laue_lab.poincare import (
    PoinLieElement,
    compose,
    fundamental_field,
    rotation,
    standard_boost,
    translation,
    wedge_vectors,
)

from conftest import constant_field, make_spatial_bump

SIG = Signature.mostly_minus(4)
RNG = np.random.default_rng(1234)


def basis_vec(i, n=4):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def curved_diag_metric():
    # g_11 = -(1 + 0.1 sin x1)^2, other entries Minkowski
    def func(points):
        points = np.asarray(points, float)
        out = np.zeros(points.shape[:-1] + (4, 4))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = -((1.0 + 0.1 * np.sin(points[..., 1])) ** 2)
        out[..., 2, 2] = -1.0
        out[..., 3, 3] = -1.0
        return out

    return MetricField(SIG, func, flat=False)


# --- fd_partial ---


def test_fd_partial_constant_is_zero():
    f = ScalarField(lambda pts: np.full(np.asarray(pts).shape[:-1], 3.5))
    pts = RNG.standard_normal((10, 4))
    assert np.allclose(fd_partial(f, 1)(pts), 0.0)


def test_fd_partial_linear_coordinate():
    f = ScalarField(lambda pts: np.asarray(pts)[..., 1])
    pts = RNG.standard_normal((10, 4))
    assert np.allclose(fd_partial(f, 1)(pts), 1.0, atol=1e-10)


def test_fd_partial_sine_taylor_bound():
    f = ScalarField(lambda pts: np.sin(np.asarray(pts)[..., 1]))
    h = 1e-3
    got = fd_partial(f, 1, h)(np.zeros((1, 4)))[0]
    assert abs(got - 1.0) < h * h


def test_fd_partial_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_partial(ScalarField(lambda p: p[..., 0]), 0, 0.0)


# --- exterior derivative ---


def test_exterior_derivative_of_exact_form_is_small():
    # d(d phi) = O(h^2)
    phi = make_spatial_bump()
    one_form = FormField(4, 1, lambda pts: phi.gradient(pts, 1e-4))
    dd = exterior_derivative(one_form, 1e-3)
    pts = RNG.uniform(-1, 1, (30, 4))
    assert np.max(np.abs(dd(pts))) < 1e-5


def test_exterior_derivative_convergence_rate():
    # fd-d of an analytically exact one-form: the closedness residual is the
    # O(h^2) truncation term, so halving h divides it by about four
    def grad_comps(points):
        # gradient of sin(x1 + 0.5 x2); the mixed third derivatives differ,
        # so the fd-closedness defect does not cancel
        points = np.asarray(points, float)
        u = points[..., 1] + 0.5 * points[..., 2]
        out = np.zeros(points.shape[:-1] + (4,))
        out[..., 1] = np.cos(u)
        out[..., 2] = 0.5 * np.cos(u)
        return out

    omega = FormField(4, 1, grad_comps)
    pts = RNG.uniform(-1, 1, (20, 4))
    coarse = np.max(np.abs(exterior_derivative(omega, 2e-2)(pts)))
    fine = np.max(np.abs(exterior_derivative(omega, 1e-2)(pts)))
    assert coarse < 1e-3
    assert 2.5 < coarse / fine < 6.0


# --- divergence ---


def test_divergence_of_static_dust_vanishes(static_dust, eta4):
    pts = RNG.uniform(-1, 1, (25, 4))
    div = divergence(static_dust, eta4, 1e-3)
    assert np.max(np.abs(div(pts))) < 1e-8


def test_divergence_of_linear_stress(eta4):
    def func(points):
        points = np.asarray(points, float)
        out = np.zeros(points.shape[:-1] + (4, 4))
        out[..., 1, 1] = points[..., 1]
        return out

    T = SymTensorField(func)
    div = divergence(T, eta4, 1e-3)
    got = div(np.zeros((1, 4)))[0]
    assert np.allclose(got, basis_vec(1), atol=1e-9)


def test_divergence_of_conserved_blob(conserved_blob, eta4):
    # measured through finite differences, not the analytic hook
    T = SymTensorField(conserved_blob.func, stationary=True)
    pts = RNG.uniform(-1.5, 1.5, (25, 4))
    r_h = np.max(np.abs(divergence(T, eta4, 2e-3)(pts)))
    r_h2 = np.max(np.abs(divergence(T, eta4, 1e-3)(pts)))
    assert r_h < 1e-4
    assert 2.5 < r_h / r_h2 < 6.0


def test_divergence_uses_analytic_hook(conserved_blob, eta4):
    pts = RNG.uniform(-1, 1, (10, 4))
    assert np.allclose(divergence(conserved_blob, eta4)(pts), 0.0)


def test_divergence_curved_metric_of_metric_itself():
    # nabla g = 0, so T = g^{-1}-like inverse metric is divergence free
    g = curved_diag_metric()

    def func(points):
        return np.linalg.inv(g(points))

    T = SymTensorField(func, stationary=True)
    pts = RNG.uniform(-0.5, 0.5, (20, 4))
    div = divergence(T, g, 1e-3)
    assert np.max(np.abs(div(pts))) < 1e-7


# --- Lie derivatives and Killing residuals ---


def test_lie_derivative_metric_translation(eta4):
    V = constant_field(basis_vec(1))
    out = lie_derivative(eta4, V)(RNG.standard_normal((10, 4)))
    assert np.max(np.abs(out)) < 1e-12


def test_lie_derivative_metric_boost_generator(eta4):
    xi = PoinLieElement(np.zeros(4), wedge_vectors(basis_vec(0), basis_vec(1)))
    V = VectorField(fundamental_field(xi, np.zeros(4), SIG))
    out = lie_derivative(eta4, V)(RNG.standard_normal((10, 4)))
    assert np.max(np.abs(out)) < 1e-9


def test_lie_derivative_metric_scaling_field(eta4):
    V = VectorField(lambda pts: np.asarray(pts, float))
    pts = RNG.standard_normal((10, 4))
    out = lie_derivative(eta4, V)(pts)
    assert np.max(np.abs(out - 2.0 * SIG.matrix)) < 1e-9


def test_lie_derivative_form_cartan_on_exact_form():
    # L_V d(phi) = d(V(phi)) for V = e0 and stationary phi gives zero
    phi = make_spatial_bump()
    omega = FormField(4, 1, lambda pts: phi.gradient(pts, 1e-4))
    V = constant_field(basis_vec(0))
    out = lie_derivative(omega, V, 1e-3)(RNG.uniform(-1, 1, (15, 4)))
    assert np.max(np.abs(out)) < 1e-7


def test_killing_residual_all_ten_generators(eta4, sample_points4):
    gens = [PoinLieElement(basis_vec(i), np.zeros(6)) for i in range(4)]
    for a, b in multi_indices(4, 2):
        gens.append(
            PoinLieElement(np.zeros(4), wedge_vectors(basis_vec(a), basis_vec(b)))
        )
    assert len(gens) == 10
    for xi in gens:
        K = VectorField(fundamental_field(xi, np.zeros(4), SIG))
        assert killing_residual(K, eta4, sample_points4) < 1e-9


def test_killing_residual_scaling_field(eta4, sample_points4):
    V = VectorField(lambda pts: np.asarray(pts, float))
    res = killing_residual(V, eta4, sample_points4)
    assert res == pytest.approx(2.0, abs=1e-8)


def test_killing_residual_rotation_on_curved_metric(sample_points4):
    g = curved_diag_metric()
    xi = PoinLieElement(np.zeros(4), wedge_vectors(basis_vec(1), basis_vec(2)))
    K = VectorField(fundamental_field(xi, np.zeros(4), SIG))
    assert killing_residual(K, g, sample_points4) > 1e-3
    # while a pure translation along x2 stays Killing for this metric
    K2 = constant_field(basis_vec(2))
    assert killing_residual(K2, g, sample_points4) < 1e-9


# --- active transforms ---


def test_active_transform_identity(static_dust):
    from laue_lab.poincare import identity

    T2 = active_transform(identity(4), static_dust)
    pts = RNG.standard_normal((10, 4))
    assert np.allclose(T2(pts), static_dust(pts))


def test_active_transform_composition(static_dust):
    g = standard_boost(1, 0.4)
    h = compose(rotation(1, 2, 0.3), translation(np.array([0.1, -0.2, 0.5, 0.0])))
    lhs = active_transform(compose(g, h), static_dust)
    rhs = active_transform(g, active_transform(h, static_dust))
    pts = RNG.standard_normal((10, 4))
    assert np.allclose(lhs(pts), rhs(pts), atol=1e-12)


def test_boosted_static_dust_energy_density(static_dust):
    beta = 0.6
    gamma = 1.0 / math.sqrt(1 - beta**2)
    g = standard_boost(1, beta)
    T2 = active_transform(g, static_dust)
    pts = RNG.standard_normal((10, 4))
    under = pts @ np.linalg.inv(g.A).T
    expected = gamma**2 * static_dust(under)[..., 0, 0]
    assert np.allclose(T2(pts)[..., 0, 0], expected, atol=1e-12)


def test_active_transform_form_field_pullback():
    # transforming a constant one-form multiplies by the inverse linear part
    comps = RNG.standard_normal(4)
    omega = FormField(4, 1, lambda pts: np.broadcast_to(comps, np.asarray(pts).shape[:-1] + (4,)))
    g = standard_boost(1, 0.5)
    got = active_transform(g, omega)(np.zeros((1, 4)))[0]
    expected = np.linalg.inv(g.A).T @ comps
    assert np.allclose(got, expected)


def test_dust_equivariance_contract():
    # building T from transformed ingredients equals transforming T;
    # for rho u (x) u this holds for any invertible linear map
    rng = np.random.default_rng(5)

    def make_T(rho_func, u):
        def func(points):
            points = np.asarray(points, float)
            r = rho_func(points)
            return r[..., None, None] * np.outer(u, u)

        return SymTensorField(func)

    u = np.array([1.2, 0.3, -0.1, 0.2])
    rho = lambda pts: np.exp(-np.sum(np.asarray(pts)[..., 1:] ** 2, axis=-1))
    T = make_T(rho, u)
    pts = rng.standard_normal((12, 4))
    for g in (
        standard_boost(1, 0.7),
        compose(standard_boost(2, 0.3), rotation(1, 3, 1.1)),
    ):
        rho_t = lambda p, g=g: rho(np.asarray(p) @ np.linalg.inv(g.A).T - 0.0)
        T_built = make_T(lambda p, g=g: rho(p @ np.linalg.inv(g.A).T), g.A @ u)
        T_pushed = active_transform(g, T)
        assert np.allclose(T_built(pts), T_pushed(pts), atol=1e-12)
    # weaker covariance: arbitrary invertible linear map
    from laue_lab.poincare import PoincareElement

    L = PoincareElement(np.zeros(4), np.eye(4) + 0.2 * rng.standard_normal((4, 4)))
    T_built = make_T(lambda p: rho(p @ np.linalg.inv(L.A).T), L.A @ u)
    T_pushed = active_transform(L, T)
    assert np.allclose(T_built(pts), T_pushed(pts), atol=1e-12)


# --- analytic boost law ---


def test_boost_analytic_beta_zero_is_identity(conserved_blob):
    T2 = boost_emt_analytic(conserved_blob, 0.0)
    pts = RNG.standard_normal((10, 4))
    assert np.allclose(T2(pts), conserved_blob(pts))


def test_boost_analytic_energy_flux_from_pure_density(static_dust):
    beta = 0.5
    gamma = 1.0 / math.sqrt(1 - beta**2)
    T2 = boost_emt_analytic(static_dust, beta)
    pts = RNG.standard_normal((10, 4))
    under = pts.copy()
    under[:, 0] = gamma * (pts[:, 0] - beta * pts[:, 1])
    under[:, 1] = gamma * (pts[:, 1] - beta * pts[:, 0])
    expected = gamma**2 * beta * static_dust(under)[..., 0, 0]
    assert np.allclose(T2(pts)[..., 0, 1], expected, atol=1e-12)


def test_boost_analytic_matches_active_transform(conserved_blob):
    for beta in (0.3, -0.6, 0.85):
        lhs = boost_emt_analytic(conserved_blob, beta)
        rhs = active_transform(standard_boost(1, beta), conserved_blob)
        pts = RNG.standard_normal((40, 4))
        assert np.max(np.abs(lhs(pts) - rhs(pts))) < 1e-10


def test_boost_analytic_rejects_superluminal(static_dust):
    with pytest.raises(ValueError):
        boost_emt_analytic(static_dust, 1.0)


# --- energy-momentum form ---


def test_emt_to_form_dust_row(static_dust, eta4):
    calT = emt_to_form(static_dust, eta4)
    pts = RNG.standard_normal((10, 4))
    rho = static_dust(pts)[..., 0, 0]
    got = calT(pts)
    # time row is rho * theta1^theta2^theta3, spatial rows vanish
    idx123 = list(multi_indices(4, 3)).index((1, 2, 3))
    assert np.allclose(got[..., 0, idx123], rho)
    got_zeroed = got.copy()
    got_zeroed[..., 0, idx123] = 0.0
    assert np.max(np.abs(got_zeroed)) < 1e-12


def test_emt_to_form_zero_tensor(eta4):
    zero = SymTensorField(
        lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (4, 4))
    )
    calT = emt_to_form(zero, eta4)
    assert np.max(np.abs(calT(RNG.standard_normal((5, 4))))) == 0.0


def test_emt_form_round_trip(conserved_blob, eta4):
    # un-dualising the second slot and raising both indices recovers T
    from laue_lab.exterior import hodge_comps

    calT = emt_to_form(conserved_blob, eta4)
    pts = RNG.standard_normal((15, 4))
    vals = calT(pts)
    eta = SIG.matrix
    recovered = np.empty(pts.shape[:-1] + (4, 4))
    for a in range(4):
        one_form = hodge_comps(vals[..., a, :], 4, 3, eta, 1.0)
        recovered[..., a, :] = one_form
    T_low = np.einsum("ac,...cd,bd->...ab", eta, conserved_blob(pts), eta)
    assert np.allclose(recovered, T_low, atol=1e-12)


def test_contract_coform_matches_current(conserved_blob, eta4):
    K = constant_field(basis_vec(1))
    calT = emt_to_form(conserved_blob, eta4)
    tk = contract_coform(calT, K)
    J, calJ = current_from_killing(conserved_blob, K, eta4)
    pts = RNG.standard_normal((15, 4))
    assert np.allclose(tk(pts), calJ(pts), atol=1e-12)


def test_current_from_killing_dust(static_dust, eta4):
    J, calJ = current_from_killing(static_dust, constant_field(basis_vec(0)), eta4)
    pts = RNG.standard_normal((10, 4))
    rho = static_dust(pts)[..., 0, 0]
    expected = np.zeros(pts.shape[:-1] + (4,))
    expected[..., 0] = rho
    assert np.allclose(J(pts), expected)
    J1, _ = current_from_killing(static_dust, constant_field(basis_vec(1)), eta4)
    assert np.max(np.abs(J1(pts))) < 1e-14


# --- differential identities ---


def test_identity_residuals_flat_conserved_killing(conserved_blob, eta4, sample_points4):
    # rotation generator: non-constant Killing field contracting stress
    # components the blob actually carries
    xi = PoinLieElement(np.zeros(4), wedge_vectors(basis_vec(1), basis_vec(2)))
    K = VectorField(fundamental_field(xi, np.zeros(4), SIG))
    T = SymTensorField(conserved_blob.func, stationary=True)  # measure via fd
    r1, r2 = identity_residuals(T, K, eta4, 1e-3, sample_points4)
    # in a flat chart the first identity is stencil-exact (the fd divergence
    # and the fd exterior derivative share difference quotients)
    assert r1 < 1e-12
    assert r2 < 1e-6
    _, r2c = identity_residuals(T, K, eta4, 2e-3, sample_points4)
    assert 2.5 < r2c / r2 < 6.0


def test_identity_residuals_zero_tensor(eta4, sample_points4):
    zero = SymTensorField(lambda pts: np.zeros(np.asarray(pts).shape[:-1] + (4, 4)))
    K = constant_field(basis_vec(0))
    r1, r2 = identity_residuals(zero, K, eta4, 1e-3, sample_points4)
    assert r1 == 0.0 and r2 == 0.0


def test_identity_residuals_trace_term_matters(conserved_blob, eta4, sample_points4):
    # scaling field: nabla_a K_b = eta_ab, so the correction term equals the
    # eta-trace of T; dropping it leaves a residual of that size
    K = VectorField(lambda pts: np.asarray(pts, float))
    T = conserved_blob
    r1, r2 = identity_residuals(T, K, eta4, 1e-3, sample_points4)
    assert r2 < 1e-6
    pts = np.asarray(sample_points4, float)
    trace = np.einsum("ab,...ab->...", SIG.matrix, T(pts))
    from laue_lab.fields import exterior_derivative as dext

    calT = emt_to_form(T, eta4)
    tk = contract_coform(calT, K)
    lhs = dext(tk, 1e-3)(pts)[..., 0]
    # without the trace term the residual reproduces |trace| pointwise
    assert np.max(np.abs(lhs - trace)) < 1e-6
    assert np.max(np.abs(trace)) > 0.1


def test_identity_residuals_curved_metric(sample_points4):
    # T = inverse metric is covariantly conserved for any metric
    g = curved_diag_metric()
    T = SymTensorField(lambda pts: np.linalg.inv(g(pts)), stationary=True)
    K = constant_field(basis_vec(2))  # Killing for this metric
    pts = 0.4 * np.asarray(sample_points4)
    r1, r2 = identity_residuals(T, K, g, 1e-3, pts)
    assert r1 < 1e-6 and r2 < 1e-6
    # with metric derivatives in play the first identity shows its O(h^2)
    r1c, _ = identity_residuals(T, K, g, 2e-3, pts)
    assert 2.5 < r1c / r1 < 6.0


# --- metadata checks ---


def test_stationarity_residual(static_dust, sample_points4):
    assert stationarity_residual(static_dust, 1e-3, sample_points4) < 1e-8

    def moving(points):
        points = np.asarray(points, float)
        out = np.zeros(points.shape[:-1] + (4, 4))
        out[..., 0, 0] = np.exp(-((points[..., 1] - 0.3 * points[..., 0]) ** 2))
        return out

    T = SymTensorField(moving, stationary=False)
    assert stationarity_residual(T, 1e-3, sample_points4) > 1e-3


def test_symmetry_residual(conserved_blob, sample_points4):
    assert symmetry_residual(conserved_blob, sample_points4) == 0.0


def test_christoffels_flat_are_zero(eta4):
    G = christoffels(eta4)(RNG.standard_normal((5, 4)))
    assert np.max(np.abs(G)) == 0.0


def test_christoffels_curved_match_analytic():
    # g_11 = -f(x1)^2 gives Gamma^1_11 = f'/f, all else zero
    g = curved_diag_metric()
    pts = np.zeros((7, 4))
    pts[:, 1] = np.linspace(-1, 1, 7)
    G = christoffels(g, 1e-4)(pts)
    f = 1.0 + 0.1 * np.sin(pts[:, 1])
    fp = 0.1 * np.cos(pts[:, 1])
    assert np.allclose(G[:, 1, 1, 1], fp / f, atol=1e-7)
    mask = np.ones((4, 4, 4), dtype=bool)
    mask[1, 1, 1] = False
    assert np.max(np.abs(G[:, mask])) < 1e-7


def test_lie_derivative_zero_form_is_directional_derivative():
    # degree-0 field: L_V reduces to V(f)
    def comps(points):
        points = np.asarray(points, float)
        return (points[..., 1] ** 2 + np.sin(points[..., 2]))[..., None]

    f = FormField(4, 0, comps)
    V = VectorField(
        lambda pts: np.broadcast_to(
            np.array([0.0, 2.0, 1.0, 0.0]), np.asarray(pts).shape[:-1] + (4,)
        )
    )
    pts = RNG.uniform(-1, 1, (20, 4))
    got = lie_derivative(f, V, 1e-4)(pts)[..., 0]
    expected = 2.0 * 2.0 * pts[:, 1] + np.cos(pts[:, 2])
    assert np.allclose(got, expected, atol=1e-7)
