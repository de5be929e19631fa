import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from qrcopula import copulas as cop
from qrcopula.copulas import (
    CdfUnavailable,
    ClaytonCopula,
    GaussCopula,
    GumbelCopula,
    MarshallOlkinCopula,
    MixtureCopula,
    TCopula,
    cdm_sample,
    cond_cdf,
    cond_quantile,
    copula_cdf,
    exchangeable_correlation,
    rosenblatt,
)

KS_LEVEL = 0.01


def random_correlation(d, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(d, d + 2))
    S = A @ A.T
    s = np.sqrt(np.diag(S))
    return S / np.outer(s, s)


def families(d):
    P = random_correlation(d, d)
    return [
        GaussCopula(P),
        TCopula(3.0, P),
        TCopula(0.7, exchangeable_correlation(d, 0.4)),
        ClaytonCopula(2.0, d),
        ClaytonCopula(0.3, d),
        GumbelCopula(2.5, d),
        GumbelCopula(1.2, d),
    ]


def interior(n, d, seed):
    return np.random.default_rng(seed).uniform(0.005, 0.995, size=(n, d))


# ----------------------------------------------------------------------------
# parameters and distribution functions
# ----------------------------------------------------------------------------


def test_parameter_validation():
    with pytest.raises(ValueError):
        GaussCopula([[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(ValueError):
        GaussCopula([[1.0, 1.2], [1.2, 1.0]])
    with pytest.raises(ValueError):
        GaussCopula([[2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        TCopula(0.0, np.eye(2))
    with pytest.raises(ValueError):
        ClaytonCopula(0.0, 2)
    with pytest.raises(ValueError):
        GumbelCopula(0.9, 2)
    with pytest.raises(ValueError):
        MarshallOlkinCopula(0.0, 0.5)
    with pytest.raises(ValueError):
        MarshallOlkinCopula(0.5, 1.0)
    with pytest.raises(ValueError):
        MixtureCopula(0.0, 2)


def test_cdf_examples():
    assert copula_cdf(ClaytonCopula(2.0, 2), [0.5, 0.5]) == pytest.approx(7**-0.5, rel=1e-14)
    mo = MarshallOlkinCopula(0.25, 0.75)
    u = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(copula_cdf(mo, np.column_stack([u, np.ones_like(u)])), u, rtol=1e-15)
    np.testing.assert_allclose(copula_cdf(mo, np.column_stack([np.ones_like(u), u])), u, rtol=1e-15)
    U = interior(20, 4, 0)
    np.testing.assert_allclose(copula_cdf(MixtureCopula(1.0, 4), U), U.prod(axis=1), rtol=1e-15)
    np.testing.assert_allclose(copula_cdf(MixtureCopula(1e-12, 4), U), U.min(axis=1), rtol=1e-9)


def test_gumbel_cdf_matches_closed_form():
    th = 3.0
    u, v = 0.3, 0.8
    expect = math.exp(-(((-math.log(u)) ** th + (-math.log(v)) ** th) ** (1 / th)))
    assert copula_cdf(GumbelCopula(th, 2), [u, v]) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize(
    "c", [ClaytonCopula(2.0, 3), GumbelCopula(2.0, 3), MixtureCopula(0.4, 3), MarshallOlkinCopula(0.3, 0.6)]
)
def test_cdf_grounded_and_uniform_margins(c):
    d = c.d
    U = interior(30, d, 1)
    for j in range(d):
        Z = U.copy()
        Z[:, j] = 0.0
        np.testing.assert_array_equal(copula_cdf(c, Z), 0.0)
        O = np.ones_like(U)
        O[:, j] = U[:, j]
        np.testing.assert_allclose(copula_cdf(c, O), U[:, j], rtol=1e-12)
    assert copula_cdf(c, np.ones(d)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        copula_cdf(c, np.full(d, 1.5))


@pytest.mark.parametrize("c", [ClaytonCopula(1.5, 4), GumbelCopula(1.7, 4), MixtureCopula(0.3, 4)])
def test_cdf_exchangeable(c):
    U = interior(10, 4, 2)
    base = copula_cdf(c, U)
    for perm in itertools.permutations(range(4)):
        np.testing.assert_allclose(copula_cdf(c, U[:, perm]), base, rtol=1e-13)


def test_elliptical_cdf_unavailable():
    for c in (GaussCopula(np.eye(2)), TCopula(3, np.eye(2))):
        with pytest.raises(CdfUnavailable, match="cdf-unavailable"):
            copula_cdf(c, [0.5, 0.5])


# ----------------------------------------------------------------------------
# conditional distributions
# ----------------------------------------------------------------------------


def test_cond_examples():
    u = interior(50, 2, 3)
    np.testing.assert_allclose(cond_cdf(GaussCopula(np.eye(2)), 2, u), u[:, 1], rtol=1e-14)
    np.testing.assert_allclose(cond_cdf(ClaytonCopula(1e-8, 2), 2, u), u[:, 1], atol=1e-5)
    assert cond_quantile(ClaytonCopula(2.0, 2), 2, [0.5], 0.5) == pytest.approx(0.5464, abs=1e-4)
    expect = (1 + 0.5**-2 * (0.5 ** (-2 / 3) - 1)) ** -0.5
    assert cond_quantile(ClaytonCopula(2.0, 2), 2, [0.5], 0.5) == pytest.approx(expect, rel=1e-14)
    assert cond_quantile(GaussCopula(exchangeable_correlation(2, 0.83)), 2, [0.5], 0.5) == pytest.approx(0.5, abs=1e-15)


def test_cond_rejects_boundary_and_bad_index():
    c = ClaytonCopula(2.0, 3)
    with pytest.raises(ValueError):
        cond_cdf(c, 2, [0.0, 0.5])
    with pytest.raises(ValueError):
        cond_cdf(c, 2, [0.5, 1.0])
    with pytest.raises(ValueError):
        cond_cdf(c, 4, [0.5, 0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        cond_quantile(c, 2, [0.5], 1.0)
    with pytest.raises(ValueError):
        cond_cdf(c, 1, [0.5])


def test_t_approaches_gauss():
    P = exchangeable_correlation(2, 0.7)
    g = np.linspace(0.05, 0.95, 19)
    U = np.array(list(itertools.product(g, g)))
    diff = cond_cdf(TCopula(1e6, P), 2, U) - cond_cdf(GaussCopula(P), 2, U)
    assert np.max(np.abs(diff)) < 1e-4


def bivariate_t_conditional(u1, u2, nu, rho):
    """C(u2 | u1) = int_{-inf}^{x2} f(x1, y) dy / f_nu(x1) with the bivariate t density."""
    x1, x2 = stats.t.ppf(u1, nu), stats.t.ppf(u2, nu)
    det = 1 - rho**2
    const = special.gamma((nu + 2) / 2) / (special.gamma(nu / 2) * nu * math.pi * math.sqrt(det))

    def dens(y):
        q = (x1**2 - 2 * rho * x1 * y + y**2) / det
        return const * (1 + q / nu) ** (-(nu + 2) / 2)

    mode = rho * x1
    num = integrate.quad(dens, -np.inf, mode, epsabs=1e-14, epsrel=1e-12)[0]
    num += integrate.quad(dens, mode, x2, epsabs=1e-14, epsrel=1e-12)[0] if x2 > mode else -integrate.quad(
        dens, x2, mode, epsabs=1e-14, epsrel=1e-12
    )[0]
    return num / stats.t.pdf(x1, nu)


@pytest.mark.parametrize("nu,rho", [(3.0, 1 / math.sqrt(2)), (0.8, -0.4), (12.0, 0.95)])
def test_conditional_t_matches_density_integration(nu, rho):
    c = TCopula(nu, exchangeable_correlation(2, rho))
    g = np.linspace(0.1, 0.9, 9)
    worst = 0.0
    for u1, u2 in itertools.product(g, g):
        got = cond_cdf(c, 2, [u1, u2])
        worst = max(worst, abs(got - bivariate_t_conditional(u1, u2, nu, rho)))
    assert worst < 1e-6


def mp_archimedean_conditional(psi, psi_inv, u):
    """Mixed partial d^(j-1) C / du_1..du_(j-1) at u, relative to the same with u_j = 1."""
    j = len(u)

    def C(*x):
        return psi(mp.fsum(psi_inv(xi) for xi in x))

    order = (1,) * (j - 1) + (0,)
    num = mp.diff(C, tuple(mp.mpf(x) for x in u), order)
    den = mp.diff(C, tuple(mp.mpf(x) for x in u[:-1]) + (mp.mpf(1),), order)
    return num / den


@pytest.mark.parametrize("theta", [0.5, 2.0, 6.0])
def test_clayton_conditional_matches_mixed_partials(theta):
    mp.mp.dps = 30
    psi = lambda t: (1 + t) ** (-1 / mp.mpf(theta))
    psi_inv = lambda u: u ** (-mp.mpf(theta)) - 1
    c = ClaytonCopula(theta, 3)
    for u in interior(5, 3, 4):
        for j in (2, 3):
            expect = float(mp_archimedean_conditional(psi, psi_inv, list(u[:j])))
            assert cond_cdf(c, j, u[:j]) == pytest.approx(expect, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("theta", [1.0, 1.5, 3.0])
def test_gumbel_conditional_matches_mixed_partials(theta):
    mp.mp.dps = 30
    psi = lambda t: mp.exp(-(t ** (1 / mp.mpf(theta))))
    psi_inv = lambda u: (-mp.log(u)) ** mp.mpf(theta)
    c = GumbelCopula(theta, 4)
    for u in interior(4, 4, 5):
        for j in (2, 3, 4):
            expect = float(mp_archimedean_conditional(psi, psi_inv, list(u[:j])))
            assert cond_cdf(c, j, u[:j]) == pytest.approx(expect, rel=1e-9, abs=1e-13)


def test_gumbel_coefficients():
    # (-1)^k psi^(k)(t) for k = 2, alpha = 1/2: psi t^-2 (a21 t^0.5 + a22 t)
    a = cop._gumbel_coefficients(2, 0.5)
    np.testing.assert_allclose(a, [0.0, 0.25, 0.25])
    for k in range(1, 8):
        assert np.all(cop._gumbel_coefficients(k, 0.3) >= 0)


def test_gumbel_root_finder_failure_reports():
    c = GumbelCopula(3.0, 3)
    c.max_iter = 1
    with pytest.raises(cop.RootFindingError, match="did not converge"):
        cond_quantile(c, 3, [0.3, 0.4], 0.7)


def test_marshall_olkin_conditional():
    a1, a2 = 0.25, 0.75
    c = MarshallOlkinCopula(a1, a2)
    # numeric derivative of C in u1 off the singular curve
    h = 1e-6
    for u1, u2 in interior(40, 2, 6):
        if abs(u2**a2 - u1**a1) < 1e-3:
            continue
        num = (copula_cdf(c, [u1 + h, u2]) - copula_cdf(c, [u1 - h, u2])) / (2 * h)
        assert cond_cdf(c, 2, [u1, u2]) == pytest.approx(num, abs=1e-7)


def test_marshall_olkin_inverse_branches():
    a1, a2 = 0.25, 0.75
    c = MarshallOlkinCopula(a1, a2)
    u1 = 0.4
    upper = u1 ** (a1 * (1 / a2 - 1))
    lower = (1 - a1) * upper
    for p in np.linspace(lower + 1e-9, upper - 1e-9, 7):
        assert cond_quantile(c, 2, [u1], p) == pytest.approx(u1 ** (1 / 3), rel=1e-14)
    assert cond_quantile(c, 2, [u1], lower) == pytest.approx(u1**a1 / (1 - a1) * lower)
    p = 0.5 * lower
    assert cond_cdf(c, 2, [u1, cond_quantile(c, 2, [u1], p)]) == pytest.approx(p, rel=1e-12)
    p = 0.5 * (1 + upper)
    assert cond_cdf(c, 2, [u1, cond_quantile(c, 2, [u1], p)]) == pytest.approx(p, rel=1e-12)


# ----------------------------------------------------------------------------
# CDM / Rosenblatt
# ----------------------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 5])
def test_inverse_pair_all_families(d):
    V = interior(100, d, 10 + d)
    for c in families(d):
        U = cdm_sample(c, V)
        assert np.max(np.abs(rosenblatt(c, U) - V)) < 1e-8, c
        assert np.max(np.abs(cdm_sample(c, rosenblatt(c, V)) - V)) < 1e-8, c


def test_inverse_pair_marshall_olkin_off_atom():
    c = MarshallOlkinCopula(0.25, 0.75)
    V = interior(400, 2, 7)
    upper = V[:, 0] ** (0.25 * (1 / 0.75 - 1))
    off = (V[:, 1] < 0.75 * upper) | (V[:, 1] >= upper)
    U = cdm_sample(c, V[off])
    assert np.max(np.abs(rosenblatt(c, U) - V[off])) < 1e-12
    assert np.max(np.abs(cdm_sample(c, rosenblatt(c, V)) - V)) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_cond_round_trip_every_step(d):
    V = interior(100, d, 20 + d)
    for c in families(d):
        U = cdm_sample(c, V)
        for j in range(2, d + 1):
            got = cond_cdf(c, j, U[:, :j])
            tol = 1e-12 if isinstance(c, GumbelCopula) else 1e-9
            assert np.max(np.abs(got - V[:, j - 1])) < max(tol, 1e-10), (c, j)


def test_independence_parameters_are_identity():
    V = interior(50, 3, 8)
    np.testing.assert_allclose(cdm_sample(GaussCopula(np.eye(3)), V), V, rtol=1e-14)
    np.testing.assert_allclose(cdm_sample(TCopula(4.0, np.eye(3)), V)[:, 0], V[:, 0])
    np.testing.assert_allclose(cdm_sample(GumbelCopula(1.0, 3), V), V, rtol=1e-10)
    np.testing.assert_allclose(rosenblatt(GaussCopula(np.eye(3)), V), V, rtol=1e-14)


def test_cond_quantile_monotone_in_p():
    p = np.linspace(1e-6, 1 - 1e-6, 1000)
    for c in families(3):
        q = cond_quantile(c, 3, np.tile([0.3, 0.8], (p.size, 1)), p)
        assert np.all(np.diff(q) > 0), c
    mo = MarshallOlkinCopula(0.25, 0.75)
    q = cond_quantile(mo, 2, np.full((p.size, 1), 0.6), p)
    assert np.all(np.diff(q) >= 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 15.0), st.lists(st.floats(1e-6, 1 - 1e-6), min_size=4, max_size=4))
def test_clayton_inverse_pair_property(theta, v):
    c = ClaytonCopula(theta, 4)
    v = np.array(v)
    u = cdm_sample(c, v)
    assert np.all((u > 0) & (u < 1))
    np.testing.assert_allclose(rosenblatt(c, u), v, atol=1e-8)


def test_cdm_clamps_boundary_input():
    c = ClaytonCopula(2.0, 2)
    U = cdm_sample(c, np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    assert np.all(np.isfinite(U)) and np.all((U > 0) & (U <= 1))


def test_determinant_identity():
    for d in range(2, 7):
        for seed in range(3):
            P = random_correlation(d, 100 + seed)
            for j in range(2, d + 1):
                Pj = P[:j, :j]
                lhs = np.linalg.det(Pj)
                rhs = np.linalg.det(Pj[:-1, :-1]) / np.linalg.inv(Pj)[-1, -1]
                assert lhs == pytest.approx(rhs, abs=1e-10)


def test_workspace_matches_explicit_formulas():
    P = random_correlation(5, 3)
    c = GaussCopula(P)
    for j in range(2, 6):
        ws = c.workspace(j)
        A = P[: j - 1, : j - 1]
        np.testing.assert_allclose(ws.coef, P[j - 1, : j - 1] @ np.linalg.inv(A), atol=1e-12)
        schur = P[j - 1, j - 1] - P[j - 1, : j - 1] @ np.linalg.solve(A, P[: j - 1, j - 1])
        assert ws.cond_var == pytest.approx(schur, rel=1e-12)
        assert ws.prec_jj == pytest.approx(np.linalg.inv(P[:j, :j])[-1, -1], rel=1e-12)


# ----------------------------------------------------------------------------
# stochastic representations
# ----------------------------------------------------------------------------


def test_stochastic_gauss():
    V = interior(200, 3, 9)
    np.testing.assert_allclose(cop.stochastic_sample_gauss(GaussCopula(np.eye(3)), V), V, rtol=1e-14)
    c = GaussCopula(exchangeable_correlation(2, 0.6))
    np.testing.assert_allclose(cop.stochastic_sample_gauss(c, V[:, :2]), cdm_sample(c, V[:, :2]), atol=1e-10)
    with pytest.raises(TypeError):
        cop.stochastic_sample_gauss(ClaytonCopula(1.0, 3), V)


def test_stochastic_t_limit_and_shape():
    V = interior(500, 4, 10)
    P = exchangeable_correlation(3, 0.5)
    ut = cop.stochastic_sample_t(TCopula(1e8, P), V)
    ug = cop.stochastic_sample_gauss(GaussCopula(P), V[:, :3])
    assert np.max(np.abs(ut - ug)) < 2e-4
    with pytest.raises(ValueError):
        cop.stochastic_sample_t(TCopula(3.0, P), V[:, :3])


def test_stochastic_t_differs_from_cdm():
    V = interior(50, 3, 11)
    c = TCopula(3.0, exchangeable_correlation(2, 0.5))
    assert not np.allclose(cop.stochastic_sample_t(c, V), cdm_sample(c, V[:, :2]))


def test_mo_algorithm_monotone_and_limits():
    c = ClaytonCopula(2.0, 3)
    g = np.linspace(1e-6, 1 - 1e-6, 400)
    for v1 in (0.1, 0.5, 0.9):
        V = np.column_stack([np.full_like(g, v1), g, g[::-1], np.full_like(g, 0.5)])
        U = cop.mo_algorithm_sample(c, V)
        assert np.all(np.diff(U[:, 0]) > 0)
        assert np.all(np.diff(U[:, 1]) < 0)
    # E_j = -log(v_{j+1}): u_j -> 1 as v_{j+1} -> 1; small v_{j+1} gives small u_j
    U = cop.mo_algorithm_sample(c, np.array([[0.5, 1 - 1e-15, 1e-300, 0.5]]))
    assert U[0, 0] > 1 - 1e-12 and U[0, 1] < 0.1
    # u_j increasing in v_1 as well
    v1 = np.linspace(0.01, 0.99, 200)
    U = cop.mo_algorithm_sample(c, np.column_stack([v1, np.full((200, 3), 0.3)]))
    assert np.all(np.diff(U, axis=0) > 0)


def test_mo_shock_independence_limit():
    c = MarshallOlkinCopula(0.25, 0.75)
    V = interior(100, 3, 12)
    V[:, 2] = 1e-300
    U = cop.mo_copula_sample(c, V)
    np.testing.assert_allclose(U, np.column_stack([V[:, 0] ** (1 / 0.75), V[:, 1] ** (1 / 0.25)]), rtol=1e-14)


def sampler_cases():
    P = exchangeable_correlation(3, 1 / math.sqrt(2))
    return [
        ("cdm-clayton", ClaytonCopula(2.0, 3), lambda c, v: cdm_sample(c, v), 3),
        ("cdm-gumbel", GumbelCopula(2.0, 3), lambda c, v: cdm_sample(c, v), 3),
        ("cdm-t", TCopula(3.0, P), lambda c, v: cdm_sample(c, v), 3),
        ("stoch-gauss", GaussCopula(P), cop.stochastic_sample_gauss, 3),
        ("stoch-t", TCopula(3.0, P), cop.stochastic_sample_t, 4),
        ("mo-clayton", ClaytonCopula(2.0, 3), cop.mo_algorithm_sample, 4),
        ("mo-shock", MarshallOlkinCopula(0.25, 0.75), cop.mo_copula_sample, 3),
        ("cdm-mo", MarshallOlkinCopula(0.25, 0.75), lambda c, v: cdm_sample(c, v), 2),
    ]


@pytest.mark.parametrize("name,c,fn,k", sampler_cases(), ids=[s[0] for s in sampler_cases()])
def test_sampler_margins_uniform(name, c, fn, k):
    V = np.random.default_rng(13).random((10**4, k))
    U = fn(c, V)
    for j in range(U.shape[1]):
        assert stats.kstest(U[:, j], "uniform").pvalue > KS_LEVEL, (name, j)


@pytest.mark.parametrize(
    "c,fn,k",
    [
        (TCopula(3.0, exchangeable_correlation(3, 0.6)), cop.stochastic_sample_t, 4),
        (ClaytonCopula(2.0, 3), cop.mo_algorithm_sample, 4),
        (ClaytonCopula(0.4, 3), cop.mo_algorithm_sample, 4),
    ],
)
def test_rosenblatt_uniformizes_independent_samples(c, fn, k):
    V = np.random.default_rng(14).random((10**4, k))
    W = rosenblatt(c, fn(c, V))
    for j in range(c.d):
        assert stats.kstest(W[:, j], "uniform").pvalue > KS_LEVEL
    # coordinates must also be independent
    r = np.corrcoef(W.T)
    assert np.max(np.abs(r - np.eye(c.d))) < 4 / math.sqrt(10**4)


def test_gumbel_kendall_tau():
    theta = 2.0
    U = cdm_sample(GumbelCopula(theta, 2), np.random.default_rng(15).random((20000, 2)))
    assert cop.kendall_tau(U) == pytest.approx(1 - 1 / theta, abs=0.015)


def test_mixture_cannot_be_sampled():
    with pytest.raises(NotImplementedError):
        cond_cdf(MixtureCopula(0.5, 2), 2, [0.3, 0.4])
