import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphflow.errors import ChartViolation, EigenFailure
from graphflow.graphgeom import (
    MapJet,
    gauss_residual,
    geometry,
    induced_christoffel,
    induced_metric,
    mcf_velocity,
    mean_curvature,
    normal_projection,
    pair,
    product_metric,
    product_s_metric,
    projection_jacobian,
    pullback,
    s_eigenvalues,
    s_perp_matrix,
    s_perp_theta_max,
    s_tensor,
    second_fundamental_form,
    singular_values,
    svd_frames,
    tangent_vectors,
)
from graphflow.manifold import Euclidean, PoincareDisk, Product, UpperHalfPlane, metric_at
from graphflow.verification import polynomial_jets, random_contraction_jets, random_polynomial


def jet(value, d1, d2=None):
    d1 = np.asarray(d1, dtype=float)
    n, m = d1.shape
    return MapJet(np.asarray(value, dtype=float), d1, np.zeros((n, m, m)) if d2 is None else d2)


def hs2_jet(r, x=0.0):
    s, c = math.sin(x), math.cos(x)
    return MapJet(np.array([r * s, r * c]), np.array([[r * c], [-r * s]]),
                  np.array([[[-r * s]], [[-r * c]]]))


def hyperbolic_distance_uhp(p, q):
    return 2 * math.asinh(math.hypot(*(p - q)) / (2 * math.sqrt(p[1] * q[1])))


def hyperbolic_distance_disk(p, q):
    return 2 * math.asinh(math.hypot(*(p - q)) / math.sqrt((1 - p @ p) * (1 - q @ q)))


# --- worked examples ---------------------------------------------------------

def test_constant_map():
    j = jet([0.1, 0.2], np.zeros((2, 2)))
    md = metric_at(PoincareDisk(), j.value)
    g, gi = induced_metric(j, md)
    np.testing.assert_array_equal(g, np.eye(2))
    np.testing.assert_array_equal(s_tensor(j, md), np.eye(2))
    np.testing.assert_array_equal(singular_values(j, md), [0, 0])


def test_unit_speed_line_in_half_plane():
    j = jet([0.4, 1.0], [[1.0], [0.0]])
    g, _ = induced_metric(j, metric_at(UpperHalfPlane(), j.value))
    assert g[0, 0] == pytest.approx(2.0, abs=1e-15)


def test_hs2_induced_metric_and_s():
    r = 0.3
    j = hs2_jet(r)
    md = metric_at(PoincareDisk(), j.value)
    g, _ = induced_metric(j, md)
    # closed form ((1 + r^2)/(1 - r^2))^2 = 1.434730...
    assert g[0, 0] == pytest.approx(((1 + r * r) / (1 - r * r)) ** 2, rel=1e-14)
    assert g[0, 0] == pytest.approx(1.434730, abs=1e-6)
    assert s_tensor(j, md)[0, 0] == pytest.approx(1 - 4 * r * r / (1 - r * r) ** 2, rel=1e-14)
    assert s_tensor(j, md)[0, 0] == pytest.approx(0.565270, abs=1e-6)


def test_diagonal_pullback_sorted():
    # chart at height 1 in the half-plane makes g_N the identity
    j = jet([0.0, 1.0], np.diag([math.sqrt(0.5), math.sqrt(0.2)]))
    lam2 = singular_values(j, metric_at(UpperHalfPlane(), j.value))
    np.testing.assert_allclose(lam2, [0.2, 0.5], rtol=1e-14)


@pytest.mark.parametrize("lam2,expected", [(0.0, 1.0), (1.0, 0.0), (1 / 3, 0.5)])
def test_s_eigenvalue_examples(lam2, expected):
    assert s_eigenvalues(np.array([lam2]))[0] == pytest.approx(expected, abs=1e-15)


def test_projection_jacobian_examples():
    assert projection_jacobian(np.zeros(3)) == 1.0
    assert projection_jacobian(np.array([1.0, 1.0])) == pytest.approx(0.5, abs=1e-15)
    assert projection_jacobian(np.array([1 / 3])) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


def test_zero_jet_frames():
    j = jet([0.0, 0.0], np.zeros((2, 1)))
    md = metric_at(Euclidean(2), j.value)
    fr = svd_frames(j, md)
    np.testing.assert_allclose(np.abs(fr.tangent[:, 0]), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(np.abs(fr.normal.T) @ np.abs(fr.normal), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(np.diag(s_perp_matrix(j, md, fr)), [-1, -1], atol=1e-15)


def test_normal_value_and_mixed_pairing():
    lam = math.sqrt(1 / 3)
    j = jet([0.0], [[lam]])
    md = metric_at(Euclidean(1), j.value)
    fr = svd_frames(j, md)
    assert s_perp_matrix(j, md, fr)[0, 0] == pytest.approx(-0.5, abs=1e-15)
    S = product_s_metric(md, 1)
    mixed = fr.tangent[:, 0] @ S @ fr.normal[:, 0]
    assert abs(mixed) == pytest.approx(2 * lam / (1 + lam * lam), abs=1e-15)
    j1 = jet([0.0], [[1.0]])
    fr1 = svd_frames(j1, md)
    assert abs(fr1.tangent[:, 0] @ S @ fr1.normal[:, 0]) == pytest.approx(1.0, abs=1e-15)


def test_affine_map_is_totally_geodesic():
    j = jet([1.0, 2.0, 3.0], np.arange(6.0).reshape(3, 2))
    A = second_fundamental_form(j, Euclidean(3))
    H, hn2 = mean_curvature(j, Euclidean(3))
    assert np.max(np.abs(A)) == 0
    assert hn2 == 0


@pytest.mark.parametrize("d", [0.5, 1.0, 3.0])
def test_hs1_curvatures(d):
    j = jet([0.0, d], [[1.0], [0.0]])
    model = UpperHalfPlane()
    A = second_fundamental_form(j, model)
    np.testing.assert_allclose(A[:, 0, 0], [0, 0, 1 / d], atol=1e-15)
    H, hn2 = mean_curvature(j, model)
    np.testing.assert_allclose(H, [0, 0, d / (1 + d * d)], atol=1e-15)
    assert hn2 == pytest.approx(1 / (1 + d * d) ** 2, rel=1e-14)
    np.testing.assert_allclose(mcf_velocity(j, model), [0, d / (1 + d * d)], atol=1e-15)


def test_hs2_curvatures():
    r = 0.3
    j = hs2_jet(r)
    A = second_fundamental_form(j, PoincareDisk())
    assert A[3 - 1, 0, 0] == pytest.approx(-r * (1 + r * r) / (1 - r * r), rel=1e-13)
    assert A[2, 0, 0] == pytest.approx(-0.359341, abs=1e-6)
    _, hn2 = mean_curvature(j, PoincareDisk())
    assert hn2 == pytest.approx(4 * r * r / (1 + r * r) ** 2, rel=1e-13)
    assert hn2 == pytest.approx(0.303005, abs=1e-6)


@pytest.mark.parametrize("x", [0.0, 0.7, 2.0])
def test_hs3_maps_are_stationary(x):
    c, x0 = 0.5, 0.3
    e = math.exp(c * x)
    ja = MapJet(np.array([x0, e]), np.array([[0.0], [c * e]]), np.array([[[0.0]], [[c * c * e]]]))
    np.testing.assert_allclose(mcf_velocity(ja, UpperHalfPlane()), 0, atol=1e-15)
    th = math.tanh(c * x / 2)
    sech2 = 1 - th * th
    jb = MapJet(np.array([th, 0.0]), np.array([[c * sech2 / 2], [0.0]]),
                np.array([[[-c * c * th * sech2 / 2]], [[0.0]]]))
    np.testing.assert_allclose(mcf_velocity(jb, PoincareDisk()), 0, atol=1e-15)


def test_plane_curve_curvature_oracle():
    # graph of y = f(x) in the Euclidean plane: |H|^2 = f''^2 / (1 + f'^2)^3
    fp, fpp = 0.7, -1.3
    j = MapJet(np.array([0.2]), np.array([[fp]]), np.array([[[fpp]]]))
    _, hn2 = mean_curvature(j, Euclidean(1))
    assert hn2 == pytest.approx(fpp**2 / (1 + fp**2) ** 3, rel=1e-14)


def test_s_perp_theta_examples():
    j0 = jet([0.0, 0.5], np.zeros((2, 1)))
    assert s_perp_theta_max(j0, UpperHalfPlane(), 0.1) == pytest.approx(-1.0, abs=1e-15)
    j1 = jet([0.0], [[math.sqrt(1 / 3)]])
    assert s_perp_theta_max(j1, Euclidean(1), 0.1) == pytest.approx(-0.5, abs=1e-15)


def test_chart_violation_propagates():
    j = jet([0.0, -1.0], [[1.0], [0.0]])
    with pytest.raises(ChartViolation):
        second_fundamental_form(j, UpperHalfPlane())


def test_nan_jet_raises_eigen_failure():
    j = jet([0.0, 0.0], [[np.nan], [0.0]])
    with pytest.raises(EigenFailure):
        singular_values(j, metric_at(Euclidean(2), j.value))


def test_gauss_residual_examples():
    h = 1e-3
    rng = np.random.default_rng(3)
    affine = {"b": rng.normal(size=(2, 2)), "Q": np.zeros((2, 2, 2)), "T": np.zeros((2, 2, 2, 2))}
    assert gauss_residual(polynomial_jets(affine, [0.1, 0.2], h), h) <= 1e-12
    # f(x) = x1 x2 into Euclidean(1)
    saddle = {"b": np.zeros((1, 2)), "Q": np.array([[[0.0, 1.0], [1.0, 0.0]]]),
              "T": np.zeros((1, 2, 2, 2))}
    assert gauss_residual(polynomial_jets(saddle, [0.3, -0.2], h), h) <= 1e-5


def test_gauss_residual_order_on_a_cubic():
    coef = random_polynomial(np.random.default_rng(8), cubic=True)
    res = [gauss_residual(polynomial_jets(coef, [0.1, 0.1], h), h) for h in (4e-2, 2e-2, 1e-2)]
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert min(orders) >= 1.8


# --- independent oracles --------------------------------------------------------

@pytest.mark.parametrize("model,dist", [(UpperHalfPlane(), hyperbolic_distance_uhp),
                                        (PoincareDisk(), hyperbolic_distance_disk)])
def test_pullback_matches_distance_oracle(model, dist, rng):
    for _ in range(20):
        jets = random_contraction_jets(model, 1, 1, rng)
        p, v = jets.value[0], jets.d1[0, :, 0]
        delta = 1e-6
        speed = dist(p - delta * v, p + delta * v) / (2 * delta)
        lam2 = pullback(jets, metric_at(model, jets.value))[0, 0, 0]
        assert lam2 == pytest.approx(speed**2, rel=1e-6)


def _cayley_jets(j: MapJet) -> MapJet:
    """Push half-plane jets to the disk with the isometry w = (z - i)/(z + i)."""
    z = j.value[..., 0] + 1j * j.value[..., 1]
    dz = j.d1[..., 0, :] + 1j * j.d1[..., 1, :]
    ddz = j.d2[..., 0, :, :] + 1j * j.d2[..., 1, :, :]
    w = (z - 1j) / (z + 1j)
    w1 = 2j / (z + 1j) ** 2
    w2 = -4j / (z + 1j) ** 3
    dw = w1[..., None] * dz
    ddw = w2[..., None, None] * dz[..., :, None] * dz[..., None, :] + w1[..., None, None] * ddz
    return MapJet(np.stack([w.real, w.imag], -1), np.stack([dw.real, dw.imag], -2),
                  np.stack([ddw.real, ddw.imag], -3))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_isometry_invariance(m, rng):
    ju = random_contraction_jets(UpperHalfPlane(), m, 200, rng)
    jd = _cayley_jets(ju)
    gu, gd = geometry(ju, UpperHalfPlane()), geometry(jd, PoincareDisk())
    np.testing.assert_allclose(gd.g, gu.g, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(gd.lambda2, gu.lambda2, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(gd.H_norm2, gu.H_norm2, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(gd.u, gu.u, rtol=1e-10)
    tu = s_perp_theta_max(ju, UpperHalfPlane(), 0.2)
    td = s_perp_theta_max(jd, PoincareDisk(), 0.2)
    np.testing.assert_allclose(td, tu, rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("m,n", [(1, 2), (2, 1), (2, 3), (3, 2)])
def test_euclidean_second_fundamental_form_oracle(m, n, rng):
    """In a flat target A is the orthogonal-complement projection of d2F."""
    for _ in range(10):
        j = jet(rng.normal(size=n), rng.normal(size=(n, m)), None)
        d2 = rng.normal(size=(n, m, m))
        j = MapJet(j.value, j.d1, 0.5 * (d2 + np.swapaxes(d2, 1, 2)))
        T = np.vstack([np.eye(m), j.d1])
        Q, _ = np.linalg.qr(T)
        P = np.eye(m + n) - Q @ Q.T
        R = np.concatenate([np.zeros((m, m, m)), j.d2])
        expected = np.einsum("cd,dij->cij", P, R)
        np.testing.assert_allclose(second_fundamental_form(j, Euclidean(n)), expected, atol=1e-12)


# --- properties -------------------------------------------------------------------

MODELS = {"euclidean": Euclidean(3), "uhp": UpperHalfPlane(), "disk": PoincareDisk(),
          "product": Product((UpperHalfPlane(), PoincareDisk()))}


@st.composite
def contraction_jets(draw):
    name = draw(st.sampled_from(sorted(MODELS)))
    m = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    model = MODELS[name]
    return model, random_contraction_jets(model, m, 8, np.random.default_rng(seed))


@given(contraction_jets())
def test_pointwise_invariants(case):
    model, j = case
    geo = geometry(j, model)
    md = metric_at(model, j.value)
    np.testing.assert_allclose(geo.g, np.swapaxes(geo.g, -1, -2), atol=0)
    assert np.all(np.linalg.eigvalsh(geo.g) > 0)
    np.testing.assert_allclose(geo.g, np.eye(j.m) + pullback(j, md), atol=0)
    assert np.all(geo.lambda2 >= 0)
    assert np.all(np.diff(geo.lambda2, axis=-1) >= 0)
    assert np.all(np.diff(geo.s_eigs, axis=-1) <= 0)
    assert np.all(np.abs(geo.s_eigs) <= 1)
    assert np.all((geo.u > 0) & (geo.u <= 1))
    np.testing.assert_allclose(geo.u, 1 / np.sqrt(np.linalg.det(geo.g)), rtol=1e-12)
    # s-eigenvalues are the eigenvalues of s relative to g
    rel = np.sort(np.linalg.eigvals(np.linalg.solve(geo.g, geo.s)).real, axis=-1)[..., ::-1]
    np.testing.assert_allclose(geo.s_eigs, rel, atol=1e-12)


@given(contraction_jets())
def test_mean_curvature_is_normal(case):
    model, j = case
    md = metric_at(model, j.value)
    H, hn2 = mean_curvature(j, model)
    G = product_metric(md, j.m)
    T = tangent_vectors(j)
    ip = np.einsum("...c,...cd,...dk->...k", H, G, T)
    tn = np.sqrt(np.einsum("...ck,...cd,...dk->...k", T, G, T))
    assert np.all(np.abs(ip) / tn <= 1e-10 * (np.sqrt(hn2)[..., None] + 1))


@given(contraction_jets())
def test_velocity_projects_to_mean_curvature(case):
    model, j = case
    md = metric_at(model, j.value)
    H, hn2 = mean_curvature(j, model)
    V = mcf_velocity(j, model)
    amb = np.concatenate([np.zeros(j.batch_shape + (j.m,)), V], -1)
    P = normal_projection(amb, j, md)
    G = product_metric(md, j.m)
    err = np.sqrt(pair(G, P - H, P - H))
    assert np.all(err <= 1e-9 * np.maximum(np.sqrt(hn2), 1e-300))


@given(contraction_jets())
def test_two_routes_to_second_fundamental_form(case):
    model, j = case
    a = second_fundamental_form(j, model, "projection")
    b = second_fundamental_form(j, model, "christoffel")
    np.testing.assert_allclose(a, b, atol=1e-10 * (1 + np.max(np.abs(a))))
    np.testing.assert_allclose(a, np.swapaxes(a, -1, -2), atol=1e-12 * (1 + np.max(np.abs(a))))


@given(contraction_jets())
def test_frames_orthonormal_and_s_perp_values(case):
    model, j = case
    md = metric_at(model, j.value)
    fr = svd_frames(j, md)
    G = product_metric(md, j.m)
    E = np.concatenate([fr.tangent, fr.normal], -1)
    gram = np.einsum("...ck,...cd,...dl->...kl", E, G, E)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(j.m + j.n), gram.shape), atol=1e-10)
    sp = s_perp_matrix(j, md, fr)
    k = min(j.m, j.n)
    lam2 = np.zeros(j.batch_shape + (j.n,))
    lam2[..., :k] = fr.sv**2
    expected = -(1 - lam2) / (1 + lam2)
    np.testing.assert_allclose(np.diagonal(sp, axis1=-2, axis2=-1), expected, atol=1e-10)


@given(contraction_jets(), st.floats(1e-4, 1.0), st.floats(1e-4, 1.0))
def test_s_perp_theta_monotone_in_eps2(case, a, b):
    model, j = case
    lo, hi = sorted((a, b))
    assert np.all(s_perp_theta_max(j, model, lo) <= s_perp_theta_max(j, model, hi) + 1e-13)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_rank_matches_rank_revealing_oracle(m, n, rank, seed):
    rng = np.random.default_rng(seed)
    rank = min(rank, m, n)
    d1 = rng.normal(size=(n, rank)) @ rng.normal(size=(rank, m))
    j = jet(np.zeros(n), d1)
    lam2 = singular_values(j, metric_at(Euclidean(n), j.value))
    assert int(np.sum(lam2 > 1e-12)) == np.linalg.matrix_rank(d1)


@given(contraction_jets())
def test_induced_christoffel_matches_finite_differences(case):
    """Christoffel symbols of g from the chain rule versus differences of g along a quadratic path."""
    model, j = case
    j0 = j[0]
    h = 1e-5
    m = j0.m
    dg = []
    for k in range(m):
        mats = []
        for s in (1, -1):
            dx = np.zeros(m)
            dx[k] = s * h
            val = j0.value + j0.d1 @ dx + 0.5 * np.einsum("aij,i,j->a", j0.d2, dx, dx)
            d1 = j0.d1 + np.einsum("aij,j->ai", j0.d2, dx)
            mats.append(induced_metric(MapJet(val, d1, j0.d2), metric_at(model, val))[0])
        dg.append((mats[0] - mats[1]) / (2 * h))
    dg = np.array(dg)  # dg[k, i, j] = d_k g_ij
    first = 0.5 * (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
    g, gi = induced_metric(j0, metric_at(model, j0.value))
    expected = np.einsum("lk,kij->lij", gi, first)
    got = induced_christoffel(j0, metric_at(model, j0.value))
    np.testing.assert_allclose(got, expected, atol=1e-5 * (1 + np.max(np.abs(expected))))
