"""Pointwise geometry of the graph of f inside R^m x N.

Every function works on a single jet or on a batch: arrays carry arbitrary
leading axes, so a whole grid of jets is processed in one call. Index layout:

- ``jet.value``: ``(..., n)``
- ``jet.d1``: ``(..., n, m)`` with ``d1[..., a, i] = d_i f^a``
- ``jet.d2``: ``(..., n, m, m)`` with ``d2[..., a, i, j] = d_ij f^a``
- ambient vectors of R^m x N: ``(..., m + n)``, domain block first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure, SingularMetric
from .manifold import Euclidean, ManifoldModel, MetricData, metric_at

RANK_TOL = 1e-12


@dataclass(frozen=True)
class MapJet:
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        for name in ("value", "d1", "d2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n, m = self.d1.shape[-2:]
        if self.value.shape[-1] != n or self.d2.shape[-3:] != (n, m, m):
            raise ValueError("inconsistent jet shapes")

    @property
    def n(self) -> int:
        return self.d1.shape[-2]

    @property
    def m(self) -> int:
        return self.d1.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.value.shape[:-1]

    def __getitem__(self, idx):
        return MapJet(self.value[idx], self.d1[idx], self.d2[idx])


@dataclass(frozen=True)
class SVDFrames:
    """Adapted frames: ``tangent[..., :, i]`` and ``normal[..., :, k]`` are
    product-orthonormal ambient vectors; ``sv`` holds the singular values
    paired with the first ``min(m, n)`` tangent/normal vectors."""

    tangent: np.ndarray
    normal: np.ndarray
    sv: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class GraphPointGeometry:
    g: np.ndarray
    g_inv: np.ndarray
    s: np.ndarray
    lambda2: np.ndarray
    s_eigs: np.ndarray
    A: np.ndarray
    H: np.ndarray
    H_norm2: np.ndarray
    u: np.ndarray
    normal_frame: np.ndarray


def pullback(jet: MapJet, metricN: MetricData) -> np.ndarray:
    """f^* g_N as an ``(..., m, m)`` array."""
    return np.einsum("...ab,...ai,...bj->...ij", metricN.g, jet.d1, jet.d1)


def _inv(mat):
    if not np.all(np.isfinite(mat)):
        raise SingularMetric("non-finite entries in metric")
    k = mat.shape[-1]
    if k == 1:
        if np.any(mat == 0):
            raise SingularMetric("zero 1x1 metric")
        return 1.0 / mat
    if k == 2:
        a, b, c, d = mat[..., 0, 0], mat[..., 0, 1], mat[..., 1, 0], mat[..., 1, 1]
        det = a * d - b * c
        if np.any(det == 0):
            raise SingularMetric("singular 2x2 metric")
        out = np.empty_like(mat)
        out[..., 0, 0] = d / det
        out[..., 0, 1] = -b / det
        out[..., 1, 0] = -c / det
        out[..., 1, 1] = a / det
        return out
    try:
        return np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(str(exc)) from exc


def induced_metric(jet: MapJet, metricN: MetricData):
    """Induced metric ``g = I + f^* g_N`` and its inverse."""
    g = np.eye(jet.m) + pullback(jet, metricN)
    return g, _inv(g)


def s_tensor(jet: MapJet, metricN: MetricData) -> np.ndarray:
    return np.eye(jet.m) - pullback(jet, metricN)


def _eigvalsh(mat):
    """Ascending eigenvalues of symmetric matrices; closed form for sizes 1 and 2."""
    if not np.all(np.isfinite(mat)):
        raise EigenFailure("non-finite matrix passed to eigensolver")
    k = mat.shape[-1]
    if k == 1:
        return mat[..., 0].copy()
    if k == 2:
        a, b, d = mat[..., 0, 0], 0.5 * (mat[..., 0, 1] + mat[..., 1, 0]), mat[..., 1, 1]
        mean = 0.5 * (a + d)
        rad = np.hypot(0.5 * (a - d), b)
        return np.stack([mean - rad, mean + rad], axis=-1)
    try:
        return np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc


def singular_values(jet: MapJet, metricN: MetricData) -> np.ndarray:
    """Squared singular values of df, ascending."""
    lam2 = _eigvalsh(pullback(jet, metricN))
    return np.clip(lam2, 0.0, None)


def s_eigenvalues(lambda2) -> np.ndarray:
    """Eigenvalues (1 - l^2)/(1 + l^2) of s relative to g, descending."""
    lambda2 = np.sort(np.asarray(lambda2, dtype=float), axis=-1)
    return (1.0 - lambda2) / (1.0 + lambda2)


def projection_jacobian(lambda2) -> np.ndarray:
    lambda2 = np.asarray(lambda2, dtype=float)
    return 1.0 / np.sqrt(np.prod(1.0 + lambda2, axis=-1))


def tangent_vectors(jet: MapJet) -> np.ndarray:
    """dF(d_i) as columns of an ``(..., m+n, m)`` array."""
    eye = np.broadcast_to(np.eye(jet.m), jet.batch_shape + (jet.m, jet.m))
    return np.concatenate([eye, jet.d1], axis=-2)


def product_metric(metricN: MetricData, m: int) -> np.ndarray:
    gN = metricN.g
    n = gN.shape[-1]
    out = np.zeros(gN.shape[:-2] + (m + n, m + n))
    out[..., :m, :m] = np.eye(m)
    out[..., m:, m:] = gN
    return out


def product_s_metric(metricN: MetricData, m: int) -> np.ndarray:
    """The split form s_{R^m x N} = g_{R^m} - g_N on ambient vectors."""
    out = product_metric(metricN, m)
    out[..., m:, m:] *= -1.0
    return out


def pair(G, v, w) -> np.ndarray:
    """Bilinear pairing ``v^T G w`` with batch broadcasting."""
    return np.einsum("...c,...cd,...d->...", v, G, w)


def svd_frames(jet: MapJet, metricN: MetricData) -> SVDFrames:
    """Tangent and normal frames adapted to the singular value decomposition.

    In g_N-orthonormal coordinates ``w = L^T v`` (``g_N = L L^T``) the
    differential becomes the Euclidean matrix ``B = L^T df``; its full SVD
    gives domain directions alpha_i and target directions beta_k with
    ``df(alpha_i) = lambda_i beta_i``. Directions beyond the rank get the
    pure-normal vectors ``0 + beta_k``.
    """
    m, n = jet.m, jet.n
    if not np.all(np.isfinite(jet.d1)) or not np.all(np.isfinite(metricN.g)):
        raise EigenFailure("non-finite jet or metric")
    L = np.linalg.cholesky(metricN.g)
    B = np.einsum("...ba,...bi->...ai", L, jet.d1)
    try:
        U, S, Vt = np.linalg.svd(B, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    S = np.where(S**2 < RANK_TOL, 0.0, S)
    k = min(m, n)
    alpha = np.swapaxes(Vt, -1, -2)  # columns alpha_i
    beta = np.linalg.solve(np.swapaxes(L, -1, -2), U)  # columns beta_k = L^{-T} u_k
    batch = jet.batch_shape

    sv_m = np.zeros(batch + (m,))
    sv_m[..., :k] = S[..., :k]
    sv_n = np.zeros(batch + (n,))
    sv_n[..., :k] = S[..., :k]

    # alpha_i + lambda_i beta_i, only the first k alphas have a beta partner
    beta_m = np.zeros(batch + (n, m))
    beta_m[..., :, :k] = beta[..., :, :k]
    tangent = np.concatenate([alpha, beta_m * sv_m[..., None, :]], axis=-2)
    tangent = tangent / np.sqrt(1.0 + sv_m**2)[..., None, :]

    alpha_n = np.zeros(batch + (m, n))
    alpha_n[..., :, :k] = alpha[..., :, :k]
    normal = np.concatenate([-alpha_n * sv_n[..., None, :], beta], axis=-2)
    normal = normal / np.sqrt(1.0 + sv_n**2)[..., None, :]
    return SVDFrames(tangent=tangent, normal=normal, sv=S[..., :k], alpha=alpha, beta=beta)


def _raw_hessian(jet: MapJet, metricN: MetricData) -> np.ndarray:
    """Target block of the ambient Hessian, d2 f + Gamma_N(df, df)."""
    gd = np.einsum("...abc,...cj->...abj", metricN.christoffel, jet.d1)
    return jet.d2 + np.einsum("...abj,...bi->...aij", gd, jet.d1)


def _ambient(jet: MapJet, target_block) -> np.ndarray:
    m = jet.m
    flat = np.zeros(jet.batch_shape + (m,) + target_block.shape[-2:])
    return np.concatenate([flat, target_block], axis=-3)


def induced_christoffel(jet: MapJet, metricN: MetricData, g_inv=None) -> np.ndarray:
    """Christoffel symbols ``[..., l, i, j]`` of the induced metric.

    Uses the chain rule on ``g_ij = delta_ij + g_N,ab(f) d_i f^a d_j f^b``;
    the metric derivative of g_N comes from its Christoffel symbols.
    """
    gN, gam = metricN.g, metricN.christoffel
    d1, d2 = jet.d1, jet.d2
    if g_inv is None:
        _, g_inv = induced_metric(jet, metricN)
    # d_c g_N,ab = g_ad Gamma^d_bc + g_bd Gamma^d_ac
    dgN = np.einsum("...ad,...dbc->...abc", gN, gam)
    dgN = dgN + np.swapaxes(dgN, -3, -2)
    # dg[..., k, i, j] = d_k g_ij
    dg = np.einsum("...abc,...ck,...ai,...bj->...kij", dgN, d1, d1, d1)
    t = np.einsum("...ab,...aik,...bj->...kij", gN, d2, d1)
    dg = dg + t + np.swapaxes(t, -2, -1)
    first = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
    return np.einsum("...lk,...kij->...lij", g_inv, first)


def second_fundamental_form(jet: MapJet, model: ManifoldModel, method: str = "projection") -> np.ndarray:
    """Second fundamental form ``A[..., c, i, j]`` in ambient chart components.

    ``method="projection"`` removes the tangential part of the ambient Hessian
    ``d2 F + Gamma_{RxN}(dF, dF)``; ``method="christoffel"`` subtracts
    ``dF(Gamma(g))`` computed explicitly from the jet. Both agree up to
    round-off and serve as mutual cross-checks.
    """
    metricN = metric_at(model, jet.value)
    g, g_inv = induced_metric(jet, metricN)
    R = _ambient(jet, _raw_hessian(jet, metricN))
    T = tangent_vectors(jet)
    if method == "projection":
        G = product_metric(metricN, jet.m)
        # <R_ij, dF_k>
        p = np.einsum("...cij,...cd,...dk->...ijk", R, G, T)
        coef = np.einsum("...ijk,...kl->...ijl", p, g_inv)
        return R - np.einsum("...cl,...ijl->...cij", T, coef)
    if method == "christoffel":
        gam_g = induced_christoffel(jet, metricN, g_inv)
        return R - np.einsum("...cl,...lij->...cij", T, gam_g)
    raise ValueError(f"unknown method {method!r}")


def mean_curvature(jet: MapJet, model: ManifoldModel):
    """Mean curvature vector ``H[..., c]`` and its product-metric norm squared."""
    metricN = metric_at(model, jet.value)
    _, g_inv = induced_metric(jet, metricN)
    A = second_fundamental_form(jet, model)
    H = np.einsum("...ij,...cij->...c", g_inv, A)
    G = product_metric(metricN, jet.m)
    return H, pair(G, H, H)


def mcf_velocity(jet: MapJet, model: ManifoldModel, metricN: MetricData | None = None,
                 g_inv: np.ndarray | None = None) -> np.ndarray:
    """Right-hand side of the nonparametric flow equation, ``(..., n)``."""
    if metricN is None:
        metricN = metric_at(model, jet.value)
    if g_inv is None:
        _, g_inv = induced_metric(jet, metricN)
    return np.einsum("...ij,...aij->...a", g_inv, _raw_hessian(jet, metricN))


def normal_projection(v, jet: MapJet, metricN: MetricData) -> np.ndarray:
    """pr^perp of an ambient vector field ``v[..., c]``."""
    _, g_inv = induced_metric(jet, metricN)
    G = product_metric(metricN, jet.m)
    T = tangent_vectors(jet)
    p = np.einsum("...c,...cd,...dk->...k", v, G, T)
    return v - np.einsum("...cl,...k,...kl->...c", T, p, g_inv)


def s_perp_matrix(jet: MapJet, metricN: MetricData, frames: SVDFrames | None = None) -> np.ndarray:
    """``s^perp(xi_j, xi_k)`` on the adapted normal frame, ``(..., n, n)``."""
    if frames is None:
        frames = svd_frames(jet, metricN)
    S = product_s_metric(metricN, jet.m)
    return np.einsum("...cj,...cd,...dk->...jk", frames.normal, S, frames.normal)


def s_perp_theta_max(jet: MapJet, model: ManifoldModel, eps2: float) -> np.ndarray:
    """Largest eigenvalue of ``s^perp + eps2 * theta`` on the normal bundle."""
    if eps2 <= 0:
        raise ValueError("eps2 must be positive")
    metricN = metric_at(model, jet.value)
    frames = svd_frames(jet, metricN)
    sperp = s_perp_matrix(jet, metricN, frames)
    H, _ = mean_curvature(jet, model)
    G = product_metric(metricN, jet.m)
    h = np.einsum("...c,...cd,...dk->...k", H, G, frames.normal)
    M = sperp + eps2 * h[..., :, None] * h[..., None, :]
    return _eigvalsh(0.5 * (M + np.swapaxes(M, -1, -2)))[..., -1]


def geometry(jet: MapJet, model: ManifoldModel) -> GraphPointGeometry:
    """All pointwise quantities in one pass."""
    metricN = metric_at(model, jet.value)
    g, g_inv = induced_metric(jet, metricN)
    lam2 = singular_values(jet, metricN)
    A = second_fundamental_form(jet, model)
    H = np.einsum("...ij,...cij->...c", g_inv, A)
    G = product_metric(metricN, jet.m)
    frames = svd_frames(jet, metricN)
    return GraphPointGeometry(
        g=g,
        g_inv=g_inv,
        s=s_tensor(jet, metricN),
        lambda2=lam2,
        s_eigs=s_eigenvalues(lam2),
        A=A,
        H=H,
        H_norm2=pair(G, H, H),
        u=projection_jacobian(lam2),
        normal_frame=frames.normal,
    )


def gauss_residual(jets: MapJet, h: float, model: ManifoldModel | None = None) -> float:
    """|Rm(d1,d2,d1,d2) - (<A11,A22> - |A12|^2)| at the centre of a 3x3 stencil.

    ``jets`` has batch shape ``(3, 3)``; ``jets[i, j]`` is the jet at
    ``x0 + h*((i-1), (j-1))``. The intrinsic side uses second-order finite
    differences of the induced metric over the stencil; the extrinsic side
    uses the exact second fundamental form at the centre. Curvature sign
    convention: ``Rm(d1, d2, d1, d2) = K det g``, so a convex paraboloid gives
    a positive value on both sides.
    """
    if model is None:
        model = Euclidean(jets.n)
    if not isinstance(model, Euclidean):
        raise ValueError("gauss_residual needs a flat target")
    if jets.m != 2 or jets.batch_shape != (3, 3):
        raise ValueError("need m = 2 jets on a 3x3 stencil")
    metricN = metric_at(model, jets.value)
    g, _ = induced_metric(jets, metricN)
    c = g[1, 1]
    dg = np.stack([(g[2, 1] - g[0, 1]) / (2 * h), (g[1, 2] - g[1, 0]) / (2 * h)])
    g11_22 = (g[1, 2, 0, 0] - 2 * c[0, 0] + g[1, 0, 0, 0]) / h**2
    g22_11 = (g[2, 1, 1, 1] - 2 * c[1, 1] + g[0, 1, 1, 1]) / h**2
    g12_12 = (g[2, 2, 0, 1] - g[2, 0, 0, 1] - g[0, 2, 0, 1] + g[0, 0, 0, 1]) / (4 * h**2)
    # first-kind symbols Gamma_{k,ij} = (d_i g_kj + d_j g_ki - d_k g_ij) / 2
    gam1 = 0.5 * (np.einsum("ikj->kij", dg) + np.einsum("jki->kij", dg) - dg)
    cinv = np.linalg.inv(c)
    quad = np.einsum("pq,p,q->", cinv, gam1[:, 0, 1], gam1[:, 0, 1]) - np.einsum(
        "pq,p,q->", cinv, gam1[:, 0, 0], gam1[:, 1, 1])
    intrinsic = 0.5 * (2 * g12_12 - g11_22 - g22_11) + quad
    A = second_fundamental_form(jets[1, 1], model)
    G = product_metric(metric_at(model, jets.value[1, 1]), 2)
    extrinsic = pair(G, A[:, 0, 0], A[:, 1, 1]) - pair(G, A[:, 0, 1], A[:, 0, 1])
    return float(abs(intrinsic - extrinsic))
