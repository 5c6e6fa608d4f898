"""Chart-based target manifolds: metric, Christoffel symbols, curvature bound.

All evaluators are vectorised over leading axes: a chart point array of shape
``(..., n)`` produces metric arrays of shape ``(..., n, n)`` and Christoffel
arrays of shape ``(..., n, n, n)`` indexed as ``christoffel[..., a, b, c]`` for
the symbol with upper index ``a`` and lower indices ``b, c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartViolation, ConfigError

DEFAULT_MARGIN = 1e-6


@dataclass(frozen=True)
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    christoffel: np.ndarray
    sec_upper_bound: float


class ManifoldModel:
    """Base class; subclasses provide the chart formulas."""

    dim: int
    chart_margin: float = DEFAULT_MARGIN

    def _metric(self, y):
        raise NotImplementedError

    def clearance(self, y) -> np.ndarray:
        """Distance-like clearance from the chart boundary (``inf`` for global charts)."""
        y = np.asarray(y, dtype=float)
        return np.full(y.shape[:-1], np.inf)

    @property
    def sigma(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Euclidean(ManifoldModel):
    n: int = 2
    chart_margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Euclidean dimension must be >= 1")

    @property
    def dim(self):
        return self.n

    def _metric(self, y):
        shape = y.shape[:-1]
        eye = np.broadcast_to(np.eye(self.n), shape + (self.n, self.n)).copy()
        gam = np.zeros(shape + (self.n,) * 3)
        return eye, eye.copy(), gam


@dataclass(frozen=True)
class UpperHalfPlane(ManifoldModel):
    chart_margin: float = DEFAULT_MARGIN

    dim = 2

    @property
    def sigma(self):
        return 1.0

    def clearance(self, y):
        return np.asarray(y, dtype=float)[..., 1]

    def _metric(self, y):
        y2 = y[..., 1]
        shape = y.shape[:-1]
        eye = np.eye(2)
        g = eye * (1.0 / y2**2)[..., None, None]
        g_inv = eye * (y2**2)[..., None, None]
        gam = np.zeros(shape + (2, 2, 2))
        k = -1.0 / y2
        gam[..., 0, 0, 1] = k
        gam[..., 0, 1, 0] = k
        gam[..., 1, 0, 0] = -k
        gam[..., 1, 1, 1] = k
        return g, g_inv, gam


@dataclass(frozen=True)
class PoincareDisk(ManifoldModel):
    chart_margin: float = DEFAULT_MARGIN

    dim = 2

    @property
    def sigma(self):
        return 1.0

    def clearance(self, y):
        y = np.asarray(y, dtype=float)
        return 1.0 - np.hypot(y[..., 0], y[..., 1])

    def _metric(self, y):
        x1, x2 = y[..., 0], y[..., 1]
        q = 1.0 - (x1**2 + x2**2)
        eye = np.eye(2)
        g = eye * (4.0 / q**2)[..., None, None]
        g_inv = eye * (q**2 / 4.0)[..., None, None]
        a = 2.0 * x1 / q
        b = 2.0 * x2 / q
        # Gamma^1 = [[a, b], [b, -a]], Gamma^2 = [[-b, a], [a, b]] with a = 2x/(1-r^2), b = 2y/(1-r^2)
        gam = np.array([[[a, b], [b, -a]], [[-b, a], [a, b]]])
        k = gam.ndim - 3
        gam = gam.transpose(tuple(range(3, 3 + k)) + (0, 1, 2))
        return g, g_inv, gam


@dataclass(frozen=True)
class Product(ManifoldModel):
    factors: tuple = field(default_factory=tuple)
    chart_margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if len(self.factors) == 0:
            raise ValueError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def dim(self):
        return sum(fac.dim for fac in self.factors)

    @property
    def sigma(self):
        # Any 2-plane spanned by vectors from different factors is flat.
        if len(self.factors) > 1:
            return 0.0
        return self.factors[0].sigma

    def _slices(self):
        start = 0
        for fac in self.factors:
            yield fac, slice(start, start + fac.dim)
            start += fac.dim

    def clearance(self, y):
        y = np.asarray(y, dtype=float)
        return np.min([fac.clearance(y[..., sl]) for fac, sl in self._slices()], axis=0)

    def _metric(self, y):
        n = self.dim
        shape = y.shape[:-1]
        g = np.zeros(shape + (n, n))
        g_inv = np.zeros(shape + (n, n))
        gam = np.zeros(shape + (n, n, n))
        for fac, sl in self._slices():
            fg, fgi, fgam = fac._metric(y[..., sl])
            g[..., sl, sl] = fg
            g_inv[..., sl, sl] = fgi
            gam[..., sl, sl, sl] = fgam
        return g, g_inv, gam


def chart_contains(model: ManifoldModel, y, margin: float = 0.0):
    """True where ``y`` lies in the chart with at least ``margin`` clearance.

    For the half-plane the clearance is the height ``y^2``; for the disk it is
    ``1 - r``. Euclidean charts always contain every point.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    clear = model.clearance(y)
    ok = clear >= margin
    if isinstance(model, UpperHalfPlane) or isinstance(model, PoincareDisk):
        ok &= clear > 0
    elif isinstance(model, Product):
        ok &= np.all(
            [chart_contains(fac, np.asarray(y, dtype=float)[..., sl], 0.0)
             for fac, sl in model._slices()], axis=0)
    return ok if np.ndim(ok) else bool(ok)


def metric_at(model: ManifoldModel, y, check: bool = True) -> MetricData:
    """Analytic metric data of ``model`` at chart point(s) ``y``.

    ``check=False`` skips the chart test for callers that validated ``y``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != model.dim:
        raise ValueError(f"chart point has {y.shape[-1]} coordinates, model needs {model.dim}")
    inside = chart_contains(model, y, 0.0) if check else True
    if not np.all(inside):
        bad = np.argwhere(~np.atleast_1d(inside))[0]
        raise ChartViolation(f"point outside chart of {model!r} at index {tuple(bad)}")
    g, g_inv, gam = model._metric(y)
    return MetricData(g=g, g_inv=g_inv, christoffel=gam, sec_upper_bound=-model.sigma)


def sectional_bound(model: ManifoldModel) -> float:
    """sigma >= 0 with sec_N <= -sigma."""
    return model.sigma


def parse_model(spec: str, margin: float = DEFAULT_MARGIN) -> ManifoldModel:
    """Build a model from ``euclidean:<n>``, ``upper-half-plane``,
    ``poincare-disk`` or ``product:<spec>,<spec>,...``."""
    spec = spec.strip().lower()
    if spec.startswith("product:"):
        parts = [p for p in spec[len("product:"):].split(",") if p.strip()]
        if not parts:
            raise ConfigError("product needs at least one factor")
        return Product(tuple(parse_model(p, margin) for p in parts), chart_margin=margin)
    if spec.startswith("euclidean"):
        _, _, dim = spec.partition(":")
        try:
            n = int(dim) if dim else 1
        except ValueError:
            raise ConfigError(f"bad euclidean dimension in {spec!r}") from None
        if n < 1:
            raise ConfigError("euclidean dimension must be >= 1")
        return Euclidean(n, chart_margin=margin)
    if spec in ("upper-half-plane", "half-plane", "uhp"):
        return UpperHalfPlane(chart_margin=margin)
    if spec in ("poincare-disk", "disk"):
        return PoincareDisk(chart_margin=margin)
    raise ConfigError(f"unknown model spec {spec!r}")
