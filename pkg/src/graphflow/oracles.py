"""Closed-form reference solutions for the hyperbolic-plane examples.

Four families are provided, all for m = 1 maps into the hyperbolic plane:

- ``hs1``: horizontal line ``(x, d(t))`` in the upper half-plane drifting to
  infinity, with ``d`` given through the Lambert W function;
- ``hs2``: circle ``r(t) (sin x, cos x)`` in the Poincare disk shrinking to
  the origin;
- ``hs3a`` / ``hs3b``: stationary geodesic maps in the half-plane and disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .manifold import ManifoldModel, PoincareDisk, UpperHalfPlane

# Above this exponent exp(z) overflows; solve w + log(w) = z instead.
_LOG_SWITCH = 700.0


def lambert_w(x: float) -> float:
    """Principal branch W(x) for x >= 0 by Halley iteration from log(1 + x)."""
    x = float(x)
    if x < 0 or math.isnan(x):
        raise ValueError("lambert_w is only implemented for x >= 0")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    w = math.log1p(x)
    for _ in range(100):
        ew = math.exp(w)
        fval = w * ew - x
        wp1 = w + 1.0
        dw = fval / (ew * wp1 - (w + 2.0) * fval / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def lambert_w_exp(z: float) -> float:
    """W(exp(z)) without forming exp(z) when it would overflow.

    For large z the equation ``w e^w = e^z`` is solved in log form,
    ``w + log(w) = z``, by Newton iteration from ``z - log(z)``.
    """
    if z <= _LOG_SWITCH:
        return lambert_w(math.exp(z))
    w = z - math.log(z)
    for _ in range(50):
        dw = (w + math.log(w) - z) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 4e-16 * w:
            break
    return w


def hs1_t0(d0: float) -> float:
    """Shift t0 making d(0) = d0: t0 = -1/2 ln(d0^2 exp(d0^2))."""
    return -0.5 * (2.0 * math.log(d0) + d0 * d0)


def hs1_d(t: float, t0: float) -> float:
    return math.sqrt(lambert_w_exp(2.0 * (t - t0)))


def hs1_H_norm2(d: float) -> float:
    return 1.0 / (1.0 + d * d) ** 2


def hs2_c1(r0: float) -> float:
    """The constant c1 with hs2_r(0, c1) = r0."""
    if not 0.0 < r0 < 1.0:
        raise ValueError("r0 must lie in (0, 1)")
    return (1.0 - r0 * r0) / r0


def hs2_r(t, c1: float):
    """Radius of the shrinking circle, in a cancellation-free form."""
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    x = c1 * np.exp(t)
    r = 2.0 / (np.sqrt(x * x + 4.0) + x)
    return float(r) if np.ndim(r) == 0 else r


def hs2_H_norm2(r):
    r2 = np.asarray(r, dtype=float) ** 2
    out = 4.0 * r2 / (1.0 + r2) ** 2
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ExampleSpec:
    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ident = self.id.lower()
        object.__setattr__(self, "id", ident)
        if ident not in ORACLES:
            raise ValueError(f"unknown example id {self.id!r}")
        p = dict(ORACLES[ident].defaults)
        p.update(self.params)
        object.__setattr__(self, "params", p)
        if ident == "hs2" and p["c1"] <= 0:
            raise ValueError("hs2 needs c1 > 0")
        if ident in ("hs3a", "hs3b") and not 0.0 <= p["c"] <= 1.0:
            raise ValueError("hs3 needs 0 <= c <= 1")


def hs3_map(spec: ExampleSpec, x):
    """Stationary maps: ``(x0, exp(c x))`` in the half-plane or
    ``(tanh(c x / 2), 0)`` in the disk. Returns shape ``x.shape + (2,)``."""
    x = np.asarray(x, dtype=float)
    c = spec.params["c"]
    if spec.id == "hs3a":
        return np.stack([np.full_like(x, spec.params["x0"]), np.exp(c * x)], axis=-1)
    if spec.id == "hs3b":
        return np.stack([np.tanh(0.5 * c * x), np.zeros_like(x)], axis=-1)
    raise ValueError("hs3_map needs an hs3a or hs3b spec")


@dataclass(frozen=True)
class Oracle:
    """Exact solution ``field(params, t, x) -> (n,) + x.shape`` of an example."""

    id: str
    model: type
    defaults: dict
    field: object

    def make_model(self, margin: float | None = None) -> ManifoldModel:
        return self.model() if margin is None else self.model(chart_margin=margin)


def _hs1_field(p, t, x):
    d = hs1_d(t, p["t0"])
    return np.stack([np.asarray(x, dtype=float), np.full(np.shape(x), d)])


def _hs2_field(p, t, x):
    r = hs2_r(t, p["c1"])
    return np.stack([r * np.sin(x), r * np.cos(x)])


def _hs3_field(ident):
    def fieldfn(p, t, x):
        return np.moveaxis(hs3_map(ExampleSpec(ident, p), x), -1, 0)
    return fieldfn


ORACLES = {
    "hs1": Oracle("hs1", UpperHalfPlane, {"t0": hs1_t0(1.0)}, _hs1_field),
    "hs2": Oracle("hs2", PoincareDisk, {"c1": hs2_c1(0.3)}, _hs2_field),
    "hs3a": Oracle("hs3a", UpperHalfPlane, {"x0": 0.0, "c": 0.5}, _hs3_field("hs3a")),
    "hs3b": Oracle("hs3b", PoincareDisk, {"c": 0.5}, _hs3_field("hs3b")),
}


def get_oracle(ident: str) -> Oracle:
    try:
        return ORACLES[ident.lower()]
    except KeyError:
        raise ValueError(f"unknown oracle id {ident!r}") from None


def example_jet(spec: ExampleSpec, t: float, x):
    """Exact 2-jet of an example map at domain point(s) ``x`` (m = 1)."""
    from .graphgeom import MapJet

    x = np.asarray(x, dtype=float)
    p = spec.params
    zeros = np.zeros_like(x)
    if spec.id == "hs1":
        d = hs1_d(t, p["t0"])
        val = np.stack([x, zeros + d], -1)
        d1 = np.stack([zeros + 1.0, zeros], -1)
        d2 = np.stack([zeros, zeros], -1)
    elif spec.id == "hs2":
        r = hs2_r(t, p["c1"])
        s, c = np.sin(x), np.cos(x)
        val = np.stack([r * s, r * c], -1)
        d1 = np.stack([r * c, -r * s], -1)
        d2 = -val
    elif spec.id == "hs3a":
        c = p["c"]
        e = np.exp(c * x)
        val = np.stack([zeros + p["x0"], e], -1)
        d1 = np.stack([zeros, c * e], -1)
        d2 = np.stack([zeros, c * c * e], -1)
    else:
        c = p["c"]
        th = np.tanh(0.5 * c * x)
        sech2 = 1.0 - th * th
        val = np.stack([th, zeros], -1)
        d1 = np.stack([0.5 * c * sech2, zeros], -1)
        d2 = np.stack([-0.5 * c * c * th * sech2, zeros], -1)
    return MapJet(val, d1[..., None], d2[..., None, None])
