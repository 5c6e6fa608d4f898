"""Time-series monitors for the long-time behaviour of contraction flows.

Each :class:`MonitorRecord` summarises one flow state by grid sweeps; the
checks in :func:`check_theorem_a` compare a record sequence against the
preservation, monotonicity and decay statements for length-decreasing maps
into negatively curved targets.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .graphgeom import (
    _raw_hessian,
    geometry,
    induced_christoffel,
    induced_metric,
    s_perp_theta_max,
)
from .manifold import metric_at, sectional_bound

log = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "min_s_eig", "tr_s_min", "tr_s_bound", "H_norm2_max", "u_min",
               "decay_k2", "decay_k3", "s_perp_theta_max", "chart_clearance_min")

FALLBACK_EPS2 = 1e-3


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    min_s_eig: float
    tr_s_min: float
    tr_s_bound: float | None
    H_norm2_max: float
    u_min: float
    decay: dict
    s_perp_theta_max: float
    chart_clearance_min: float

    def row(self) -> list:
        return [self.t, self.min_s_eig, self.tr_s_min, self.tr_s_bound, self.H_norm2_max,
                self.u_min, self.decay.get(2), self.decay.get(3), self.s_perp_theta_max,
                self.chart_clearance_min]


def trace_bound(t: float, m: int, inf_tr0: float, sigma: float) -> float:
    """Lower bound on tr(s) at time t for m > 1, inf tr(s)|_{t=0} < m - 1.

    Evaluated as ``m - 1 - 1/(C1 e^{sigma t/2} - 1)``, which is algebraically
    the same quotient and exact at t = 0.
    """
    if not (int(m) == m and m > 1):
        raise DomainError("trace bound needs integer m > 1")
    if not inf_tr0 < m - 1:
        raise DomainError("trace bound needs inf tr(s) < m - 1")
    if not sigma > 0:
        raise DomainError("trace bound needs sigma > 0")
    gap = (m - 1) - inf_tr0
    c1 = 1.0 + 1.0 / gap
    x = 0.5 * sigma * t
    if x > 700.0:
        # 1/denom is below 1e-300 here
        return float(m - 1)
    denom = (c1 - 1.0) + c1 * math.expm1(x)
    return (m - 1) - 1.0 / denom


def default_eps2(eps1: float, m: int) -> float:
    """min(2 eps1/m, eps1^2/m), taking the curvature constant as 1."""
    if eps1 <= 0:
        log.warning("initial data is not a strict contraction (min s-eigenvalue %.3g); "
                    "using eps2 = %g", eps1, FALLBACK_EPS2)
        return FALLBACK_EPS2
    return min(2.0 * eps1 / m, eps1 * eps1 / m)


def _grid_derivative(field, axis, h, periodic):
    if periodic:
        return (np.roll(field, -1, axis=axis) - np.roll(field, 1, axis=axis)) / (2.0 * h)
    return np.gradient(field, h, axis=axis, edge_order=2)


def _covariant_hessian(state, jets=None):
    """(nabla df)^a_ij on the grid plus the metric data used to build it."""
    from .flow import spatial_jets

    if jets is None:
        jets = spatial_jets(state)
    metricN = metric_at(state.model, jets.value)
    _, g_inv = induced_metric(jets, metricN)
    gam_g = induced_christoffel(jets, metricN, g_inv)
    T = _raw_hessian(jets, metricN) - np.einsum("...lij,...al->...aij", gam_g, jets.d1)
    return T, jets, metricN, g_inv, gam_g


def covariant_derivative_sup(state, k: int) -> float:
    """sup over the grid of |nabla^{k-1} df|^2 for k in {2, 3}.

    Domain indices are contracted with the induced metric, the target index
    with g_N. The Christoffel symbols of the induced metric come from the
    chain rule on the finite-difference jet; the extra derivative for k = 3
    is a centred grid difference.
    """
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    T, jets, metricN, g_inv, gam_g = _covariant_hessian(state)
    gN = metricN.g
    if k == 2:
        val = np.einsum("...ik,...jl,...ab,...aij,...bkl->...", g_inv, g_inv, gN, T, T)
        return float(np.max(val))
    grid = state.grid
    dT = np.stack([_grid_derivative(T, ax, h, per)
                   for ax, (h, per) in enumerate(zip(grid.spacing, grid.periodic))], axis=-3)
    # U^a_{kij} = d_k T^a_ij + Gamma_N^a_bc d_k f^b T^c_ij - Gamma^l_ki T^a_lj - Gamma^l_kj T^a_il
    U = dT
    U = U + np.einsum("...abc,...bk,...cij->...akij", metricN.christoffel, jets.d1, T)
    U = U - np.einsum("...lki,...alj->...akij", gam_g, T)
    U = U - np.einsum("...lkj,...ail->...akij", gam_g, T)
    val = np.einsum("...kp,...iq,...jr,...ab,...akij,...bpqr->...", g_inv, g_inv, g_inv, gN, U, U)
    return float(np.max(val))


def record(state, eps2: float, inf_tr0: float | None = None, sigma: float | None = None) -> MonitorRecord:
    """One monitor row from a full grid sweep."""
    from .flow import spatial_jets

    jets = spatial_jets(state)
    geo = geometry(jets, state.model)
    m = state.grid.m
    tr_s = np.einsum("...ij,...ij->...", geo.g_inv, geo.s)
    bound = None
    if sigma is None:
        sigma = sectional_bound(state.model)
    if inf_tr0 is not None and m > 1 and inf_tr0 < m - 1 and sigma > 0:
        bound = trace_bound(state.t, m, inf_tr0, sigma)
    decay = {k: state.t ** (k - 1) * covariant_derivative_sup(state, k) for k in (2, 3)}
    clearance = state.model.clearance(np.moveaxis(state.f, 0, -1))
    return MonitorRecord(
        t=float(state.t),
        min_s_eig=float(np.min(geo.s_eigs[..., -1])),
        tr_s_min=float(np.min(tr_s)),
        tr_s_bound=bound,
        H_norm2_max=float(np.max(geo.H_norm2)),
        u_min=float(np.min(geo.u)),
        decay=decay,
        s_perp_theta_max=float(np.max(s_perp_theta_max(jets, state.model, eps2))),
        chart_clearance_min=float(np.min(clearance)),
    )


@dataclass
class MonitorContext:
    """Run-level constants fixed from the initial state."""

    m: int
    n: int
    sigma: float
    eps1: float
    inf_tr0: float
    eps2: float

    @classmethod
    def from_initial(cls, state, eps2: float | None = None) -> "MonitorContext":
        from .flow import spatial_jets

        jets = spatial_jets(state)
        geo = geometry(jets, state.model)
        m = state.grid.m
        eps1 = float(np.min(geo.s_eigs[..., -1]))
        inf_tr0 = float(np.min(np.einsum("...ij,...ij->...", geo.g_inv, geo.s)))
        if eps2 is None:
            eps2 = default_eps2(eps1, m)
        return cls(m=m, n=state.n, sigma=sectional_bound(state.model), eps1=eps1,
                   inf_tr0=inf_tr0, eps2=eps2)

    def record(self, state) -> MonitorRecord:
        return record(state, self.eps2, self.inf_tr0, self.sigma)

    @property
    def bound_applies(self) -> bool:
        return self.m > 1 and self.inf_tr0 < self.m - 1 and self.sigma > 0


@dataclass
class ItemResult:
    passed: bool
    violations: list = field(default_factory=list)
    note: str = ""


@dataclass
class TheoremAReport:
    items: dict

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    def summary(self) -> str:
        lines = []
        for name, item in self.items.items():
            status = "PASS" if item.passed else "FAIL"
            extra = f" ({item.note})" if item.note else ""
            lines.append(f"  ({name}) {status}{extra}")
            for t, msg in item.violations[:5]:
                lines.append(f"      t={t:.6g}: {msg}")
        return "\n".join(lines)


def check_theorem_a(records, slack: float, eps2: float | None = None, n: int | None = None,
                    transient: float = 1.0, max_growth_fraction: float = 0.05) -> TheoremAReport:
    """Check items (i)-(iv) on a monitor time series.

    (i) the smallest s-eigenvalue never drops below its initial value;
    (ii) the minimal trace of s never decreases and stays above the explicit
    bound where one was recorded; (iii) max |H|^2 stays finite and below
    ``max(initial, n / eps2)``; (iv) the decay products do not grow after
    ``transient``. All comparisons allow ``slack``.
    """
    if len(records) < 2:
        raise ValueError("need at least two records")
    first = records[0]

    v1 = [(r.t, f"min s-eig {r.min_s_eig:.6g} < {first.min_s_eig:.6g} - slack")
          for r in records if not r.min_s_eig >= first.min_s_eig - slack]
    item1 = ItemResult(not v1, v1)

    v2 = []
    running = -math.inf
    bound_checked = False
    for r in records:
        if not r.tr_s_min >= running - slack:
            v2.append((r.t, f"tr(s) min {r.tr_s_min:.6g} fell below earlier {running:.6g}"))
        running = max(running, r.tr_s_min)
        if r.tr_s_bound is not None:
            bound_checked = True
            if not r.tr_s_min >= r.tr_s_bound - slack:
                v2.append((r.t, f"tr(s) min {r.tr_s_min:.6g} below bound {r.tr_s_bound:.6g}"))
    item2 = ItemResult(not v2, v2, "" if bound_checked else "explicit bound not applicable; monotonicity only")

    cap = first.H_norm2_max
    if eps2 is not None and n is not None:
        cap = max(cap, n / eps2)
    v3 = [(r.t, f"|H|^2 max {r.H_norm2_max:.6g} > cap {cap:.6g}")
          for r in records if not (math.isfinite(r.H_norm2_max) and r.H_norm2_max <= cap + slack)]
    item3 = ItemResult(not v3, v3)

    v4 = []
    for k in sorted(first.decay):
        vals = [(r.t, r.decay[k]) for r in records]
        if not all(math.isfinite(v) for _, v in vals):
            v4.append((next(t for t, v in vals if not math.isfinite(v)), f"k={k} decay product not finite"))
            continue
        late = [(t, v) for t, v in vals if t >= transient]
        pairs = list(zip(late, late[1:]))
        ups = [(t1, v1_ - v0) for (t0, v0), (t1, v1_) in pairs if v1_ > v0 + slack]
        if pairs and len(ups) / len(pairs) > max_growth_fraction:
            v4.extend((t, f"k={k} decay product grew by {dv:.3g}") for t, dv in ups)
    item4 = ItemResult(not v4, v4)

    return TheoremAReport({"i": item1, "ii": item2, "iii": item3, "iv": item4})


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v))


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([_fmt(v) for v in r.row()])


def read_csv(path) -> list:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            def val(key):
                return float(row[key]) if row[key] != "" else None
            out.append(MonitorRecord(
                t=val("t"), min_s_eig=val("min_s_eig"), tr_s_min=val("tr_s_min"),
                tr_s_bound=val("tr_s_bound"), H_norm2_max=val("H_norm2_max"), u_min=val("u_min"),
                decay={2: val("decay_k2"), 3: val("decay_k3")},
                s_perp_theta_max=val("s_perp_theta_max"),
                chart_clearance_min=val("chart_clearance_min")))
    return out
