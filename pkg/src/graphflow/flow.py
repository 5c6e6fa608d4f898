"""Explicit finite-difference integration of graphical mean curvature flow.

The unknown is the map f sampled on a uniform grid of dimension m in {1, 2},
stored as an array of shape ``(n, *grid.shape)``. Spatial derivatives use
second-order central differences with one layer of ghost cells; time stepping
is forward Euler (default) or classical RK4.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ChartExit, ChartViolation, FlowError, NumericalBlowup, RangeViolation
from .graphgeom import MapJet, _eigvalsh, _inv, mcf_velocity, pullback, singular_values
from .manifold import ManifoldModel, chart_contains, metric_at, parse_model
from .oracles import get_oracle

log = logging.getLogger(__name__)

CHECKPOINT_HEADER = "GRAPHFLOW v1"


@dataclass(frozen=True)
class Grid:
    """Uniform grid. Periodic axes exclude the upper endpoint; bounded axes
    include both endpoints, so ``h = (hi - lo) / (points - 1)`` there."""

    extents: tuple
    points: tuple
    periodic: tuple

    def __post_init__(self):
        ext = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        pts = tuple(int(p) for p in self.points)
        per = tuple(bool(p) for p in self.periodic)
        if not (len(ext) == len(pts) == len(per)) or len(ext) not in (1, 2):
            raise ValueError("grid must have 1 or 2 axes with matching extents/points/periodic")
        if any(p < 8 for p in pts):
            raise ValueError("need at least 8 points per axis")
        if any(hi <= lo for lo, hi in ext):
            raise ValueError("grid extents must be increasing")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "periodic", per)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / (p if per else p - 1)
                     for (lo, hi), p, per in zip(self.extents, self.points, self.periodic))

    def axes(self, ghost: int = 0) -> list:
        out = []
        for (lo, _), p, h in zip(self.extents, self.points, self.spacing):
            out.append(lo + h * np.arange(-ghost, p + ghost))
        return out

    def mesh(self, ghost: int = 0) -> list:
        return np.meshgrid(*self.axes(ghost), indexing="ij")

    def to_dict(self):
        return {"extents": self.extents, "points": self.points, "periodic": self.periodic}


@dataclass(frozen=True)
class BoundaryCondition:
    """Ghost-cell policy on non-periodic axes.

    ``kind`` is ``"periodic"``, ``"dirichlet"`` (ghosts from a registered
    exact solution) or ``"extrapolate"`` (linear extrapolation of f).
    """

    kind: str = "periodic"
    oracle: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("periodic", "dirichlet", "extrapolate"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet":
            if self.oracle is None:
                raise ValueError("dirichlet boundary needs an oracle id")
            get_oracle(self.oracle)


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.2
    dt_max: float = 1e-2
    t_end: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if self.dt_max <= 0:
            raise ValueError("dt_max must be positive")


@dataclass
class FlowState:
    grid: Grid
    f: np.ndarray
    t: float
    model: ManifoldModel
    bc: BoundaryCondition = field(default_factory=BoundaryCondition)
    stats: dict = field(default_factory=lambda: {"steps": 0, "last_dt": 0.0, "max_velocity": 0.0})
    workers: int = 1

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.shape != (self.model.dim,) + self.grid.shape:
            raise ValueError(f"f has shape {self.f.shape}, expected {(self.model.dim,) + self.grid.shape}")
        if self.bc.kind == "periodic" and not all(self.grid.periodic):
            raise ValueError("periodic boundary condition needs every axis periodic")
        check_state(self)

    @property
    def n(self) -> int:
        return self.f.shape[0]

    def copy(self) -> "FlowState":
        return replace(self, f=self.f.copy(), stats=dict(self.stats))


def _lead_to_back(a: np.ndarray, k: int) -> np.ndarray:
    """Move the first k axes to the end (a cheaper ``moveaxis`` for the hot loop)."""
    return a.transpose(tuple(range(k, a.ndim)) + tuple(range(k)))


def _back_to_lead(a: np.ndarray, k: int) -> np.ndarray:
    nd = a.ndim
    return a.transpose(tuple(range(nd - k, nd)) + tuple(range(nd - k)))


def check_state(state: FlowState) -> None:
    """Raise NumericalBlowup / ChartExit if the state is invalid."""
    f = state.f
    # a finite sum is the cheap common case; an overflowing sum falls through to the full test
    if not math.isfinite(float(f.sum())) and not np.all(np.isfinite(f)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(f).all(axis=0))[0])
        raise NumericalBlowup(f"non-finite values at grid index {bad}, t={state.t:.6g}",
                              t=state.t, index=bad)
    pts = _lead_to_back(f, 1)
    ok = chart_contains(state.model, pts, state.model.chart_margin)
    if not np.all(ok):
        clear = state.model.clearance(pts)
        worst = tuple(int(i) for i in np.unravel_index(np.argmin(clear), clear.shape))
        raise ChartExit(f"chart exit at grid index {worst}, t={state.t:.6g}, "
                        f"clearance {clear[worst]:.3g}", t=state.t, index=worst)


def initial_state(grid: Grid, model: ManifoldModel, field_fn, bc: BoundaryCondition | None = None,
                  t0: float = 0.0, workers: int = 1) -> FlowState:
    """Sample ``field_fn(*mesh) -> (n, *shape)`` on the grid."""
    f = np.asarray(field_fn(*grid.mesh()), dtype=float)
    if bc is None:
        bc = BoundaryCondition("periodic" if all(grid.periodic) else "extrapolate")
    return FlowState(grid=grid, f=f, t=t0, model=model, bc=bc, workers=workers)


def oracle_state(ident: str, grid: Grid, params: dict | None = None, t0: float = 0.0,
                 bc: BoundaryCondition | None = None, margin: float | None = None) -> FlowState:
    """State sampled from a registered exact solution at time t0 (m = 1)."""
    oracle = get_oracle(ident)
    p = dict(oracle.defaults)
    p.update(params or {})
    if grid.m != 1:
        raise ValueError("example oracles are one-dimensional")
    if bc is None:
        bc = (BoundaryCondition("periodic") if all(grid.periodic)
              else BoundaryCondition("dirichlet", ident, p))
    return initial_state(grid, oracle.make_model(margin),
                         lambda x: oracle.field(p, t0, x), bc, t0)


def _padded(state: FlowState, t: float | None = None, f: np.ndarray | None = None) -> np.ndarray:
    """f with one ghost layer on every axis."""
    grid, bc = state.grid, state.bc
    f = state.f if f is None else f
    t = state.t if t is None else t
    oracle_full = None
    if bc.kind == "dirichlet":
        oracle = get_oracle(bc.oracle)
        p = dict(oracle.defaults)
        p.update(bc.params)
        oracle_full = np.asarray(oracle.field(p, t, *grid.mesh(ghost=1)), dtype=float)
        pts = np.moveaxis(oracle_full, 0, -1)
        if not np.all(chart_contains(state.model, pts, 0.0)):
            raise ChartViolation(f"boundary oracle {bc.oracle!r} leaves the chart at t={t:.6g}")
    out = f
    for ax in range(grid.m):
        a = ax + 1
        if grid.periodic[ax]:
            out = np.concatenate([np.take(out, [-1], axis=a), out, np.take(out, [0], axis=a)], axis=a)
        elif bc.kind == "dirichlet":
            # axes after this one are not padded yet: drop their ghosts
            src = oracle_full
            for b in range(ax + 1, grid.m):
                idx = [slice(None)] * src.ndim
                idx[b + 1] = slice(1, -1)
                src = src[tuple(idx)]
            lo = np.take(src, [0], axis=a)
            hi = np.take(src, [-1], axis=a)
            out = np.concatenate([lo, out, hi], axis=a)
        else:
            first, second = np.take(out, [0], axis=a), np.take(out, [1], axis=a)
            last, prev = np.take(out, [-1], axis=a), np.take(out, [-2], axis=a)
            out = np.concatenate([2 * first - second, out, 2 * last - prev], axis=a)
    return out


def _jets_from_padded(P: np.ndarray, h: tuple) -> MapJet:
    n = P.shape[0]
    m = P.ndim - 1
    core = tuple([slice(None)] + [slice(1, -1)] * m)

    def shifted(offsets):
        idx = [slice(None)]
        for o in offsets:
            idx.append(slice(1 + o, P.shape[len(idx)] - 1 + o))
        return P[tuple(idx)]

    center = P[core]
    shape = center.shape[1:]
    d1 = np.empty((n, m) + shape)
    d2 = np.empty((n, m, m) + shape)
    for i in range(m):
        e = [0] * m
        e[i] = 1
        plus = shifted(e)
        e[i] = -1
        minus = shifted(e)
        d1[:, i] = (plus - minus) / (2 * h[i])
        d2[:, i, i] = (plus - 2 * center + minus) / h[i] ** 2
        for j in range(i + 1, m):
            def off(si, sj):
                o = [0] * m
                o[i], o[j] = si, sj
                return shifted(o)
            mixed = (off(1, 1) - off(1, -1) - off(-1, 1) + off(-1, -1)) / (4 * h[i] * h[j])
            d2[:, i, j] = mixed
            d2[:, j, i] = mixed
    value = _lead_to_back(center, 1)
    d1 = _lead_to_back(d1, 2)
    d2 = _lead_to_back(d2, 3)
    return MapJet(value, d1, d2)


def spatial_jets(state: FlowState, t: float | None = None, f: np.ndarray | None = None) -> MapJet:
    """Finite-difference 2-jets at every grid point, batch shape ``grid.shape``."""
    return _jets_from_padded(_padded(state, t, f), state.grid.spacing)


def spatial_jet(state: FlowState, index) -> MapJet:
    """2-jet at a single grid multi-index."""
    index = tuple(np.atleast_1d(index).tolist())
    return spatial_jets(state)[index]


def _rate(jets: MapJet, metricN, lam2=None) -> float:
    """Grid max of the largest eigenvalue of the inverse induced metric."""
    if lam2 is None:
        lam2 = singular_values(jets, metricN)
    return float(np.max(1.0 / (1.0 + lam2[..., 0])))


def _dt_from_rate(state: FlowState, control: StepControl, rate: float) -> float:
    h = min(state.grid.spacing)
    return min(control.dt_max, control.cfl * h * h / (2 * state.grid.m * rate))


def cfl_dt(state: FlowState, control: StepControl) -> float:
    """Explicit parabolic time step ``cfl * h_min^2 / (2 m Lambda)``.

    Lambda is the grid maximum of the largest eigenvalue of the inverse
    induced metric, i.e. ``1 / (1 + min lambda^2)``.
    """
    jets = spatial_jets(state)
    return _dt_from_rate(state, control, _rate(jets, metric_at(state.model, jets.value)))


def _resolve_workers(workers):
    if workers is None or workers <= 0:
        env = os.environ.get("GRAPHFLOW_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, workers)


def _velocity(state: FlowState, jets: MapJet, metricN, g_inv=None) -> np.ndarray:
    workers = _resolve_workers(state.workers)
    rows = state.grid.shape[0]
    if workers == 1 or rows < 2 * workers:
        vel = mcf_velocity(jets, state.model, metricN, g_inv)
    else:
        bounds = np.linspace(0, rows, workers + 1).astype(int)
        chunks = [(jets[lo:hi], metric_at(state.model, jets.value[lo:hi]))
                  for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: mcf_velocity(c[0], state.model, c[1]), chunks))
        vel = np.concatenate(parts, axis=0)
    return _back_to_lead(vel, 1)


def velocity_field(state: FlowState, t: float | None = None, f: np.ndarray | None = None) -> np.ndarray:
    """mcf_velocity at every grid point, shape ``(n, *grid.shape)``.

    With ``state.workers > 1`` the grid is split into blocks along the first
    axis; each point's value is independent of the split.
    """
    jets = spatial_jets(state, t, f)
    return _velocity(state, jets, metric_at(state.model, jets.value))


def _finish(state: FlowState, f_new, dt, k1) -> FlowState:
    stats = dict(state.stats)
    stats["steps"] += 1
    stats["last_dt"] = dt
    speed = np.sqrt(np.sum(k1 * k1, axis=0))
    stats["max_velocity"] = float(np.max(speed)) if np.all(np.isfinite(speed)) else math.inf
    # replace() re-runs FlowState validation (finite values, chart margin)
    return replace(state, f=f_new, t=state.t + dt, stats=stats)


def step(state: FlowState, dt: float, method: str = "euler") -> FlowState:
    """Advance one explicit step; returns a new state."""
    t = state.t
    k1 = velocity_field(state)
    if method == "euler":
        f_new = state.f + dt * k1
    elif method == "rk4":
        k2 = velocity_field(state, t + dt / 2, state.f + dt / 2 * k1)
        k3 = velocity_field(state, t + dt / 2, state.f + dt / 2 * k2)
        k4 = velocity_field(state, t + dt, state.f + dt * k3)
        f_new = state.f + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    else:
        raise ValueError(f"unknown time stepping method {method!r}")
    return _finish(state, f_new, dt, k1)


def _adaptive_step(state: FlowState, control: StepControl, remaining: float, method: str) -> FlowState:
    """cfl_dt + step sharing one jet evaluation; the step is clipped to ``remaining``."""
    jets = spatial_jets(state)
    # the state was validated on construction, so skip the chart test here
    metricN = metric_at(state.model, jets.value, check=False)
    pb = pullback(jets, metricN)
    lam2 = np.clip(_eigvalsh(pb), 0.0, None)
    dt = _dt_from_rate(state, control, _rate(jets, metricN, lam2))
    dt = min(dt, remaining)
    if method != "euler":
        return step(state, dt, method)
    k1 = _velocity(state, jets, metricN, _inv(np.eye(state.grid.m) + pb))
    return _finish(state, state.f + dt * k1, dt, k1)


def run(state: FlowState, control: StepControl, monitor_every: float, eps2: float | None = None,
        method: str = "euler", recorder=None):
    """Integrate to ``control.t_end`` recording monitors every ``monitor_every``.

    Returns ``(final_state, records)``. Time steps are shortened to land
    exactly on monitor times. On a FlowError the exception carries the
    records gathered so far and the last valid state.
    """
    from .monitors import MonitorContext

    if control.t_end < state.t:
        raise ValueError("t_end precedes the current time")
    if monitor_every <= 0:
        raise ValueError("monitor_every must be positive")
    ctx = MonitorContext.from_initial(state, eps2)
    rec = recorder or ctx.record
    t0 = state.t
    n_rec = int(math.floor((control.t_end - t0) / monitor_every + 1e-9))
    schedule = [(t0 + k * monitor_every, True) for k in range(1, n_rec + 1)]
    if not schedule or schedule[-1][0] < control.t_end - 1e-12:
        schedule.append((control.t_end, False))
    records = [rec(state)]
    try:
        for target, emit in schedule:
            tol = 1e-12 * max(1.0, abs(target))
            while state.t < target - tol:
                state = _adaptive_step(state, control, target - state.t, method)
                if abs(state.t - target) <= tol:
                    state.t = target
            if emit:
                records.append(rec(state))
    except FlowError as exc:
        exc.records = records
        exc.state = state
        raise
    return state, records


# --- scalar reductions of the examples -----------------------------------

def _hs1_rhs(d):
    return d / (1.0 + d * d)


def _hs2_rhs(r):
    return -r * (1.0 - r * r) / (1.0 + r * r)


def reduce_ode(example: str, y0: float, t_end: float, dt: float):
    """RK4 integration of the scalar ODE an example reduces to.

    ``example`` is ``"hs1"`` (``d' = d/(1+d^2)``) or ``"hs2"``
    (``r' = -r(1-r^2)/(1+r^2)``). Returns ``(times, values)``; the last step
    is shortened to hit ``t_end`` exactly.
    """
    example = example.lower()
    if example == "hs1":
        rhs, valid = _hs1_rhs, (lambda y: y > 0)
    elif example == "hs2":
        rhs, valid = _hs2_rhs, (lambda y: 0 < y < 1)
    else:
        raise ValueError(f"no scalar reduction for {example!r}")
    if not valid(y0):
        raise RangeViolation(f"initial value {y0} outside the valid range for {example}")
    nsteps = int(math.ceil(t_end / dt - 1e-9))
    times = np.empty(nsteps + 1)
    vals = np.empty(nsteps + 1)
    times[0], vals[0] = 0.0, y0
    y, t = y0, 0.0
    for k in range(1, nsteps + 1):
        h = min(dt, t_end - t)
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = k * dt if k < nsteps else t_end
        if not valid(y):
            raise RangeViolation(f"{example} state left its range at t={t:.6g}")
        times[k], vals[k] = t, y
    return times, vals


# --- checkpoints -----------------------------------------------------------

def model_spec(model: ManifoldModel) -> str:
    from .manifold import Euclidean, PoincareDisk, Product, UpperHalfPlane

    if isinstance(model, Euclidean):
        return f"euclidean:{model.n}"
    if isinstance(model, UpperHalfPlane):
        return "upper-half-plane"
    if isinstance(model, PoincareDisk):
        return "poincare-disk"
    if isinstance(model, Product):
        return "product:" + ",".join(model_spec(f) for f in model.factors)
    raise ValueError(f"no spec string for {model!r}")


def save_checkpoint(state: FlowState, path) -> None:
    """Text checkpoint: header line, JSON metadata line, then flat f values."""
    meta = {
        "t": state.t,
        "grid": state.grid.to_dict(),
        "model": model_spec(state.model),
        "margin": state.model.chart_margin,
        "bc": {"kind": state.bc.kind, "oracle": state.bc.oracle, "params": state.bc.params},
        "shape": list(state.f.shape),
    }
    with open(path, "w") as fh:
        fh.write(CHECKPOINT_HEADER + "\n")
        fh.write(json.dumps(meta) + "\n")
        np.savetxt(fh, state.f.reshape(-1), fmt="%.17g")


def load_checkpoint(path) -> FlowState:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != CHECKPOINT_HEADER:
            raise ValueError(f"not a checkpoint file (header {header!r})")
        meta = json.loads(fh.readline())
        data = np.loadtxt(fh, ndmin=1)
    grid = Grid(**meta["grid"])
    model = parse_model(meta["model"], meta["margin"])
    bc = BoundaryCondition(**meta["bc"])
    return FlowState(grid=grid, f=data.reshape(meta["shape"]), t=meta["t"], model=model, bc=bc)
