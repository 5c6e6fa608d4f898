import dataclasses
import logging
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphflow.errors import DomainError
from graphflow.flow import Grid, StepControl, initial_state, oracle_state, run, spatial_jet
from graphflow.graphgeom import geometry, s_perp_theta_max
from graphflow.manifold import Euclidean, PoincareDisk
from graphflow.monitors import (
    CSV_COLUMNS,
    MonitorContext,
    check_theorem_a,
    covariant_derivative_sup,
    default_eps2,
    read_csv,
    record,
    trace_bound,
    write_csv,
)
from graphflow.oracles import hs2_c1


def mp_trace_bound(t, m, a, sigma):
    """High-precision oracle: m - 1 - 1/(C1 exp(sigma t / 2) - 1), C1 = 1 + 1/(m - 1 - a)."""
    with mpmath.workdps(50):
        c1 = 1 + 1 / (mpmath.mpf(m) - 1 - mpmath.mpf(a))
        return float(m - 1 - 1 / (c1 * mpmath.exp(mpmath.mpf(sigma) * t / 2) - 1))


def hs2_state(points=64):
    return oracle_state("hs2", Grid([(0, 2 * math.pi)], [points], [True]), {"c1": hs2_c1(0.3)})


def disk_state(points=16, amp=0.3):
    grid = Grid([(0, 2 * math.pi)] * 2, [points, points], [True, True])
    return initial_state(grid, PoincareDisk(), lambda x, y: amp * np.stack([np.sin(x), np.sin(y)]))


# --- trace bound --------------------------------------------------------------------

def test_trace_bound_worked_value():
    val = trace_bound(2.0, 2, 0.5, 1.0)
    assert val == pytest.approx(mp_trace_bound(2.0, 2, 0.5, 1.0), rel=1e-15)
    assert val == pytest.approx((3 * math.e - 2) / (3 * math.e - 1), rel=1e-15)
    assert 0.860 < val < 0.861


@given(st.integers(2, 6), st.floats(1e-3, 10), st.floats(1e-3, 4), st.floats(0, 100))
def test_trace_bound_against_oracle(m, gap, sigma, t):
    a = m - 1 - gap
    assert trace_bound(t, m, a, sigma) == pytest.approx(mp_trace_bound(t, m, a, sigma), rel=1e-13, abs=1e-15)


@given(st.integers(2, 6), st.floats(1e-3, 10), st.floats(1e-3, 4))
def test_trace_bound_at_zero(m, gap, sigma):
    a = m - 1 - gap
    assert abs(trace_bound(0.0, m, a, sigma) - a) <= 1e-14 * max(1, abs(a))


@given(st.integers(2, 6), st.floats(1e-3, 10), st.floats(1e-3, 4), st.floats(0, 1), st.floats(0, 1))
def test_trace_bound_increasing_below_limit(m, gap, sigma, u, v):
    a = m - 1 - gap
    t_hi = 40.0 / sigma
    t1, t2 = sorted((u * t_hi, v * t_hi))
    b1, b2 = trace_bound(t1, m, a, sigma), trace_bound(t2, m, a, sigma)
    assert b1 < m - 1 and b2 < m - 1
    if t2 - t1 > 1e-6:
        assert b2 > b1


def test_trace_bound_limit():
    assert trace_bound(1e4, 3, 0.2, 1.0) == 2.0


@pytest.mark.parametrize("args", [(0.0, 1, -1.0, 1.0), (0.0, 2, 1.0, 1.0), (0.0, 2, 0.5, 0.0)])
def test_trace_bound_domain(args):
    with pytest.raises(DomainError):
        trace_bound(*args)


def test_default_eps2(caplog):
    assert default_eps2(0.5, 2) == pytest.approx(0.125)
    assert default_eps2(1.0, 1) == pytest.approx(1.0)
    with caplog.at_level(logging.WARNING):
        assert default_eps2(-0.2, 1) == 1e-3
    assert "not a strict contraction" in caplog.text


# --- records ---------------------------------------------------------------------------

def test_record_constant_map():
    grid = Grid([(0, 2 * math.pi)] * 2, [8, 8], [True, True])
    st_ = initial_state(grid, PoincareDisk(), lambda x, y: np.stack([0 * x + 0.2, 0 * y]))
    rec = record(st_, 0.1)
    assert rec.min_s_eig == 1 and rec.tr_s_min == 2 and rec.H_norm2_max == 0 and rec.u_min == 1
    assert rec.s_perp_theta_max == pytest.approx(-1.0, abs=1e-15)
    assert rec.chart_clearance_min == pytest.approx(0.8)


def test_record_hs2_initial():
    rec = record(hs2_state(256), 0.1)
    r = 0.3
    assert rec.H_norm2_max == pytest.approx(0.303005, abs=1e-4)
    # tr(s) = g^{11} s_11 for m = 1
    g11 = ((1 + r * r) / (1 - r * r)) ** 2
    s11 = 1 - 4 * r * r / (1 - r * r) ** 2
    assert rec.tr_s_min == pytest.approx(s11 / g11, abs=1e-4)
    assert rec.tr_s_min == pytest.approx(rec.min_s_eig, abs=1e-15)
    assert rec.tr_s_bound is None


def test_record_matches_pointwise_recomputation(rng):
    st_ = disk_state(12)
    eps2 = 0.05
    rec = record(st_, eps2)
    per_point = []
    for idx in np.ndindex(*st_.grid.shape):
        j = spatial_jet(st_, idx)
        geo = geometry(j, st_.model)
        per_point.append((geo.s_eigs[-1], np.trace(geo.g_inv @ geo.s), geo.H_norm2, geo.u,
                          s_perp_theta_max(j, st_.model, eps2)))
    per_point = np.array(per_point, dtype=float)
    assert rec.min_s_eig == pytest.approx(per_point[:, 0].min(), abs=1e-14)
    assert rec.tr_s_min == pytest.approx(per_point[:, 1].min(), abs=1e-14)
    assert rec.H_norm2_max == pytest.approx(per_point[:, 2].max(), rel=1e-12)
    assert rec.u_min == pytest.approx(per_point[:, 3].min(), abs=1e-14)
    assert rec.s_perp_theta_max == pytest.approx(per_point[:, 4].max(), abs=1e-13)
    picks = rng.choice(len(per_point), 10, replace=False)
    assert np.all(per_point[picks, 0] >= rec.min_s_eig)


def test_record_entries_finite():
    rec = record(disk_state(), 0.1)
    vals = [v for v in rec.row() if v is not None]
    assert all(math.isfinite(v) for v in vals)
    assert 0 < rec.u_min <= 1


# --- covariant derivatives ----------------------------------------------------------------

def test_covariant_derivatives_of_affine_map():
    grid = Grid([(0, 1.0), (0, 1.0)], [8, 8], [False, False])
    st_ = initial_state(grid, Euclidean(2), lambda x, y: np.stack([x + 2 * y, 0.5 * x]))
    assert covariant_derivative_sup(st_, 2) == pytest.approx(0, abs=1e-20)
    assert covariant_derivative_sup(st_, 3) == pytest.approx(0, abs=1e-20)


@pytest.mark.parametrize("ident", ["hs3a", "hs3b"])
def test_covariant_derivatives_of_stationary_maps(ident):
    grid = Grid([(-math.pi, math.pi)], [257], [False])
    st_ = oracle_state(ident, grid)
    h = grid.spacing[0]
    assert covariant_derivative_sup(st_, 2) <= 10 * h * h
    assert covariant_derivative_sup(st_, 3) <= 10 * h * h


def test_covariant_derivative_rejects_other_orders():
    with pytest.raises(ValueError):
        covariant_derivative_sup(hs2_state(16), 4)


def test_hs2_decay_products_bounded():
    st_ = hs2_state(64)
    _, recs = run(st_, StepControl(t_end=5.0), 0.5)
    late = [r for r in recs if r.t >= 0.5]
    for k in (2, 3):
        vals = np.array([r.decay[k] for r in late])
        assert np.all(np.isfinite(vals))
        # regression baseline measured on this configuration: peak near t = 1, below 0.07
        assert vals.max() <= 0.07
        assert vals[-1] < vals.max()


# --- report ------------------------------------------------------------------------------------

def test_report_on_stationary_run():
    grid = Grid([(-math.pi, math.pi)], [65], [False])
    st_ = oracle_state("hs3a", grid)
    ctx = MonitorContext.from_initial(st_)
    _, recs = run(st_, StepControl(t_end=0.5), 0.1)
    h = grid.spacing[0]
    assert check_theorem_a(recs, 10 * h * h + 1e-6, ctx.eps2, ctx.n).passed


def test_report_on_hs2_run_and_corruption():
    st_ = hs2_state(64)
    h = st_.grid.spacing[0]
    _, recs = run(st_, StepControl(t_end=1.0), 0.1)
    slack = 10 * h * h + 1e-6
    assert check_theorem_a(recs, slack).passed
    bad = list(recs)
    bad[4] = dataclasses.replace(bad[4], tr_s_min=bad[4].tr_s_min - 1.0)
    rep = check_theorem_a(bad, slack)
    assert not rep.items["ii"].passed
    assert rep.items["ii"].violations[0][0] == bad[4].t
    assert rep.items["i"].passed


def test_contraction_preserved_on_example_runs():
    for st_ in (hs2_state(64), disk_state(16, 0.35)):
        h = min(st_.grid.spacing)
        _, recs = run(st_, StepControl(t_end=1.0), 0.1)
        lo = recs[0].min_s_eig - (10 * h * h + 1e-8)
        assert all(lo <= r.min_s_eig <= 1 for r in recs)


def test_report_needs_two_records():
    with pytest.raises(ValueError):
        check_theorem_a([record(hs2_state(16), 0.1)], 1e-3)


def test_trace_bound_recorded_when_applicable():
    st_ = disk_state(16, 0.35)
    ctx = MonitorContext.from_initial(st_)
    assert ctx.bound_applies
    _, recs = run(st_, StepControl(t_end=0.5), 0.1, eps2=ctx.eps2)
    assert all(r.tr_s_bound is not None for r in recs)
    assert recs[0].tr_s_bound == pytest.approx(ctx.inf_tr0, abs=1e-14)


# --- CSV -------------------------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    _, recs = run(hs2_state(16), StepControl(t_end=0.2), 0.1)
    path = tmp_path / "m.csv"
    write_csv(recs, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == len(recs) + 1
    assert lines[1].split(",")[3] == ""  # no bound for m = 1
    back = read_csv(path)
    assert [r.row() for r in back] == [r.row() for r in recs]
    write_csv(recs, path)
    assert path.read_text().splitlines() == lines
