"""Graphical mean curvature flow of contractions into negatively curved model targets."""

from .errors import (
    ChartExit,
    ChartViolation,
    ConfigError,
    DomainError,
    EigenFailure,
    FlowError,
    GraphFlowError,
    NumericalBlowup,
    RangeViolation,
    SingularMetric,
)
from .flow import BoundaryCondition, FlowState, Grid, StepControl, cfl_dt, reduce_ode, run, step
from .graphgeom import MapJet, geometry, mcf_velocity, mean_curvature, second_fundamental_form
from .manifold import Euclidean, PoincareDisk, Product, UpperHalfPlane, metric_at, parse_model
from .monitors import MonitorRecord, check_theorem_a, trace_bound
from .oracles import ExampleSpec, hs1_d, hs2_r, lambert_w

__all__ = [
    "BoundaryCondition", "ChartExit", "ChartViolation", "ConfigError", "DomainError",
    "EigenFailure", "Euclidean", "ExampleSpec", "FlowError", "FlowState", "GraphFlowError",
    "Grid", "MapJet", "MonitorRecord", "NumericalBlowup", "PoincareDisk", "Product",
    "RangeViolation", "SingularMetric", "StepControl", "UpperHalfPlane", "cfl_dt",
    "check_theorem_a", "geometry", "hs1_d", "hs2_r", "lambert_w", "mcf_velocity",
    "mean_curvature", "metric_at", "parse_model", "reduce_ode", "run",
    "second_fundamental_form", "step", "trace_bound",
]
