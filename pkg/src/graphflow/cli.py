"""Command-line entry point: ``graphflow {run,verify,example}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure (chart exit or blow-up).

Run configurations are INI files::

    [model]
    spec = poincare-disk
    margin = 1e-6

    [grid]
    extents = 0:2*pi
    points = 256
    periodic = true
    bc = periodic

    [init]
    oracle = hs2
    r0 = 0.3
    # or inline components sampled on the grid, one key per target coordinate:
    # f1 = 0.25*sin(x1)
    # f2 = 0.25*sin(x2)

    [stepping]
    cfl = 0.2
    dt_max = 0.01
    t_end = 1.0
    monitor_every = 0.05
    method = euler
    # eps2 = 0.1
    # threads = 1
    # seed = 7

    [output]
    dir = out
    monitors = monitors.csv
    checkpoint = final.chk
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verification
from .errors import ConfigError, FlowError, GraphFlowError
from .flow import (
    BoundaryCondition,
    Grid,
    StepControl,
    initial_state,
    oracle_state,
    reduce_ode,
    run,
    save_checkpoint,
)
from .manifold import DEFAULT_MARGIN, parse_model
from .monitors import MonitorContext, check_theorem_a, write_csv
from .oracles import ORACLES, ExampleSpec, hs1_d, hs1_t0, hs2_c1, hs2_r

log = logging.getLogger("graphflow")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

KNOWN_KEYS = {
    "model": {"spec", "margin"},
    "grid": {"extents", "points", "periodic", "bc"},
    "init": None,  # oracle params or f1..fn are open-ended
    "stepping": {"cfl", "dt_max", "t_end", "monitor_every", "method", "eps2", "threads", "seed"},
    "output": {"dir", "monitors", "checkpoint"},
}

# --- safe arithmetic ---------------------------------------------------------

_FUNCS = {name: getattr(np, name) for name in
          ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "sinh", "cosh", "arctan", "abs")}
_CONSTS = {"pi": math.pi, "e": math.e}
_ALLOWED_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load,
                  ast.Call, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def _compile_expr(text: str, variables: tuple) -> object:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ValueError(f"disallowed syntax in {text!r}")
        if isinstance(node, ast.Name) and node.id not in _FUNCS and node.id not in _CONSTS \
                and node.id not in variables:
            raise ValueError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ValueError(f"only {sorted(_FUNCS)} may be called in {text!r}")
    return compile(tree, "<config>", "eval")


def _eval(code, env: dict):
    return eval(code, {"__builtins__": {}}, {**_FUNCS, **_CONSTS, **env})


def _number(text: str) -> float:
    return float(_eval(_compile_expr(text, ()), {}))


# --- configuration -------------------------------------------------------------

@dataclass
class RunConfig:
    model: str
    margin: float
    extents: list
    points: list
    periodic: list
    bc: str
    oracle: str | None
    oracle_params: dict
    components: list
    cfl: float
    dt_max: float
    t_end: float
    monitor_every: float
    method: str
    eps2: float | None
    threads: int
    seed: int
    out_dir: Path
    monitors: str
    checkpoint: str
    source: dict = field(default_factory=dict)

    def validate(self):
        if self.oracle is not None and self.oracle not in ORACLES:
            raise ConfigError(f"[init] oracle: unknown oracle id {self.oracle!r}")
        if self.t_end <= 0:
            raise ConfigError("[stepping] t_end: must be > 0")
        if any(p < 8 for p in self.points):
            raise ConfigError("[grid] points: need at least 8 per axis")
        if self.monitor_every <= 0:
            raise ConfigError("[stepping] monitor_every: must be > 0")
        if not 0 < self.cfl <= 0.5:
            raise ConfigError("[stepping] cfl: must lie in (0, 0.5]")
        if self.method not in ("euler", "rk4"):
            raise ConfigError("[stepping] method: expected euler or rk4")
        if self.bc not in ("periodic", "dirichlet", "extrapolate"):
            raise ConfigError(f"[grid] bc: unknown boundary kind {self.bc!r}")
        if self.bc == "dirichlet" and self.oracle is None:
            raise ConfigError("[grid] bc: dirichlet needs an [init] oracle")
        if self.oracle is None and not self.components:
            raise ConfigError("[init]: give an oracle id or f1, f2, ... components")


def _key_line(path: Path, section: str, key: str) -> int | None:
    """1-based line of ``key`` inside ``[section]``, for error messages."""
    current = None
    try:
        lines = path.read_text().splitlines()
    except OSError:
        return None
    for no, line in enumerate(lines, 1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]$", s)
        if m:
            current = m.group(1).strip().lower()
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return no
    return None


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse and validate a run configuration; raises ConfigError with a line/field hint."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    def where(section, key):
        line = _key_line(path, section, key)
        return f"{path}:{line}: [{section}] {key}" if line else f"{path}: [{section}] {key}"

    def get(section, key, conv=str, default=None, required=False):
        if not parser.has_section(section) or not parser.has_option(section, key):
            if required:
                raise ConfigError(f"{path}: [{section}] {key}: missing required key")
            return default
        raw = parser.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where(section, key)}: bad value {raw!r} ({exc})") from None

    for section in parser.sections():
        known = KNOWN_KEYS.get(section)
        if section not in KNOWN_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        if known is not None:
            for key in parser.options(section):
                if key not in known:
                    raise ConfigError(f"{where(section, key)}: unknown key")

    def ints(raw):
        return [int(p) for p in raw.split(",")]

    def bools(raw):
        out = []
        for p in raw.split(","):
            p = p.strip().lower()
            if p not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(f"not a boolean: {p!r}")
            out.append(p in ("true", "yes", "1"))
        return out

    def extents(raw):
        out = []
        for part in raw.split(","):
            lo, sep, hi = part.partition(":")
            if not sep:
                raise ValueError("expected lo:hi")
            out.append((_number(lo), _number(hi)))
        return out

    model = get("model", "spec", required=True)
    margin = get("model", "margin", _number, DEFAULT_MARGIN)
    ext = get("grid", "extents", extents, required=True)
    pts = get("grid", "points", ints, required=True)
    per = get("grid", "periodic", bools, [True] * len(ext))
    if len(pts) == 1 and len(ext) > 1:
        pts = pts * len(ext)
    if len(per) == 1 and len(ext) > 1:
        per = per * len(ext)
    if not (len(ext) == len(pts) == len(per)):
        raise ConfigError(f"{where('grid', 'points')}: extents, points and periodic differ in length")
    bc = get("grid", "bc", str, "periodic" if all(per) else "extrapolate").strip().lower()

    oracle, params, comps = None, {}, []
    if parser.has_section("init"):
        items = dict(parser.items("init"))
        oracle = items.pop("oracle", None)
        if oracle is not None:
            oracle = oracle.strip().lower()
        comp_keys = sorted((k for k in items if re.fullmatch(r"f\d+", k)), key=lambda k: int(k[1:]))
        variables = tuple(f"x{i + 1}" for i in range(len(ext))) + ("x",)
        for k in comp_keys:
            try:
                comps.append(_compile_expr(items.pop(k), variables))
            except ValueError as exc:
                raise ConfigError(f"{where('init', k)}: {exc}") from None
        for k, raw in items.items():
            try:
                params[k] = _number(raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"{where('init', k)}: {exc}") from None
        if oracle is not None and comps:
            raise ConfigError(f"{path}: [init] give either an oracle or components, not both")
        if oracle == "hs2" and "r0" in params:
            r0 = params.pop("r0")
            if not 0 < r0 < 1:
                raise ConfigError(f"{where('init', 'r0')}: must lie in (0, 1)")
            params["c1"] = hs2_c1(r0)
        if oracle == "hs1" and "d0" in params:
            d0 = params.pop("d0")
            if d0 <= 0:
                raise ConfigError(f"{where('init', 'd0')}: must be > 0")
            params["t0"] = hs1_t0(d0)
        if oracle is not None and oracle in ORACLES:
            unknown = set(params) - set(ORACLES[oracle].defaults)
            if unknown:
                raise ConfigError(f"{where('init', sorted(unknown)[0])}: not a parameter of {oracle}")

    out_dir = Path(get("output", "dir", str, "out"))
    cfg = RunConfig(
        model=model, margin=margin, extents=ext, points=pts, periodic=per, bc=bc,
        oracle=oracle, oracle_params=params, components=comps,
        cfl=get("stepping", "cfl", _number, 0.2),
        dt_max=get("stepping", "dt_max", _number, 1e-2),
        t_end=get("stepping", "t_end", _number, 1.0),
        monitor_every=get("stepping", "monitor_every", _number, 0.05),
        method=get("stepping", "method", str, "euler").strip().lower(),
        eps2=get("stepping", "eps2", _number, None),
        threads=get("stepping", "threads", int, 0),
        seed=get("stepping", "seed", int, verification.DEFAULT_SEED),
        out_dir=out_dir,
        monitors=get("output", "monitors", str, "monitors.csv"),
        checkpoint=get("output", "checkpoint", str, "final.chk"),
        source={s: dict(parser.items(s)) for s in parser.sections()},
    )
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def write_resolved(cfg: RunConfig, path: Path) -> None:
    out = configparser.ConfigParser()
    out["model"] = {"spec": cfg.model, "margin": repr(cfg.margin)}
    out["grid"] = {
        "extents": ", ".join(f"{lo!r}:{hi!r}" for lo, hi in cfg.extents),
        "points": ", ".join(str(p) for p in cfg.points),
        "periodic": ", ".join(str(p).lower() for p in cfg.periodic),
        "bc": cfg.bc,
    }
    init = dict(cfg.source.get("init", {}))
    if cfg.oracle is not None:
        init = {"oracle": cfg.oracle, **{k: repr(v) for k, v in cfg.oracle_params.items()}}
    out["init"] = init
    stepping = {"cfl": repr(cfg.cfl), "dt_max": repr(cfg.dt_max), "t_end": repr(cfg.t_end),
                "monitor_every": repr(cfg.monitor_every), "method": cfg.method,
                "threads": str(cfg.threads), "seed": str(cfg.seed)}
    if cfg.eps2 is not None:
        stepping["eps2"] = repr(cfg.eps2)
    out["stepping"] = stepping
    out["output"] = {"dir": str(cfg.out_dir), "monitors": cfg.monitors, "checkpoint": cfg.checkpoint}
    with open(path, "w") as fh:
        out.write(fh)


def build_state(cfg: RunConfig):
    try:
        model = parse_model(cfg.model, cfg.margin)
        grid = Grid(cfg.extents, cfg.points, cfg.periodic)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.oracle is not None:
        bc = (BoundaryCondition(cfg.bc, cfg.oracle, cfg.oracle_params) if cfg.bc == "dirichlet"
              else BoundaryCondition(cfg.bc))
        oracle = ORACLES[cfg.oracle]
        if not isinstance(model, oracle.model):
            raise ConfigError(f"[model] spec: oracle {cfg.oracle} lives on {oracle.model.__name__}")
        try:
            state = oracle_state(cfg.oracle, grid, cfg.oracle_params, bc=bc, margin=cfg.margin)
        except ValueError as exc:
            raise ConfigError(f"[init]: {exc}") from None
    else:
        if len(cfg.components) != model.dim:
            raise ConfigError(f"[init]: {len(cfg.components)} components for a {model.dim}-dimensional target")

        def field_fn(*xs):
            env = {f"x{i + 1}": x for i, x in enumerate(xs)}
            env["x"] = xs[0]
            return np.stack([np.broadcast_to(_eval(c, env), xs[0].shape) for c in cfg.components])

        try:
            state = initial_state(grid, model, field_fn, BoundaryCondition(cfg.bc))
        except ValueError as exc:
            raise ConfigError(f"[init]: {exc}") from None
    state.workers = cfg.threads
    return state


# --- commands --------------------------------------------------------------------

def cmd_run(args) -> int:
    overrides = {"threads": args.threads, "seed": args.seed,
                 "out_dir": Path(args.out) if args.out else None}
    try:
        cfg = load_config(args.config, overrides)
        state = build_state(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FlowError as exc:
        print(f"numerical failure in initial data: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, cfg.out_dir / "resolved.ini")
    ctx = MonitorContext.from_initial(state, cfg.eps2)
    control = StepControl(cfl=cfg.cfl, dt_max=cfg.dt_max, t_end=state.t + cfg.t_end)
    try:
        final, records = run(state, control, cfg.monitor_every, eps2=ctx.eps2, method=cfg.method)
    except FlowError as exc:
        write_csv(exc.records, cfg.out_dir / cfg.monitors)
        if exc.state is not None:
            save_checkpoint(exc.state, cfg.out_dir / cfg.checkpoint)
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(f"partial monitors ({len(exc.records)} records) in {cfg.out_dir / cfg.monitors}",
              file=sys.stderr)
        return EXIT_NUMERIC
    write_csv(records, cfg.out_dir / cfg.monitors)
    save_checkpoint(final, cfg.out_dir / cfg.checkpoint)
    h = min(state.grid.spacing)
    report = check_theorem_a(records, 10 * h * h + 1e-6, ctx.eps2, ctx.n)
    print(f"t = {final.t:.6g} after {final.stats['steps']} steps; "
          f"{len(records)} monitor records -> {cfg.out_dir / cfg.monitors}")
    print("monitor report:")
    print(report.summary())
    if ctx.eps1 <= 0:
        log.warning("initial map is not a strict contraction; the monitored statements need not hold")
    if not report.passed:
        log.warning("monitor report flags violations (monitoring only, run completed)")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in verification.SUITES:
        print(f"config error: unknown suite {args.suite!r}; choose from "
              f"{', '.join(verification.SUITES)}", file=sys.stderr)
        return EXIT_CONFIG
    seed = verification.DEFAULT_SEED if args.seed is None else args.seed
    results = verification.run_suite(args.suite, seed=seed, fault=args.inject_fault,
                                     echo=lambda line: print(line, flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_VERIFY if failed else EXIT_OK


def _write_comparison(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "numeric", "exact", "abs_err"))
        for t, num, ex in rows:
            w.writerow([repr(float(t)), repr(float(num)), repr(float(ex)), repr(abs(float(num) - float(ex)))])


def _example_hs1(args, out: Path) -> bool:
    times, vals = reduce_ode("hs1", args.d0, args.t_end or 10.0, 1e-3)
    t0 = hs1_t0(args.d0)
    rows = [(t, v, hs1_d(t, t0)) for t, v in zip(times, vals)]
    _write_comparison(out / "hs1_ode.csv", rows)
    err_ode = max(abs(n - e) for _, n, e in rows)
    # PDE mode: the line x -> (x, d) on a Dirichlet-oracle interval
    grid = Grid([(-1.0, 1.0)], [args.grid or 64], [False])
    state = oracle_state("hs1", grid, {"t0": t0}, margin=DEFAULT_MARGIN)
    state.workers = args.threads or 1
    pde_rows = []

    def recorder(st):
        k = int(np.argmax(np.abs(st.f[1] - hs1_d(st.t, t0))))
        pde_rows.append((st.t, st.f[1, k], hs1_d(st.t, t0)))

    t_pde = args.t_end or 1.0
    run(state, StepControl(t_end=t_pde), t_pde / 20, recorder=recorder)
    _write_comparison(out / "hs1_pde.csv", pde_rows)
    err_pde = max(abs(n - e) for _, n, e in pde_rows)
    h = grid.spacing[0]
    print(f"hs1 ODE: max |d - d_exact| = {err_ode:.3e} (tolerance 1e-8)")
    print(f"hs1 PDE: max |d - d_exact| = {err_pde:.3e} on {grid.points[0]} points to t = {t_pde:g}")
    return err_ode <= 1e-8 and err_pde <= 10 * h * h


def _example_hs2(args, out: Path) -> bool:
    r0 = args.r0
    if not 0 < r0 < 1:
        raise ConfigError("--r0 must lie in (0, 1)")
    c1 = hs2_c1(r0)
    t_end = args.t_end or 1.0
    times, vals = reduce_ode("hs2", r0, t_end, 1e-3)
    rows = [(t, v, hs2_r(t, c1)) for t, v in zip(times, vals)]
    _write_comparison(out / "hs2_ode.csv", rows)
    err_ode = max(abs(n - e) for _, n, e in rows)
    points = args.grid or 256
    grid = Grid([(0.0, 2 * math.pi)], [points], [True])
    state = oracle_state("hs2", grid, {"c1": c1})
    state.workers = args.threads or 1
    ctx = MonitorContext.from_initial(state)
    pde_rows, records = [], []

    def recorder(st):
        radius = np.hypot(st.f[0], st.f[1])
        exact = hs2_r(st.t, c1)
        k = int(np.argmax(np.abs(radius - exact)))
        pde_rows.append((st.t, radius[k], exact))
        rec = ctx.record(st)
        records.append(rec)
        return rec

    run(state, StepControl(t_end=t_end), t_end / 20, eps2=ctx.eps2, recorder=recorder)
    _write_comparison(out / "hs2_pde.csv", pde_rows)
    write_csv(records, out / "hs2_monitors.csv")
    err_pde = abs(pde_rows[-1][1] - pde_rows[-1][2])
    print(f"hs2 ODE: max |r - r_exact| = {err_ode:.3e}")
    print(f"hs2 PDE: |r - r_exact| at t = {t_end:g} is {err_pde:.3e} on {points} points (tolerance 5e-4)")
    if r0 > math.sqrt(2) - 1:
        log.warning("r0 = %g exceeds sqrt(2) - 1: initial map is not a contraction", r0)
        h = grid.spacing[0]
        print(check_theorem_a(records, 10 * h * h + 1e-6, ctx.eps2, ctx.n).summary())
    return err_ode <= 1e-8 and err_pde <= 5e-4


def _example_hs3(ident, args, out: Path) -> bool:
    spec = ExampleSpec(ident, {"c": args.c})
    points = args.grid or 257
    grid = Grid([(-math.pi, math.pi)], [points], [False])
    state = oracle_state(ident, grid, spec.params)
    state.workers = args.threads or 1
    f0 = state.f.copy()
    rows = []

    def recorder(st):
        dev = np.abs(st.f - f0)
        a, k = np.unravel_index(int(np.argmax(dev)), dev.shape)
        rows.append((st.t, st.f[a, k], f0[a, k]))

    t_end = args.t_end or 1.0
    run(state, StepControl(t_end=t_end), t_end / 20, recorder=recorder)
    _write_comparison(out / f"{ident}_pde.csv", rows)
    drift = max(abs(n - e) for _, n, e in rows)
    h = grid.spacing[0]
    tol = 10 * h * h
    print(f"{ident} stationarity (c = {args.c:g}, h = {h:.4g}): sup drift {drift:.3e}, "
          f"tolerance 10 h^2 = {tol:.3e} -> {'ok' if drift <= tol else 'EXCEEDED'}")
    return drift <= tol


def cmd_example(args) -> int:
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.id == "hs1":
            ok = _example_hs1(args, out)
        elif args.id == "hs2":
            ok = _example_hs2(args, out)
        else:
            ok = _example_hs3(args.id, args, out)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FlowError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"comparison CSV written to {out}")
    return EXIT_OK if ok else EXIT_VERIFY


# --- parser ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: config error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for grid sweeps (default: $GRAPHFLOW_THREADS or all cores)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomised checks")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="graphflow", description="Graphical mean curvature flow into model targets.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("run", parents=[common], help="integrate a configured flow")
    pr.add_argument("--config", required=True, help="INI run configuration")
    pr.set_defaults(func=cmd_run)

    pv = sub.add_parser("verify", parents=[common], help="run acceptance checks")
    pv.add_argument("suite", help="examples, invariants or all")
    pv.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    pv.set_defaults(func=cmd_verify)

    pe = sub.add_parser("example", parents=[common], help="reproduce a closed-form example")
    pe.add_argument("id", choices=sorted(ORACLES))
    pe.add_argument("--c", type=float, default=0.5, help="slope parameter for hs3a/hs3b")
    pe.add_argument("--r0", type=float, default=0.3, help="initial radius for hs2")
    pe.add_argument("--d0", type=float, default=1.0, help="initial height for hs1")
    pe.add_argument("--grid", type=int, default=None, help="grid points for the PDE run")
    pe.add_argument("--t-end", type=float, default=None)
    pe.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.threads is not None:
        os.environ["GRAPHFLOW_THREADS"] = str(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FlowError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GraphFlowError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
