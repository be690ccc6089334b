"""Batch front-end.

    layerhom {fine,effective,compare,sweep,stochastic,selftest} --config run.ini --out DIR

Configs are INI files with the sections ``geometry``, ``microstructure``,
``material``, ``loads``, ``time``, ``solver`` and ``output``. Load entries
are arithmetic expressions in ``x1``, ``x3`` and ``t``. Every run writes a
``manifest.json`` next to its artifacts, also when it fails.
"""
import argparse
import ast
import configparser
import hashlib
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__, kernels
from .errors import ConfigParse, LayerhomError, SolverError, ValidationError
from .microstructure import (
    build_layers,
    coarse_average,
    count_density,
    write_density_csv,
    write_layers_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_SOLVER, EXIT_ACCEPTANCE = 0, 2, 3, 4, 5
EXIT_INTERNAL = 1

# ------------------------------------------------------------------ expressions

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "tanh": np.tanh, "sinh": np.sinh, "cosh": np.cosh, "abs": np.abs,
    "minimum": np.minimum, "maximum": np.maximum, "where": np.where,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = ("x1", "x3", "t")
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load, ast.Call,
          ast.Compare, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.USub, ast.UAdd,
          ast.Lt, ast.LtE, ast.Gt, ast.GtE)


class Expr:
    """Whitelisted arithmetic expression in x1, x3, t; picklable."""

    def __init__(self, source):
        self.source = str(source).strip()
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ConfigParse(f"bad expression {self.source!r}: {exc.msg}") from exc
        for node in ast.walk(tree):
            if not isinstance(node, _NODES):
                raise ConfigParse(f"{type(node).__name__} not allowed in {self.source!r}")
            if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
                raise ConfigParse(f"only numeric constants allowed in {self.source!r}")
            if isinstance(node, ast.Name) and node.id not in _FUNCS and node.id not in _CONSTS \
                    and node.id not in _VARS:
                raise ConfigParse(f"unknown name {node.id!r} in {self.source!r}")
            if isinstance(node, ast.Call) and (not isinstance(node.func, ast.Name)
                                               or node.func.id not in _FUNCS or node.keywords):
                raise ConfigParse(f"unsupported call in {self.source!r}")
        self._code = compile(tree, "<load>", "eval")

    def __getstate__(self):
        return {"source": self.source}

    def __setstate__(self, state):
        self.__init__(state["source"])

    def __call__(self, x1, x3, t=0.0):
        env = dict(_FUNCS, **_CONSTS, x1=x1, x3=x3, t=t)
        out = eval(self._code, {"__builtins__": {}}, env)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x1))


class VectorExpr:
    """Pair of component expressions (u1, u3) as one field callable."""

    def __init__(self, e1, e3):
        self.e1 = Expr(e1)
        self.e3 = Expr(e3)

    def __call__(self, x1, x3, t=0.0):
        return np.stack([self.e1(x1, x3, t), self.e3(x1, x3, t)])

    def is_zero(self):
        return self.e1.source in ("0", "0.0") and self.e3.source in ("0", "0.0")


# ------------------------------------------------------------------ config

_DEFAULTS = {
    "geometry": {"W": "1.0", "L": "1.0"},
    "microstructure": {"mode": "periodic", "b": "2", "c2": "1.0", "delta": "0.5", "seed": "0",
                       "process": "bernoulli_lattice", "p": "0.5", "p1": "0.2", "p2": "0.8",
                       "mix_weight": "0.5", "jitter": "0.0", "min_gap": "1.0", "replica": "0",
                       "replicas": "8", "window": ""},
    "material": {"a": "1", "c1": "1.0", "l": "0.0", "soft_class": "unit", "mu0": "1.0",
                 "lam0": "1.0", "s": "1.0", "rho": "1.0", "rho_bar": "1.0"},
    "loads": {"f1": "0", "f3": "0", "a01": "0", "a03": "0", "b01": "0", "b03": "0"},
    "time": {"T": "1.0", "dt": "", "static": "false"},
    "solver": {"n1": "32", "h3": "0.015625", "h3_per_eps": "", "cells_per_layer": "4",
               "min_soft_cells": "1", "n3_eff": "64", "micro_cells": "32", "method": "direct",
               "tol": "1e-10", "sample_every": "64", "bc": "dirichlet_all",
               "error_ratio_min": "1.3", "n_window": ""},
    "output": {"directory": "out", "formats": "csv", "prefix": ""},
}


class RunConfig:
    """Parsed and typed view of an INI config."""

    def __init__(self, parser, text):
        self.text = text
        self.sha256 = hashlib.sha256(text.encode("utf-8")).hexdigest()
        self._p = parser
        try:
            self._build()
        except ValueError as exc:
            raise ConfigParse(str(exc)) from exc

    def _get(self, sec, key, cast=str):
        raw = self._p.get(sec, key, fallback=_DEFAULTS.get(sec, {}).get(key, ""))
        if cast is str:
            return raw.strip()
        if raw.strip() == "":
            return None
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError as exc:
            raise ConfigParse(f"[{sec}] {key} = {raw!r} is not a valid {cast.__name__}") from exc

    def _floats(self, raw):
        try:
            return [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigParse(f"bad number list {raw!r}") from exc

    def _build(self):
        g = self._get
        self.W = g("geometry", "W", float)
        self.L = g("geometry", "L", float)
        self.mode = g("microstructure", "mode")
        eps = g("microstructure", "epsilon")
        self.epsilon = float(eps) if eps else None
        self.epsilon_list = self._floats(g("microstructure", "epsilon_list"))
        self.b = g("microstructure", "b", float)
        self.c2 = g("microstructure", "c2", float)
        self.delta = g("microstructure", "delta", float)
        self.centers = self._floats(g("microstructure", "centers"))
        self.seed = g("microstructure", "seed", int)
        self.process = {k: g("microstructure", k, float)
                        for k in ("p", "p1", "p2", "mix_weight", "jitter", "min_gap")}
        self.process_kind = g("microstructure", "process")
        self.replica = g("microstructure", "replica", int)
        self.replicas = g("microstructure", "replicas", int)
        self.window = g("microstructure", "window", float)
        m = "material"
        self.a = g(m, "a", float)
        self.c1 = g(m, "c1", float)
        self.l = g(m, "l", float)
        self.soft_class = g(m, "soft_class")
        self.mu0 = g(m, "mu0", float)
        self.lam0 = g(m, "lam0", float)
        self.s = g(m, "s", float)
        self.rho = g(m, "rho", float)
        self.rho_bar = g(m, "rho_bar", float)
        self.force = VectorExpr(g("loads", "f1"), g("loads", "f3"))
        self.a0 = VectorExpr(g("loads", "a01"), g("loads", "a03"))
        self.b0 = VectorExpr(g("loads", "b01"), g("loads", "b03"))
        self.T = g("time", "T", float)
        self.dt = g("time", "dt", float)
        self.static = g("time", "static", bool)
        sv = "solver"
        self.n1 = g(sv, "n1", int)
        self.h3 = g(sv, "h3", float)
        self.h3_per_eps = g(sv, "h3_per_eps", float)
        self.cells_per_layer = g(sv, "cells_per_layer", int)
        self.min_soft_cells = g(sv, "min_soft_cells", int)
        self.n3_eff = g(sv, "n3_eff", int)
        self.micro_cells = g(sv, "micro_cells", int)
        self.method = g(sv, "method")
        self.tol = g(sv, "tol", float)
        self.sample_every = g(sv, "sample_every", int)
        self.bc = g(sv, "bc")
        self.error_ratio_min = g(sv, "error_ratio_min", float)
        self.n_window = g(sv, "n_window", float)
        self.out_dir = g("output", "directory")
        self.formats = g("output", "formats").lower()
        if self.formats not in ("csv", "vtk", "both"):
            raise ConfigParse(f"output formats must be csv, vtk or both, not {self.formats!r}")

    # derived objects -------------------------------------------------

    def scaling(self):
        from .operators import MaterialScaling, SoftClass
        soft = SoftClass(self.soft_class, self.mu0, self.lam0, self.s)
        return MaterialScaling(self.a, self.b, self.c1, self.c2, self.l, soft, self.rho,
                               self.rho_bar)

    def loads(self):
        from .fine_solver import Loads
        return Loads(f=None if self.force.is_zero() else self.force,
                     a0=None if self.a0.is_zero() else self.a0,
                     b0=None if self.b0.is_zero() else self.b0)

    def single_epsilon(self):
        if self.epsilon is not None:
            return self.epsilon
        if len(self.epsilon_list) == 1:
            return self.epsilon_list[0]
        raise ConfigParse("[microstructure] needs epsilon for a single run")

    def layers(self, eps):
        sc = self.scaling()
        r = sc.r(eps)
        if self.mode == "periodic":
            return build_layers("periodic", eps, r, self.L, self.delta)
        if self.mode == "explicit":
            return build_layers("explicit", eps, r, self.L, self.delta, centers=self.centers)
        if self.mode == "none":
            return build_layers("explicit", eps, r, self.L, self.delta, centers=[])
        if self.mode == "stochastic":
            from .stochastic import restrict_and_scale, sample_process
            om = sample_process(self.process_model(), (0.0, self.L / eps), replica=self.replica)
            return build_layers("explicit", eps, r, self.L, self.delta,
                                centers=restrict_and_scale(om, eps, self.L))
        raise ConfigParse(f"unknown microstructure mode {self.mode!r}")

    def process_model(self):
        from .stochastic import ProcessModel
        return ProcessModel(self.process_kind, seed=self.seed, **self.process)

    def grid_spec(self, eps):
        from .fine_solver import GridSpec
        h3 = self.h3 if self.h3_per_eps is None else self.h3_per_eps * eps
        return GridSpec(n1=self.n1, width=self.W, h3=h3, cells_per_layer=self.cells_per_layer,
                        min_soft_cells=self.min_soft_cells)


def load_config(path, seed=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigParse(str(exc)) from exc
    unknown = set(parser.sections()) - set(_DEFAULTS)
    if unknown:
        raise ConfigParse(f"unknown sections: {', '.join(sorted(unknown))}")
    for sec in parser.sections():
        extra = set(parser[sec]) - set(_DEFAULTS[sec]) - {"epsilon", "epsilon_list", "centers"}
        if extra:
            raise ConfigParse(f"unknown keys in [{sec}]: {', '.join(sorted(extra))}")
    if seed is not None:
        if not parser.has_section("microstructure"):
            parser.add_section("microstructure")
        parser.set("microstructure", "seed", str(seed))
    return RunConfig(parser, text)


# ------------------------------------------------------------------ runs


def _effective_n(cfg, ls, x3):
    """Coarse layer density per effective x3 cell."""
    if cfg.mode == "periodic":
        return 1.0
    dens = count_density(ls.centers, ls.epsilon, cfg.L)
    window = cfg.n_window or max(ls.epsilon, float(np.max(np.diff(x3))))
    mid = 0.5 * (x3[1:] + x3[:-1])
    return coarse_average(dens, window, points=mid)


def _write_fields(ctx, stem, times, u, v, x1, x3):
    from .io import write_trajectory_csv, write_vtk_series
    if ctx.formats in ("csv", "both"):
        ctx.artifact(write_trajectory_csv(ctx.path(f"{stem}.csv"), times, u, v, x1, x3))
    if ctx.formats in ("vtk", "both"):
        for p in write_vtk_series(ctx.path(f"{stem}_vtk"), stem, times, u, v, x1, x3):
            ctx.artifact(p)


def _fine(cfg, ctx, eps):
    from .fine_solver import build_fine_problem, solve_dynamic_fine, solve_static_fine
    sc = cfg.scaling()
    ls = cfg.layers(eps)
    write_layers_csv(ctx.artifact(ctx.path("layers.csv")), ls)
    if len(ls):
        write_density_csv(ctx.artifact(ctx.path("density.csv")), count_density(ls.centers, eps, cfg.L))
    p = build_fine_problem(ls, sc, eps, cfg.grid_spec(eps), cfg.loads(), cfg.T, cfg.dt, cfg.bc,
                           cfg.method, cfg.tol)
    ctx.manifest["fine"] = {"grid": list(p.grid.shape), "contrast": p.contrast,
                            "cells": p.cell_counts, "n_layers": len(ls)}
    if cfg.static:
        u = solve_static_fine(p)
        times, U, V = np.array([0.0]), u[None], np.zeros_like(u)[None]
    else:
        st = solve_dynamic_fine(p, sample_every=cfg.sample_every)
        times, U, V = st.times, st.u, st.v
        ctx.manifest["fine"]["energy_residual_max"] = float(st.energy_residual().max())
    _write_fields(ctx, "fine", times, U, V, p.grid.x1, p.grid.x3)
    return ls, p, times, U


def _effective(cfg, ctx, eps):
    from .effective_solver import (
        build_critical_problem,
        classify_regime,
        make_effective_problem,
        solve_effective_critical,
        solve_effective_intermediate,
        solve_effective_static,
        solve_effective_stiff,
    )
    from .grid import TensorGrid, uniform_nodes
    from .io import write_micro_profiles_csv
    sc = cfg.scaling()
    reg = classify_regime(sc)
    ls = cfg.layers(eps)
    if reg.interlayer_class == "critical":
        if cfg.static:
            raise ValidationError("the two-scale model is dynamic only; set static = false")
        cp = build_critical_problem(ls, sc, cfg.n1, cfg.micro_cells, cfg.loads(), cfg.T, cfg.dt,
                                    cfg.W)
        ts = solve_effective_critical(cp, sample_every=cfg.sample_every)
        ctx.manifest["effective"] = {"lines": int(ts.lines.size), "micro_cells": cfg.micro_cells,
                                     "energy_residual_max": float(ts.energy_residual().max())}
        _write_fields(ctx, "effective", ts.times, ts.V, ts.v, ts.x1, ts.lines)
        if ctx.formats in ("csv", "both"):
            ctx.artifact(write_micro_profiles_csv(ctx.path("micro_profiles.csv"), ts))
        return ("critical", ts)
    grid = TensorGrid(uniform_nodes(0.0, cfg.W, cfg.n1), uniform_nodes(0.0, cfg.L, cfg.n3_eff))
    n = _effective_n(cfg, ls, grid.x3)
    ep = make_effective_problem(sc, grid, n, cfg.loads(), cfg.T, cfg.dt, cfg.method, cfg.tol)
    if cfg.static:
        if reg.interlayer_class != "unit":
            raise ValidationError("the static effective model needs the unit soft class")
        u = solve_effective_static(ep)
        times, U, V = np.array([0.0]), u[None], np.zeros_like(u)[None]
    else:
        solve = solve_effective_stiff if reg.interlayer_class == "unit" else solve_effective_intermediate
        st = solve(ep, sample_every=cfg.sample_every)
        times, U, V = st.times, st.u, st.v
        ctx.manifest["effective"] = {"energy_residual_max": float(st.energy_residual().max())}
    _write_fields(ctx, "effective", times, U, V, grid.x1, grid.x3)
    return ("plane", (grid, n, times, U))


def cmd_fine(cfg, ctx, args):
    _fine(cfg, ctx, cfg.single_epsilon())
    return EXIT_OK


def cmd_effective(cfg, ctx, args):
    _effective(cfg, ctx, cfg.single_epsilon())
    return EXIT_OK


def cmd_compare(cfg, ctx, args):
    from .analysis import l2_error
    from .effective_solver import corrector_field
    from .report import DiagnosticsReport
    eps = cfg.single_epsilon()
    ls, p, times, U = _fine(cfg, ctx, eps)
    kind, eff = _effective(cfg, ctx, eps)
    rep = DiagnosticsReport()
    tt = times if times.size > 1 else None
    u = U if tt is not None else U[0]
    if kind == "critical":
        C = corrector_field(eff, ls, eps, p.grid)
        rep.add(eps, "corrector_error", l2_error(u, C, p.grid, times=tt))
    else:
        grid, _, _, Ue = eff
        ue = Ue if tt is not None else Ue[0]
        rep.add(eps, "l2_error", l2_error(u, ue, p.grid, times=tt, grid_b=grid, interpolate=True))
    rep.add(eps, "fine_norm", l2_error(u, np.zeros_like(u), p.grid, times=tt))
    rep.write_csv(ctx.artifact(ctx.path("diagnostics.csv")))
    rep.write_summary(ctx.artifact(ctx.path("summary.json")))
    return EXIT_OK


def _study_config(cfg):
    from .analysis import StudyConfig
    from .effective_solver import classify_regime
    sc = cfg.scaling()
    reg = classify_regime(sc)
    if cfg.mode == "none":
        kind = "homogeneous"
    elif reg.interlayer_class == "critical":
        kind = "critical_dynamic"
    elif reg.interlayer_class == "unit" and cfg.static:
        kind = "stiff_static"
    else:
        raise ValidationError("sweeps support the static unit-class and dynamic critical-class setups")
    if cfg.mode not in ("periodic", "none"):
        raise ValidationError("sweeps need periodic layers")
    return StudyConfig(kind, sc, cfg.force, width=cfg.W, length=cfg.L, delta=cfg.delta, n1=cfg.n1,
                       h3=cfg.h3, h3_per_eps=cfg.h3_per_eps, cells_per_layer=cfg.cells_per_layer,
                       min_soft_cells=cfg.min_soft_cells, n3_eff=cfg.n3_eff,
                       micro_cells=cfg.micro_cells, T=cfg.T, dt=cfg.dt,
                       sample_every=cfg.sample_every, error_ratio_min=cfg.error_ratio_min)


def _run_one(args):
    from .analysis import run_single
    study, eps = args
    return run_single(study, eps)


def cmd_sweep(cfg, ctx, args):
    from .analysis import convergence_study
    study = _study_config(cfg)
    runner = None
    if args.threads > 1:
        def runner(eps_list):
            with ProcessPoolExecutor(max_workers=args.threads) as ex:
                return list(ex.map(_run_one, [(study, e) for e in eps_list]))
    rep = convergence_study(study, cfg.epsilon_list, runner=runner)
    rep.write_csv(ctx.artifact(ctx.path("diagnostics.csv")))
    rep.write_summary(ctx.artifact(ctx.path("summary.json")))
    ctx.manifest["sweep"] = {"kind": study.kind, "epsilon_list": cfg.epsilon_list,
                             "passed": rep.passed}
    return EXIT_OK if rep.passed else EXIT_ACCEPTANCE


def cmd_stochastic(cfg, ctx, args):
    from .stochastic import empirical_density_limit, write_stochastic_csv
    eps_list = cfg.epsilon_list or [cfg.single_epsilon()]
    model = cfg.process_model()
    rep = empirical_density_limit(model, eps_list, cfg.L, cfg.replicas, window=cfg.window)
    path = ctx.artifact(ctx.path("stochastic.csv"))
    write_stochastic_csv(path, rep)
    rep.write_summary(ctx.artifact(ctx.path("summary.json")))
    ctx.manifest["stochastic"] = {"model": model.kind, "replicas": cfg.replicas,
                                  "replica_seeds": [[model.seed, r] for r in range(cfg.replicas)]}
    return EXIT_OK


def cmd_selftest(cfg, ctx, args):
    from . import selftest
    results = selftest.run_all()
    for name, ok, msg in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + msg if msg else ''}")
    ctx.manifest["selftest"] = {name: ok for name, ok, _ in results}
    if all(ok for _, ok, _ in results):
        return EXIT_OK
    raise SolverError("selftest failures: " + ", ".join(n for n, ok, _ in results if not ok))


COMMANDS = {"fine": cmd_fine, "effective": cmd_effective, "compare": cmd_compare,
            "sweep": cmd_sweep, "stochastic": cmd_stochastic, "selftest": cmd_selftest}


# ------------------------------------------------------------------ plumbing


class _Context:
    def __init__(self, out_dir, formats, command):
        self.out_dir = out_dir
        self.formats = formats
        self.artifacts = []
        self.manifest = {"command": command, "status": "running"}

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def artifact(self, path):
        self.artifacts.append(os.path.relpath(path, self.out_dir))
        return path

    def write_manifest(self):
        os.makedirs(self.out_dir, exist_ok=True)
        self.manifest["artifacts"] = self.artifacts
        with open(self.path("manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def _set_threads(n):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def build_parser():
    ap = argparse.ArgumentParser(prog="layerhom", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"layerhom {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=(name != "selftest"))
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--format", choices=("csv", "vtk", "both"))
    return ap


def _error_record(exc, code):
    return {"type": type(exc).__name__, "family": {EXIT_CONFIG: "config", EXIT_VALIDATION: "validation",
                                                    EXIT_SOLVER: "solver"}.get(code, "internal"),
            "message": str(exc), "exit_code": code}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    _set_threads(args.threads)
    out = args.out or "out"
    ctx = _Context(out, args.format or "csv", args.command)
    ctx.manifest.update({
        "versions": {"layerhom": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "backend": kernels.BACKEND,
        "threads": args.threads,
    })
    code = EXIT_OK
    try:
        if args.config:
            cfg = load_config(args.config, seed=args.seed)
            if args.out is None:
                ctx.out_dir = cfg.out_dir
            ctx.formats = args.format or cfg.formats
            ctx.manifest["config"] = {"path": os.path.abspath(args.config), "sha256": cfg.sha256}
            ctx.manifest["seeds"] = {"microstructure": cfg.seed}
        else:
            cfg = None
        os.makedirs(ctx.out_dir, exist_ok=True)
        if cfg is not None:
            from .effective_solver import classify_regime
            ctx.manifest["regime"] = classify_regime(cfg.scaling()).as_dict()
        code = COMMANDS[args.command](cfg, ctx, args)
        ctx.manifest["status"] = "ok" if code == EXIT_OK else "acceptance_failure"
    except ConfigParse as exc:
        code = EXIT_CONFIG
        ctx.manifest.update(status="error", error=_error_record(exc, code))
    except ValidationError as exc:
        code = EXIT_VALIDATION
        ctx.manifest.update(status="error", error=_error_record(exc, code))
    except SolverError as exc:
        code = EXIT_SOLVER
        ctx.manifest.update(status="error", error=_error_record(exc, code))
    except (LayerhomError, OSError) as exc:
        code = EXIT_INTERNAL
        ctx.manifest.update(status="error", error=_error_record(exc, code))
    ctx.manifest["exit_code"] = code
    try:
        ctx.write_manifest()
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
    if "error" in ctx.manifest:
        err = ctx.manifest["error"]
        print(f"error [{err['type']}]: {err['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
