"""Diagnostics tying fine-scale runs to the homogenized models.

Space integrals of nodal fields use the bilinear interpolant with 2x2 Gauss
points per cell (exact for products of bilinear fields); time integrals use
the trapezoid rule over the stored samples.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .effective_solver import (
    build_critical_problem,
    corrector_field,
    make_effective_problem,
    solve_effective_critical,
    solve_effective_static,
)
from .errors import DegenerateField, GridMismatch, InsufficientEpsilons, ValidationError
from .fine_solver import GridSpec, Loads, build_fine_problem, solve_dynamic_fine, solve_static_fine
from .grid import TensorGrid, interp_x3, uniform_nodes
from .microstructure import build_layers, layer_query
from .report import DiagnosticsReport

_GP = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


def _gauss_points(grid, cells3=None):
    """Gauss points (x1, x3), weights and bilinear shape values.

    Returns X1, X3, W of shape (N1-1, n3c, 4) and shape functions (4, 4)
    ordered as local nodes a = 2*ia + ja.
    """
    x1, x3 = grid.x1, grid.x3
    c3 = np.arange(x3.size - 1) if cells3 is None else np.asarray(cells3)
    h1 = np.diff(x1)
    h3 = (x3[1:] - x3[:-1])[c3]
    g1, g3 = np.meshgrid(_GP, _GP, indexing="ij")
    g1 = g1.ravel()
    g3 = g3.ravel()
    X1 = x1[:-1, None, None] + h1[:, None, None] * g1[None, None, :]
    X3 = x3[c3][None, :, None] + h3[None, :, None] * g3[None, None, :]
    W = (h1[:, None, None] * h3[None, :, None]) * 0.25 * np.ones((1, 1, 4))
    N = np.stack([(1 - g1) * (1 - g3), (1 - g1) * g3, g1 * (1 - g3), g1 * g3], axis=1)
    return X1, X3, W, N, c3


def _interp_at_gauss(u, N, c3):
    """Bilinear values at Gauss points; u has shape (..., N1, N3)."""
    u = np.asarray(u, dtype=float)
    corners = np.stack([u[..., :-1, c3], u[..., :-1, c3 + 1], u[..., 1:, c3], u[..., 1:, c3 + 1]],
                       axis=-1)
    return corners @ N


def _grads_at_gauss(u, grid, c3):
    """(d1 u, d3 u) at Gauss points for bilinear u of shape (..., N1, N3)."""
    u = np.asarray(u, dtype=float)
    h1 = np.diff(grid.x1)[:, None, None]
    h3 = np.diff(grid.x3)[c3][None, :, None]
    g1, g3 = np.meshgrid(_GP, _GP, indexing="ij")
    g1 = g1.ravel()
    g3 = g3.ravel()
    u00 = u[..., :-1, c3][..., None]
    u01 = u[..., :-1, c3 + 1][..., None]
    u10 = u[..., 1:, c3][..., None]
    u11 = u[..., 1:, c3 + 1][..., None]
    d1 = ((u10 - u00) * (1 - g3) + (u11 - u01) * g3) / h1
    d3 = ((u01 - u00) * (1 - g1) + (u11 - u10) * g1) / h3
    return d1, d3


def _space_integral_sq(d, grid, weight=None):
    """int weight |d|^2 dx for nodal d of shape (..., 2, N1, N3)."""
    X1, X3, W, N, c3 = _gauss_points(grid)
    vals = _interp_at_gauss(d, N, c3)
    sq = np.sum(vals**2, axis=-4)
    if weight is not None:
        w = np.asarray(weight, dtype=float)
        w = np.broadcast_to(w[..., None] if w.ndim == 2 else w, W.shape)
        sq = sq * w
    return np.sum(sq * W, axis=(-3, -2, -1))


def l2_error(a, b, grid, times=None, weight=None, grid_b=None, interpolate=False):
    """sqrt of the (space-time) integral of weight |a - b|^2.

    ``a`` and ``b`` are nodal fields (2, N1, N3) or trajectories
    (nt, 2, N1, N3). ``b`` may live on ``grid_b`` sharing x1 nodes; it is
    then moved onto ``grid`` by linear x3 interpolation if ``interpolate``.
    ``weight`` is an optional per-cell density of shape (N1-1, N3-1).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if grid_b is not None and not grid_b.same_as(grid):
        if not interpolate:
            raise GridMismatch("fields live on different grids and interpolation is disabled")
        if grid_b.x1.shape != grid.x1.shape or not np.allclose(grid_b.x1, grid.x1, atol=1e-14):
            raise GridMismatch("grids must share x1 nodes")
        b = interp_x3(b, grid_b.x3, grid.x3)
    if a.shape != b.shape:
        raise GridMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    sq = _space_integral_sq(a - b, grid, weight)
    if a.ndim == 3:
        return float(math.sqrt(max(sq, 0.0)))
    if times is None:
        raise ValidationError("trajectories need their sample times")
    return float(math.sqrt(max(trapezoid(sq, times), 0.0)))


def _stiff_cells(grid, ls):
    _, z3 = grid.cell_centers()
    inside, _, _ = layer_query(ls, z3)
    return np.flatnonzero(np.asarray(inside))


def _eval_psi(psi, X1, X3, t, Y):
    val = np.asarray(psi(X1, X3, t, Y), dtype=float)
    shape = np.broadcast_shapes(np.shape(X1), np.shape(X3), np.shape(Y))
    return np.broadcast_to(val, (2,) + shape) if val.ndim == len(shape) else val


def measure_moment(u, grid, ls, psi, times=None):
    """int int u . psi(x, t, y) dm_ε dt over the stiff cells.

    ``psi(X1, X3, t, Y)`` returns a scalar field (applied to both components)
    or a (2, ...) field; ``Y = (x3 - center)/r`` is the layer coordinate.
    """
    u = np.asarray(u, dtype=float)
    c3 = _stiff_cells(grid, ls)
    if c3.size == 0:
        return 0.0
    X1, X3, W, N, c3 = _gauss_points(grid, c3)
    _, _, Y = layer_query(ls, X3.ravel())
    Y = np.asarray(Y).reshape(X3.shape)
    wt = ls.epsilon / ls.thickness
    static = u.ndim == 3
    traj = u[None] if static else u
    ts = [0.0] if static else list(times)
    vals = []
    for k, t in enumerate(ts):
        ug = _interp_at_gauss(traj[k], N, c3)
        pv = _eval_psi(psi, X1, X3, t, Y)
        vals.append(wt * float(np.sum(np.sum(ug * pv, axis=0) * W)))
    return vals[0] if static else float(trapezoid(vals, ts))


def effective_moment(u, grid, n, psi, times=None):
    """int int n u . psi(x, t, 0) dx dt for a macro field on a tensor grid."""
    X1, X3, W, N, c3 = _gauss_points(grid)
    n = np.asarray(n, dtype=float)
    ncell = np.full(grid.shape[1] - 1, float(n)) if n.ndim == 0 else n
    u = np.asarray(u, dtype=float)
    static = u.ndim == 3
    traj = u[None] if static else u
    ts = [0.0] if static else list(times)
    vals = []
    for k, t in enumerate(ts):
        ug = _interp_at_gauss(traj[k], N, c3)
        pv = _eval_psi(psi, X1, X3, t, np.zeros_like(X3))
        vals.append(float(np.sum(np.sum(ug * pv, axis=0) * W * ncell[None, :, None])))
    return vals[0] if static else float(trapezoid(vals, ts))


def line_moment(V, x1, lines, weights, psi, times):
    """int int v . psi dx dt for macro values on x3 lines (trapezoid in x1)."""
    h = np.diff(x1)
    w1 = np.zeros_like(x1)
    w1[:-1] += 0.5 * h
    w1[1:] += 0.5 * h
    X1, X3 = np.meshgrid(x1, lines, indexing="ij")
    wts = w1[:, None] * np.broadcast_to(weights, lines.shape)[None, :]
    vals = []
    for k, t in enumerate(times):
        pv = _eval_psi(psi, X1, X3, t, np.zeros_like(X3))
        vals.append(float(np.sum(np.sum(V[k] * pv, axis=0) * wts)))
    return float(trapezoid(vals, times)) if len(times) > 1 else vals[0]


def layer_norms(u, grid, ls):
    """(int |e(u)|^2 dm_ε, int |u|^2 dm_ε) for a static nodal field."""
    c3 = _stiff_cells(grid, ls)
    X1, X3, W, N, c3 = _gauss_points(grid, c3)
    wt = ls.epsilon / ls.thickness
    d1, d3 = _grads_at_gauss(u, grid, c3)
    e11 = d1[0]
    e33 = d3[1]
    e13 = 0.5 * (d3[0] + d1[1])
    strain = wt * float(np.sum((e11**2 + 2 * e13**2 + e33**2) * W))
    ug = _interp_at_gauss(u, N, c3)
    mass = wt * float(np.sum(np.sum(ug**2, axis=0) * W))
    return strain, mass


def key_inequality_ratio(phi, grid, ls):
    """LHS/RHS of the layer Korn-type inequality.

    LHS = int (|phi1/r|^2 + |phi3|^2) dm_ε and RHS = (1/r^2) int |e(phi)|^2 dm_ε.
    ``phi`` is (2, N1, N3) or a batch (B, 2, N1, N3); returns float or (B,).
    """
    phi = np.asarray(phi, dtype=float)
    single = phi.ndim == 3
    batch = phi[None] if single else phi
    r = ls.thickness
    c3 = _stiff_cells(grid, ls)
    X1, X3, W, N, c3 = _gauss_points(grid, c3)
    wt = ls.epsilon / r
    vals = _interp_at_gauss(batch, N, c3)
    lhs = wt * np.sum(((vals[:, 0] / r) ** 2 + vals[:, 1] ** 2) * W, axis=(1, 2, 3))
    d1, d3 = _grads_at_gauss(batch, grid, c3)
    e11 = d1[:, 0]
    e33 = d3[:, 1]
    e13 = 0.5 * (d3[:, 0] + d1[:, 1])
    rhs = wt / r**2 * np.sum((e11**2 + 2 * e13**2 + e33**2) * W, axis=(1, 2, 3))
    out = np.zeros_like(lhs)
    bad = (rhs <= 0) & (lhs > 0)
    if np.any(bad):
        raise DegenerateField("zero layer strain with nonzero layer displacement")
    ok = rhs > 0
    out[ok] = lhs[ok] / rhs[ok]
    return float(out[0]) if single else out


def energy_residual(trajectory):
    """Relative energy/work balance error at every time step."""
    return trajectory.energy_residual()


# ------------------------------------------------------------ battery


def _bump(cx, cz, rad):
    def f(X1, X3, t=0.0, Y=None):
        r2 = ((X1 - cx) ** 2 + (X3 - cz) ** 2) / rad**2
        return np.where(r2 < 1.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - r2, 1e-300)), 0.0)
    return f


def _trig(p, q, W, L):
    def f(X1, X3, t=0.0, Y=None):
        return np.sin(p * np.pi * X1 / W) * np.sin(q * np.pi * X3 / L)
    return f


def moment_battery(W=1.0, L=1.0):
    """Five bumps and three trigonometric modes, as (name, psi) pairs.

    Each scalar psi is used on both components.
    """
    specs = [(0.5, 0.5, 0.4), (0.35, 0.4, 0.3), (0.65, 0.6, 0.3), (0.45, 0.35, 0.3), (0.55, 0.65, 0.3)]
    out = [(f"bump{k}", _bump(cx * W, cz * L, rad * min(W, L))) for k, (cx, cz, rad) in enumerate(specs)]
    out += [(f"trig{p}{q}", _trig(p, q, W, L)) for p, q in ((1, 1), (2, 1), (1, 2))]
    return out


# ------------------------------------------------------------ study


@dataclass
class StudyConfig:
    """Shared data for an ε-sweep.

    ``kind``: ``"stiff_static"`` (static fine vs. stiff-interlayer limit),
    ``"critical_dynamic"`` (dynamic fine vs. two-scale corrector) or
    ``"homogeneous"`` (no layers; fine and effective must agree).
    """

    kind: str
    scaling: object
    force: object
    width: float = 1.0
    length: float = 1.0
    delta: float = 0.5
    n1: int = 32
    h3: float = 1.0 / 128
    h3_per_eps: float = None
    cells_per_layer: int = 4
    min_soft_cells: int = 8
    n3_eff: int = 128
    micro_cells: int = 12
    T: float = 1.0
    dt: float = None
    sample_every: int = 16
    error_ratio_min: float = 1.3
    apriori_factor: float = 2.0
    moments: bool = True
    extra: dict = field(default_factory=dict)


def _rate(eps, vals):
    e = np.log(np.asarray(eps, dtype=float))
    v = np.log(np.maximum(np.asarray(vals, dtype=float), 1e-300))
    return float(np.polyfit(e, v, 1)[0])


def _grid_spec(cfg, eps):
    h3 = cfg.h3 if cfg.h3_per_eps is None else cfg.h3_per_eps * eps
    return GridSpec(n1=cfg.n1, width=cfg.width, h3=h3, cells_per_layer=cfg.cells_per_layer,
                    min_soft_cells=cfg.min_soft_cells)


def _static_run(cfg, eps, battery):
    sc = cfg.scaling
    if cfg.kind == "homogeneous":
        ls = build_layers("explicit", eps, sc.r(eps), cfg.length, cfg.delta, centers=[])
        n = 0.0
    else:
        ls = build_layers("periodic", eps, sc.r(eps), cfg.length, cfg.delta)
        n = 1.0
    p = build_fine_problem(ls, sc, eps, _grid_spec(cfg, eps))
    u = solve_static_fine(p, cfg.force)
    ge = TensorGrid(uniform_nodes(0.0, cfg.width, cfg.n1), uniform_nodes(0.0, cfg.length, cfg.n3_eff))
    ep = make_effective_problem(sc, ge, n)
    ue = solve_effective_static(ep, cfg.force)
    out = {"l2_error": l2_error(u, ue, p.grid, grid_b=ge, interpolate=True),
           "fine_norm": l2_error(u, np.zeros_like(u), p.grid)}
    if len(ls):
        strain, mass = layer_norms(u, p.grid, ls)
        out["apriori_strain"] = strain * sc.r(eps) * sc.mu1(eps) / eps
        out["apriori_mass"] = mass
        for name, psi in battery:
            for c in (0, 1):
                def pc(X1, X3, t, Y, psi=psi, c=c):
                    v = psi(X1, X3)
                    z = np.zeros_like(v)
                    return np.stack([v, z] if c == 0 else [z, v])
                fine = measure_moment(u, p.grid, ls, pc)
                eff = effective_moment(ue, ge, n, pc)
                out[f"moment_gap:{name}:u{2 * c + 1}"] = abs(fine - eff)
    return out


def _critical_run(cfg, eps, battery):
    sc = cfg.scaling
    ls = build_layers("periodic", eps, sc.r(eps), cfg.length, cfg.delta)
    loads = Loads(f=cfg.force)
    dt = cfg.dt or cfg.T / 1024
    p = build_fine_problem(ls, sc, eps, _grid_spec(cfg, eps), loads=loads, T=cfg.T, dt=dt)
    st = solve_dynamic_fine(p, sample_every=cfg.sample_every)
    cp = build_critical_problem(ls, sc, n1=cfg.n1, micro_cells=cfg.micro_cells, loads=loads,
                                T=cfg.T, dt=dt, width=cfg.width)
    ts = solve_effective_critical(cp, sample_every=cfg.sample_every)
    C = corrector_field(ts, ls, eps, p.grid)
    out = {"corrector_error": l2_error(st.u, C, p.grid, times=st.times),
           "fine_norm": l2_error(st.u, np.zeros_like(st.u), p.grid, times=st.times),
           "fine_energy_residual": float(st.energy_residual().max()),
           "effective_energy_residual": float(ts.energy_residual().max())}
    for name, psi in battery:
        for c in (0, 1):
            def pc(X1, X3, t, Y, psi=psi, c=c):
                v = psi(X1, X3)
                z = np.zeros_like(v)
                return np.stack([v, z] if c == 0 else [z, v])
            fine = measure_moment(st.u, p.grid, ls, pc, st.times)
            eff = line_moment(ts.V, ts.x1, ts.lines, ls.epsilon, pc, ts.times)
            out[f"moment_gap:{name}:u{2 * c + 1}"] = abs(fine - eff)
    return out


def run_single(cfg, eps, battery=None):
    battery = moment_battery(cfg.width, cfg.length) if (battery is None and cfg.moments) else (battery or [])
    if cfg.kind in ("stiff_static", "homogeneous"):
        return _static_run(cfg, eps, battery)
    if cfg.kind == "critical_dynamic":
        return _critical_run(cfg, eps, battery)
    raise ValidationError(f"unknown study kind {cfg.kind!r}")


def convergence_study(cfg, eps_list, runner=None):
    """Run the fine and effective solvers for each ε and assemble the report.

    ``runner`` maps a list of ε to a list of per-ε result dicts in the same
    order (defaults to a sequential loop); this keeps the report identical
    whether or not the runs are executed in parallel.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise InsufficientEpsilons("a convergence study needs at least 3 epsilon values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValidationError("epsilon list must be strictly decreasing")
    if runner is None:
        results = [run_single(cfg, e) for e in eps_list]
    else:
        results = runner(eps_list)
    rep = DiagnosticsReport()
    rep.notes.append("rate thresholds are engineering choices, not derived constants")
    main = "corrector_error" if cfg.kind == "critical_dynamic" else "l2_error"
    if cfg.kind == "critical_dynamic":
        rep.notes.append("corrector evaluated at the nearest layer line, linear in the cell coordinate")
    errs = [r[main] for r in results]
    homog = cfg.kind == "homogeneous"
    scale = max(max(r["fine_norm"] for r in results), 1e-300)
    flat = (max(errs) - min(errs)) <= 0.1 * max(errs) + 1e-12 * scale or max(errs) <= 1e-6 * scale
    if homog or flat:
        rep.notes.append("no ε-dependence" if flat else "ε-dependence in homogeneous run")
    for k, (eps, r) in enumerate(zip(eps_list, results)):
        if k == 0:
            rep.add(eps, main, r[main], baseline=r[main], ratio=1.0, passed=True)
        else:
            ratio = errs[k - 1] / max(errs[k], 1e-300)
            ok = flat if homog else ratio >= cfg.error_ratio_min
            rep.add(eps, main, r[main], baseline=errs[k - 1], ratio=ratio, passed=ok)
    rate = _rate(eps_list, errs)
    rep.add(eps_list[-1], f"rate:{main}", rate, passed=True)
    for key in sorted(k for k in results[0] if k.startswith("apriori_")):
        base = results[0][key]
        for eps, r in zip(eps_list, results):
            ratio = r[key] / base if base else math.nan
            ok = (1.0 / cfg.apriori_factor) <= ratio <= cfg.apriori_factor
            rep.add(eps, key, r[key], baseline=base, ratio=ratio, passed=ok)
    for key in sorted(k for k in results[0] if k.startswith("moment_gap:")):
        vals = [r[key] for r in results]
        for k, (eps, v) in enumerate(zip(eps_list, vals)):
            if k == 0:
                rep.add(eps, key, v, baseline=v, ratio=1.0, passed=True)
            else:
                noise = max(v, vals[k - 1]) <= 1e-10 * scale
                rep.add(eps, key, v, baseline=vals[k - 1], ratio=vals[k - 1] / max(v, 1e-300),
                        passed=v < vals[k - 1] or noise, roundoff=noise)
    for key in ("fine_energy_residual", "effective_energy_residual"):
        if key in results[0]:
            for eps, r in zip(eps_list, results):
                rep.add(eps, key, r[key], baseline=1e-8, ratio=r[key] / 1e-8, passed=r[key] <= 1e-8)
    return rep
