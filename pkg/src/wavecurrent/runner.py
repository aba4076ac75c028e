"""Scenario runner: builds the medium, advances every selected model on a common
output cadence and writes the run directory.

Run directory layout::

    manifest.json           resolved configuration, defaults, derived parameters
    energy.csv              t, E_T, I_s, I_b, E_tilde          (exact model)
    comparison.csv          per-sample model differences over the window
    rays.csv                ray trajectory                     (rays)
    peaks.csv               Wigner peak track vs ray           (wigner)
    wigner/frame_XXXX.bin   saved Wigner tables                (wigner)
    fields/<model>/frame_XXXX.bin, times.csv
    summary.json            headline metrics
    checkpoint.bin          final exact state (or the last good one on abort)
"""

from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy

from . import asymptotics as asy
from . import physics
from .diagnostics import (EnergyReport, budget_check, energy_density, production_integral,
                          surface_divergence_source, total_energy)
from .dn import build_separable
from .grid import SpectralGrid
from .io import read_csv, read_grid_file, write_checkpoint, write_csv, write_grid_file, write_table_file
from .media import build_environment, make_family
from .scenarios import BUILTIN_HASHES, ConfigError, Scenario
from .solver import (NumericalAbort, SpongeProfile, WaveState, _envelope, cfl_dt, default_sponge_strength,
                     eigenmode_packet, integrate, packet_ic)
from .wigner import energy_variable, positive_branch, wigner_peak, wigner_transform

FIELD_MODELS = ("exact", "action", "schrodinger")


@dataclass
class RunResult:
    out_dir: Path
    manifest: dict
    times: list = field(default_factory=list)
    frames: dict = field(default_factory=dict)        # model -> list of energy-density arrays
    report: EnergyReport | None = None
    comparison: list = field(default_factory=list)
    trajectory: asy.Trajectory | None = None
    peaks: list = field(default_factory=list)          # (t, x*, k*, W*)
    summary: dict = field(default_factory=dict)


def _window_mask(grid: SpectralGrid, window) -> np.ndarray:
    """Boolean mask of a box window; axes without an interval are unrestricted."""
    mask = np.ones(grid.shape, dtype=bool)
    if window is None:
        return mask
    X = grid.mesh()
    if len(window) > grid.dims:
        raise ValueError("window has more intervals than axes")
    for a, (lo, hi) in enumerate(window):
        if not 0 <= lo < hi <= grid.lengths[a]:
            raise ValueError(f"window [{lo}, {hi}] lies outside the domain on axis {a}")
        mask &= (X[a] >= lo) & (X[a] <= hi)
    return mask


def compare_models(times, frames: dict, grid: SpectralGrid, window=None, total_window=None,
                   E0_total: float = 1.0, reference: str = "exact") -> list[dict]:
    """Per-sample differences of each model against ``reference`` over ``window``.

    Columns: t; for every model m, total_m (integral over ``total_window``
    divided by ``E0_total``), max_m (max over the window) and peak_m (x1 of
    the max over the window); for every non-reference model, diff_m =
    max |E_ref - E_m| over the window.
    """
    mask = _window_mask(grid, window)
    tmask = _window_mask(grid, total_window)
    x1 = grid.mesh()[0]
    rows = []
    for i, t in enumerate(times):
        row = {"t": float(t)}
        ref = frames[reference][i] if reference in frames else None
        for m, fr in frames.items():
            e = fr[i]
            row[f"total_{m}"] = grid.integrate(np.where(tmask, e, 0.0)) / E0_total
            sub = np.where(mask, e, -np.inf)
            j = int(np.argmax(sub))
            row[f"max_{m}"] = float(sub.flat[j])
            row[f"peak_{m}"] = float(x1.flat[j])
            if ref is not None and m != reference:
                row[f"diff_{m}"] = float(np.max(np.abs(ref - e)[mask]))
        rows.append(row)
    return rows


def transit_rows(rows: list[dict], grid: SpectralGrid, window, model: str = "action") -> list[dict]:
    """Samples whose ``model`` energy peak (over the whole grid) lies inside the window."""
    out = []
    for r in rows:
        if f"argmax_{model}" in r:
            pt = r[f"argmax_{model}"]
        else:
            pt = (r[f"peak_{model}"],)
        inside = all(lo <= p <= hi for p, (lo, hi) in zip(pt, window))
        if inside:
            out.append(r)
    return out


def _resolve_grid(sc: Scenario, quick: bool) -> SpectralGrid:
    counts = list(sc.grid["counts"])
    lengths = [float(v) for v in sc.grid["lengths"]]
    if quick:
        k0 = sc.initial["k0"]
        halved = [max(32, n // 2) for n in counts]
        # keep the carrier resolved (packet_ic refuses k0 above half the Nyquist wavenumber)
        if k0 <= 0.5 * np.pi * halved[0] / lengths[0]:
            counts = halved
    return SpectralGrid(tuple(lengths), tuple(counts))


def _family(spec):
    return None if spec is None else make_family(spec["family"], spec["params"])


def prepare(sc: Scenario, quick: bool = False):
    """Grid, environment (with sponge) and derived parameters of a scenario."""
    opts = sc.resolved_options()
    grid = _resolve_grid(sc, quick)
    depth = _family(sc.depth)
    current = _family(sc.current)
    bulk = _family(sc.bulk)
    k0 = float(sc.initial["k0"])
    sponge = None
    if sc.sponge is not None:
        probe = depth(np.stack(grid.mesh()))
        strength = sc.sponge.get("strength")
        if strength is None:
            strength = default_sponge_strength(k0, float(np.max(probe)), opts["g"])
        sponge = SpongeProfile(sc.sponge.get("width", 0.1), float(strength))
    env = build_environment(grid, depth, current, bulk=bulk, sponge=sponge, g=opts["g"])
    return grid, env, opts


def initial_state(sc: Scenario, grid: SpectralGrid, env, opts) -> WaveState:
    ini = sc.initial
    if ini.get("type", "packet") == "eigenmode":
        b0 = _point_fields(env, ini["center"])[0]
        return eigenmode_packet(grid, ini["center"], ini["width"], ini["k0"], ini["amplitude"], b0, opts["g"])
    return packet_ic(grid, ini["center"], ini["width"], ini["k0"], ini["amplitude"])


def _point_fields(env, X):
    b, U = env.sampler(np.asarray(X, dtype=float).reshape(env.grid.dims, 1))
    return float(np.asarray(b).reshape(-1)[0]), np.asarray(U)[:, 0]


def launch_frequency(sc: Scenario, env) -> float:
    """omega0 = U(x0).k0 + sigma(k0, b(x0)) for a carrier along x1."""
    b0, U0 = _point_fields(env, sc.initial["center"])
    return float(U0[0] * sc.initial["k0"] + physics.sigma_mag(sc.initial["k0"], b0, env.g))


def initial_envelope_energy(sc: Scenario, grid: SpectralGrid, opts) -> tuple[np.ndarray, float]:
    """(E0, a0): E0 = g a0^2 B^2 / 2 with a0 the right-moving amplitude (half the initial one by default)."""
    a0 = opts["E0_amplitude"]
    if a0 is None:
        a0 = 0.5 * sc.initial["amplitude"]
    B = _envelope(grid, sc.initial["center"], sc.initial["width"])
    return 0.5 * opts["g"] * (a0 * B) ** 2, float(a0)


def _output_plan(sc: Scenario, quick: bool) -> tuple[float, float]:
    T, every = sc.T, sc.output_every
    n = int(round(T / every))
    if abs(n * every - T) > 1e-9 * T:
        raise ConfigError(f"T={T:g} is not a whole number of output intervals ({every:g})")
    if quick:
        T = min(T, 4 * every)
    return T, every


def _substeps(every: float, limit: float) -> float:
    return every / int(np.ceil(every / limit - 1e-12))


def run_scenario(sc: Scenario, out_dir, models=None, quick: bool = False) -> RunResult:
    """Run a scenario and write its output directory.

    ``models`` overrides the scenario's model list. On a non-finite exact
    state the last good state is written to ``checkpoint.bin`` and
    :class:`NumericalAbort` is re-raised.
    """
    t_start = time.perf_counter()
    models = tuple(models) if models is not None else tuple(sc.models)
    bad = [m for m in models if m not in ("exact", "action", "schrodinger", "rays", "wigner")]
    if bad:
        raise ConfigError(f"unknown models: {', '.join(bad)}")
    if "wigner" in models and "exact" not in models:
        raise ConfigError("the wigner model analyses the exact solution; add 'exact'")
    if "wigner" in models and len(sc.grid["lengths"]) != 1:
        raise ConfigError("the wigner model is available for 1D scenarios only")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    grid, env, opts = prepare(sc, quick)
    ienv = env.without_sponge()
    g = opts["g"]
    T, every = _output_plan(sc, quick)
    omega0 = launch_frequency(sc, env)
    E0, a0 = initial_envelope_energy(sc, grid, opts)
    E0_total = grid.integrate(E0)
    k0 = float(sc.initial["k0"])
    x0 = [float(v) for v in sc.initial["center"]]
    timings = {}

    direction = None
    if grid.dims == 2 and opts["direction"] == "refracted" and ({"action", "schrodinger"} & set(models)):
        tic = time.perf_counter()
        direction = asy.refracted_direction_field(ienv, omega0, x0[0], band=env.sponge.width if env.sponge else 0.1)
        timings["direction_field"] = time.perf_counter() - tic

    manifest = {
        "scenario": sc.config(),
        "hash": sc.hash,
        "builtin_hash_match": BUILTIN_HASHES.get(sc.name) == sc.hash if sc.name in BUILTIN_HASHES else None,
        "options": opts,
        "models": list(models),
        "quick": quick,
        "grid": {"lengths": list(grid.lengths), "counts": list(grid.counts)},
        "T": T,
        "output_every": every,
        "sponge": None if env.sponge is None else {"width": env.sponge.width, "strength": env.sponge.strength},
        "omega0": omega0,
        "E0_amplitude": a0,
        "E0_total": E0_total,
        "mu_scale": 1.0 / (k0 * asy.medium_length(ienv)),
        "seed": None,
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
    }

    res = RunResult(out, manifest)
    frames = {m: [] for m in FIELD_MODELS if m in models}

    # exact model
    dn = dnh = None
    state = None
    if "exact" in models:
        tic = time.perf_counter()
        dn = build_separable(grid, env.b)
        if "wigner" in models:
            dnh = build_separable(grid, env.b, p=0.5)
        timings["operator"] = time.perf_counter() - tic
        manifest["rank"] = dn.rank
        manifest["dt"] = cfl_dt(env, opts["dt_safety"])
        state = initial_state(sc, grid, env, opts)

    # asymptotic models
    action = sfield = sstate = None
    filt = asy.spectral_filter(grid)
    if "action" in models:
        action = asy.prepare_action(ienv, E0, omega0, direction)
        manifest["dt_action"] = _substeps(every, asy.action_cfl(action))
    if "schrodinger" in models:
        sfield = asy.prepare_schrodinger(ienv, omega0, direction, opts["schrodinger_mu"],
                                         opts["schrodinger_sources"])
        A0 = g * a0 * _envelope(grid, x0, sc.initial["width"]) / sfield.sigma
        sstate = asy.SchrodingerState(A0.astype(complex))
        manifest["dt_schrodinger"] = _substeps(every, asy.schrodinger_cfl(sfield))

    if "rays" in models:
        ray_dt = opts["ray_dt"] or every / 10
        per = max(1, int(round(every / ray_dt)))
        ray_dt = every / per
        manifest["ray_dt"] = ray_dt
        tic = time.perf_counter()
        kvec = np.zeros(grid.dims)
        kvec[0] = k0
        res.trajectory = asy.ray_trace(asy.RayState(x0, kvec, 1.0), env, T, dt=ray_dt, every=per)
        timings["rays"] = time.perf_counter() - tic
        write_csv(out / "rays.csv", res.trajectory.rows(), ["t", "x", "y", "kx", "ky", "sigma", "action", "E"])

    report = EnergyReport() if "exact" in models and opts["budget"] else None
    wig_save = [float(t) for t in opts["wigner_save"]]
    Y_max = opts["wigner_Ymax"]
    if Y_max is None:
        Y_max = min(8 * float(np.max(sc.initial["width"])), grid.lengths[0] / 2)
    manifest["wigner_Ymax"] = Y_max if "wigner" in models else None
    k_range = (0.0, np.inf) if opts["wigner_branch"] == "positive" else None
    argmax = []

    def advance_asymptotics(t):
        nonlocal action, sstate
        if action is not None:
            while action.t < t - 1e-9 * every:
                action = asy.action_transport_step(action, manifest["dt_action"], filt)
            action = replace(action, t=t)
        if sstate is not None:
            while sstate.t < t - 1e-9 * every:
                sstate = asy.schrodinger_step(sstate, sfield, manifest["dt_schrodinger"])
            sstate = asy.SchrodingerState(sstate.A, t)

    def record(t, s):
        advance_asymptotics(t)
        res.times.append(float(t))
        idx = len(res.times) - 1
        peak_at = {}
        if s is not None:
            e = energy_density(s, dn, g)
            frames["exact"].append(e)
            if opts["save_fields"]:
                write_grid_file(out / "fields" / "exact" / f"frame_{idx:04d}.bin", grid, e, s.eta, s.phi)
            if report is not None:
                i_b = production_integral(s, env, opts["production_levels"]) if env.bulk is not None else 0.0
                report.record(t, total_energy(s, dn, g), surface_divergence_source(s, env, opts["source_half"]), i_b)
            if dnh is not None:
                psi = energy_variable(s, dnh, g)
                if opts["wigner_branch"] == "positive":
                    psi = positive_branch(psi)
                w = wigner_transform(grid, psi, Y_max=Y_max, t=t, tail_tol=None)
                xs, ks, ws = wigner_peak(w, k_range)
                res.peaks.append((float(t), xs, ks, ws))
                if any(abs(t - ts) < 1e-9 * every for ts in wig_save):
                    write_table_file(out / "wigner" / f"frame_{idx:04d}.bin", w.x, w.k, w.W,
                                     {"t": float(t), "Y_max": Y_max, "imag_residue": w.imag_residue})
        if action is not None:
            frames["action"].append(action.E.copy())
            peak_at["action"] = np.unravel_index(int(np.argmax(action.E)), grid.shape)
            if opts["save_fields"]:
                write_grid_file(out / "fields" / "action" / f"frame_{idx:04d}.bin", grid, action.E)
        if sstate is not None:
            es = asy.schrodinger_energy(sfield, sstate.A, g)
            frames["schrodinger"].append(es)
            if opts["save_fields"]:
                write_grid_file(out / "fields" / "schrodinger" / f"frame_{idx:04d}.bin", grid, es,
                                sstate.A.real, sstate.A.imag)
        coords = [grid.coords(a) for a in range(grid.dims)]
        argmax.append({m: tuple(float(coords[a][i]) for a, i in enumerate(ix)) for m, ix in peak_at.items()})

    tic = time.perf_counter()
    if state is not None:
        last = {"state": state}

        def cb(s):
            last["state"] = s
            record(s.t, s)

        try:
            state = integrate(state, env, dn, T, manifest["dt"], every=every, callback=cb)
        except NumericalAbort as err:
            good = err.last_good or last["state"]
            write_checkpoint(out / "checkpoint.bin", grid, good, manifest["dt"], sc.hash)
            manifest["status"] = "aborted"
            manifest["abort"] = str(err)
            _write_manifest(out, manifest)
            raise
        write_checkpoint(out / "checkpoint.bin", grid, state, manifest["dt"], sc.hash)
    else:
        n = int(round(T / every))
        for i in range(n + 1):
            record(i * every, None)
    timings["integration"] = time.perf_counter() - tic

    for m in frames:
        if opts["save_fields"]:
            write_csv(out / "fields" / m / "times.csv", [{"t": t} for t in res.times], ["t"])
    res.frames = frames

    if report is not None:
        res.report = report
        write_csv(out / "energy.csv", report.rows(), ["t", "E_T", "I_s", "I_b", "E_tilde"])

    if frames:
        ref = "exact" if "exact" in frames else next(iter(frames))
        rows = compare_models(res.times, frames, grid, sc.window, sc.energy_window, E0_total, ref)
        for r, am in zip(rows, argmax):
            for m, pt in am.items():
                r[f"argmax_{m}"] = pt
        res.comparison = rows
        cols = [c for c in rows[0] if not c.startswith("argmax_")]
        write_csv(out / "comparison.csv", rows, cols)

    if res.peaks:
        write_csv(out / "peaks.csv", _peak_rows(res), None)

    res.summary = summarize(res, sc, grid)
    (out / "summary.json").write_text(json.dumps(res.summary, indent=2, sort_keys=True))
    timings["total"] = time.perf_counter() - t_start
    manifest["timings"] = timings
    manifest["status"] = "ok"
    _write_manifest(out, manifest)
    return res


def _peak_rows(res: RunResult) -> list[dict]:
    traj = res.trajectory
    tr = np.asarray(traj.t) if traj is not None else np.zeros(0)
    rows = []
    for t, xs, ks, ws in res.peaks:
        xr = kr = np.nan
        if len(tr):
            i = int(np.argmin(np.abs(tr - t)))
            if abs(tr[i] - t) <= 1e-9 * max(1.0, abs(t)):
                xr, kr = traj.X[i][0], traj.k[i][0]
        rows.append({"t": t, "x_peak": xs, "k_peak": ks, "W_peak": ws, "x_ray": xr, "k_ray": kr})
    return rows


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True))


def summarize(res: RunResult, sc: Scenario, grid: SpectralGrid) -> dict:
    """Headline numbers of a run (the quantities the experiments are judged by)."""
    s: dict = {"name": sc.name, "samples": len(res.times)}
    if res.report is not None and res.report.t:
        s["budget_deviation"] = budget_check(res.report)
        s["mean_abs_I_s"] = float(np.mean(np.abs(res.report.I_s)))
        s["mean_abs_I_b"] = float(np.mean(np.abs(res.report.I_b)))
    rows = res.comparison
    if rows and sc.window is not None and "action" in res.frames:
        tr = transit_rows(rows, grid, sc.window, "action")
        s["transit_samples"] = len(tr)
        if tr and "exact" in res.frames:
            s["transit_total_rel"] = max(abs(r["total_action"] - r["total_exact"]) / abs(r["total_exact"])
                                         for r in tr)
            s["transit_max_rel"] = max(abs(r["max_action"] - r["max_exact"]) / abs(r["max_exact"]) for r in tr)
            if "schrodinger" in res.frames:
                late = tr[len(tr) - max(1, int(round(len(tr) * sc.resolved_options()["late_fraction"]))):]
                s["late_ratio"] = max(r["diff_schrodinger"] / r["diff_action"] for r in late)
                s["late_times"] = [r["t"] for r in late]
    traj = res.trajectory
    if traj is not None:
        X = np.array([x[0] for x in traj.X])
        om = np.asarray(traj.omega)
        i = int(np.argmax(X))
        s["ray_status"] = traj.status
        s["ray_turning_x"] = float(X[i])
        s["ray_turning_t"] = float(traj.t[i])
        s["ray_omega_drift"] = float(np.max(np.abs(om - om[0])) / abs(om[0]))
    if res.peaks and traj is not None:
        rows_p = _peak_rows(res)
        dk = 2 * np.pi / grid.lengths[0]
        ok = [abs(r["x_peak"] - r["x_ray"]) <= grid.spacing[0] and abs(r["k_peak"] - r["k_ray"]) <= dk
              for r in rows_p if np.isfinite(r["x_ray"])]
        s["wigner_frames"] = len(ok)
        s["wigner_tracking_fraction"] = float(np.mean(ok)) if ok else 0.0
    return _jsonable(s)


# --------------------------------------------------------------- run-vs-run

def _load_frames(run_dir: Path):
    out = {}
    grid = None
    for mdir in sorted((run_dir / "fields").glob("*")):
        if not (mdir / "times.csv").exists():
            continue
        times = read_csv(mdir / "times.csv")["t"]
        vals = []
        for i in range(len(times)):
            grid, data = read_grid_file(mdir / f"frame_{i:04d}.bin")
            vals.append(data[0])
        out[mdir.name] = (times, vals)
    return grid, out


def compare_runs(run_a, run_b, window=None) -> list[dict]:
    """Per-sample max |A - B| over ``window`` and window totals, for every model saved by both runs."""
    run_a, run_b = Path(run_a), Path(run_b)
    grid_a, fa = _load_frames(run_a)
    grid_b, fb = _load_frames(run_b)
    if grid_a is None or grid_b is None:
        raise ValueError("both runs need saved field frames (option save_fields)")
    if grid_a != grid_b:
        raise ValueError("runs live on different grids")
    mask = _window_mask(grid_a, window)
    common = sorted(set(fa) & set(fb))
    if not common:
        raise ValueError("the runs share no models")
    rows = []
    for m in common:
        ta, va = fa[m]
        tb, vb = fb[m]
        if len(ta) != len(tb) or np.any(np.abs(ta - tb) > 1e-9 * max(1.0, float(np.max(np.abs(ta))))):
            raise ValueError(f"time axes of model {m!r} differ between the runs")
        for t, ea, eb in zip(ta, va, vb):
            rows.append({"model": m, "t": float(t),
                         "max_abs_diff": float(np.max(np.abs(ea - eb)[mask])),
                         "total_a": grid_a.integrate(np.where(mask, ea, 0.0)),
                         "total_b": grid_a.integrate(np.where(mask, eb, 0.0))})
    return rows
