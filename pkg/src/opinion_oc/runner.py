"""Experiment presets, run drivers and CSV/manifest serialization."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adjoint import AdjointTrajectory
from .config import ExperimentConfig
from .forward import DensityPair, StateTrajectory, forward_solve, initial_density
from .kinetic import Ensemble, KineticParams, MCResult, mc_run, sample_density
from .mesh import Mesh
from .sweep import SweepReport, sweep

log = logging.getLogger(__name__)

PRESETS: dict[str, dict] = {
    "E0": {"cost": "none"},
    "E1": {"cost": "centring_both"},
    "E2": {"cost": "centring_follower"},
    "E3": {"cost": "centring_both", "P_tilde": "sznajd", "sznajd_b": -1.0},
    "E4": {"cost": "centring_follower", "P_tilde": "sznajd", "sznajd_b": -1.0},
    "E5": {"cost": "final_time_both"},
    "E6": {"cost": "final_time_follower"},
}
PRESET_DESCRIPTIONS = {
    "E0": "uncontrolled, bounded confidence",
    "E1": "centring both species at w_d = -0.5, bounded confidence",
    "E2": "centring followers only, bounded confidence",
    "E3": "centring both species, Sznajd leader-follower kernel (b = -1)",
    "E4": "centring followers only, Sznajd leader-follower kernel (b = -1)",
    "E5": "final-time tracking of g_I for both species",
    "E6": "final-time tracking of g_I for followers",
}


def _fmt(x) -> str:
    return "%.17g" % x


class OutputError(ValueError):
    """Outputs failed validation; nothing was written."""


@dataclass
class RunResult:
    config: ExperimentConfig
    mesh: Mesh
    trajectory: StateTrajectory
    report: SweepReport | None = None
    mc: MCResult | None = None
    files: dict[str, Path] = field(default_factory=dict)


def preset_config(name: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    cfg = base or ExperimentConfig()
    for key, val in PRESETS[name].items():
        if cfg.provenance[key] != "user":
            cfg.set(key, val, f"preset:{name}")
    if cfg.provenance["preset"] != "user":
        cfg.set("preset", name, f"preset:{name}")
    return cfg


def initial_state(cfg: ExperimentConfig, mesh: Mesh) -> DensityPair:
    g0 = initial_density(cfg.R, cfg.c, cfg.k, mesh)
    return DensityPair(g0, g0.copy())


def _finish(res: RunResult, out) -> RunResult:
    if out is not None:
        if str(out) != res.config.out:
            res.config.set("out", str(out))
        res.files = write_outputs(res, out)
    return res


def run_forward(cfg: ExperimentConfig, out=None) -> RunResult:
    cfg.validate()
    mesh = cfg.mesh()
    traj = forward_solve(cfg.model_params(), initial_state(cfg, mesh), None, mesh)
    res = RunResult(cfg, mesh, traj)
    return _finish(res, out)


def run_optimize(cfg: ExperimentConfig, out=None) -> RunResult:
    cfg.validate()
    mesh = cfg.mesh()
    cost = cfg.cost_spec(mesh)
    if cost is None:
        raise ValueError("cost = none: nothing to optimize")
    report = sweep(cfg.model_params(), initial_state(cfg, mesh), cost, mesh, cfg.sweep_options())
    res = RunResult(cfg, mesh, report.final_state, report=report)
    return _finish(res, out)


def run_mc(cfg: ExperimentConfig, out=None) -> RunResult:
    """Kinetic simulation of the uncontrolled model; also runs the matching forward solve."""
    cfg.validate()
    mesh = cfg.mesh()
    params = cfg.model_params()
    g0 = initial_state(cfg, mesh)
    rng = np.random.default_rng([cfg.seed, 0])
    ens = Ensemble(sample_density(g0.gL, mesh, cfg.n_agents, rng),
                   sample_density(g0.gF, mesh, cfg.n_agents, rng), rng_seed=cfg.seed)
    kp = KineticParams.from_model(params, cfg.gamma_L)
    mc = mc_run(kp, ens, cfg.T, mesh, output_times=cfg.snapshot_times())
    traj = forward_solve(params, g0, None, mesh)
    res = RunResult(cfg, mesh, traj, mc=mc)
    return _finish(res, out)


def run_preset(name: str, base: ExperimentConfig | None = None, out=None) -> RunResult:
    """Run preset ``name`` (E0 to E6); E0 is a plain forward solve, the rest run the sweep."""
    cfg = preset_config(name, base)
    if cfg.cost == "none":
        return run_forward(cfg, out)
    return run_optimize(cfg, out)


# -- serialization -----------------------------------------------------------

def _snapshot_indices(times, mesh: Mesh):
    idx = []
    for t in times:
        i = int(round(t / mesh.ds))
        if not 0 <= i <= mesh.Q:
            raise OutputError(f"snapshot time {t} outside [0, {mesh.T}]")
        if i not in idx:
            idx.append(i)
    return idx


def _state_csv(w, gL, gF) -> str:
    lines = ["w,g_L,g_F"]
    lines += [f"{_fmt(a)},{_fmt(b)},{_fmt(c)}" for a, b, c in zip(w, gL, gF)]
    return "\n".join(lines) + "\n"


def _grid_csv(header, mesh: Mesh, *fields) -> str:
    lines = [header]
    for t, s in enumerate(mesh.times):
        for i, w in enumerate(mesh.w):
            lines.append(",".join([_fmt(s), _fmt(w)] + [_fmt(f[t, i]) for f in fields]))
    return "\n".join(lines) + "\n"


def render_outputs(result: RunResult) -> dict[str, str]:
    """All output files as text, after validating the run. Raises ``OutputError``."""
    mesh, traj = result.mesh, result.trajectory
    if traj is None or len(traj) == 0:
        raise OutputError("empty trajectory")
    if len(traj) != mesh.Q + 1 or traj.gL.shape[1] != mesh.n_nodes:
        raise OutputError("trajectory does not match the mesh")
    if not (np.all(np.isfinite(traj.gL)) and np.all(np.isfinite(traj.gF))):
        raise OutputError("trajectory contains non-finite values")
    files: dict[str, str] = {}
    snaps = result.config.snapshot_times()
    for i in _snapshot_indices(snaps, mesh):
        files[f"state_{mesh.times[i]:g}.csv"] = _state_csv(mesh.w, traj.gL[i], traj.gF[i])
    rep = result.report
    if rep is not None:
        u = np.asarray(rep.final_control)
        if u.shape != traj.gL.shape or not np.all(np.isfinite(u)):
            raise OutputError("control is missing or non-finite")
        files["control.csv"] = _grid_csv("t,w,u", mesh, u)
        if not np.all(np.isfinite(rep.cost_history)):
            raise OutputError("non-finite cost history")
        files["cost_history.csv"] = "sweep,J\n" + "".join(
            f"{n},{_fmt(J)}\n" for n, J in enumerate(rep.cost_history))
        adj: AdjointTrajectory | None = rep.final_adjoint
        if adj is not None:
            files["adjoint.csv"] = _grid_csv("t,w,p_L,p_F", mesh, adj.pL, adj.pF)
    if result.mc is not None:
        for s, hL, hF in zip(result.mc.times, result.mc.hist_L, result.mc.hist_F):
            files[f"mc_{s:g}.csv"] = _state_csv(mesh.w, hL, hF)
    return files


def manifest(result: RunResult, files: dict[str, str]) -> str:
    rep = result.report
    body = {
        "package": "opinion_oc",
        "version": __version__,
        "config": result.config.resolved(),
        "mesh": {"L": result.mesh.L, "ds": result.mesh.ds, "Q": result.mesh.Q, "T": result.mesh.T},
        "files": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(files.items())},
    }
    if rep is not None:
        body["sweep"] = {"iterations": rep.iterations, "converged": rep.converged,
                         "J_initial": rep.cost_history[0], "J_final": rep.cost_history[-1]}
    if result.mc is not None:
        body["mc"] = {"noise_redraws": result.mc.rejections}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def write_outputs(result: RunResult, out_dir) -> dict[str, Path]:
    """Validate, render and write all files of ``result`` into ``out_dir``.

    Everything is rendered in memory first, so a failed validation leaves the
    directory untouched.
    """
    files = render_outputs(result)
    files["manifest.json"] = manifest(result, files)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        written[name] = path
    log.info("wrote %d files to %s", len(written), out)
    return written


def read_state_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2]
