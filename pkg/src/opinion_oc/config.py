"""Experiment configuration: a line-oriented ``key = value`` format with ``[section]`` headers.

Keys may appear under their section or before any header. ``#`` and ``;``
start comments. Every resolved value carries a provenance tag: ``default``,
``preset:<name>`` or ``user``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import costs
from .kernels import BoundedConfidence, Constant, ModelParams, Sznajd
from .mesh import Mesh, make_mesh
from .sweep import SweepOptions


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


def _floats(text: str):
    return tuple(float(x) for x in text.replace(",", " ").split()) if text.strip() else ()


KERNELS = ("bounded_confidence", "sznajd", "constant")
COSTS = ("none", "centring_both", "centring_follower", "final_time_both", "final_time_follower")

# name -> (section, parser, default)
FIELDS: dict[str, tuple[str, Any, Any]] = {
    "L": ("mesh", int, 80),
    "ds_factor": ("mesh", float, 5.0),
    "T": ("mesh", float, 10.0),
    "tau_LL": ("model", float, 0.2),
    "tau_FL": ("model", float, 2.0),
    "tau_FF": ("model", float, 0.2),
    "lambda_L": ("model", float, 0.05),
    "lambda_F": ("model", float, 0.05),
    "alpha_LF": ("model", float, 1.0),
    "D_alpha": ("model", float, 2.0),
    "r": ("model", float, 0.5),
    "sznajd_b": ("model", float, -1.0),
    "constant_c": ("model", float, 1.0),
    "P_L": ("model", str, "bounded_confidence"),
    "P_F": ("model", str, "bounded_confidence"),
    "P_tilde": ("model", str, "bounded_confidence"),
    "R": ("initial", float, 0.85),
    "c": ("initial", float, 0.0),
    "k": ("initial", float, 10.0),
    "cost": ("cost", str, "centring_both"),
    "beta": ("cost", float, 0.05),
    "w_dL": ("cost", float, -0.5),
    "w_dF": ("cost", float, -0.5),
    "nu": ("sweep", float, 0.02),
    "tol": ("sweep", float, 1e-4),
    "max_iter": ("sweep", int, 100),
    "clamp": ("sweep", _bool, False),
    "M": ("sweep", float, 10.0),
    "backstop": ("sweep", _opt_float, 1.1),
    "gamma_L": ("kinetic", float, 0.01),
    "n_agents": ("kinetic", int, 100_000),
    "out": ("output", str, "out"),
    "snapshots": ("output", _floats, ()),
    "seed": ("run", int, 0),
    "preset": ("run", str, ""),
}
SECTIONS = sorted({sec for sec, _, _ in FIELDS.values()})


@dataclass
class ExperimentConfig:
    values: dict[str, Any] = field(default_factory=lambda: {k: v[2] for k, v in FIELDS.items()})
    provenance: dict[str, str] = field(default_factory=lambda: {k: "default" for k in FIELDS})

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def set(self, name: str, value, source: str = "user"):
        if name not in FIELDS:
            raise ConfigError(f"unknown key {name!r}")
        self.values[name] = value
        self.provenance[name] = source

    def resolved(self) -> dict[str, dict[str, Any]]:
        """Every field with its value and provenance, for the manifest."""
        out = {}
        for name, (sec, _, _) in FIELDS.items():
            val = self.values[name]
            out[name] = {"section": sec, "value": list(val) if isinstance(val, tuple) else val,
                         "source": self.provenance[name]}
        return out

    # -- derived objects -------------------------------------------------

    def kernel(self, which: str):
        name = self.values[which]
        if name == "bounded_confidence":
            return BoundedConfidence(self.r)
        if name == "sznajd":
            return Sznajd(self.sznajd_b)
        return Constant(self.constant_c)

    def model_params(self) -> ModelParams:
        return ModelParams(tau_LL=self.tau_LL, tau_FL=self.tau_FL, tau_FF=self.tau_FF,
                           lambda_L=self.lambda_L, lambda_F=self.lambda_F, alpha_LF=self.alpha_LF,
                           P_L=self.kernel("P_L"), P_F=self.kernel("P_F"),
                           P_tilde=self.kernel("P_tilde"), D_alpha=self.D_alpha)

    def mesh(self) -> Mesh:
        return make_mesh(self.L, self.ds_factor * 2.0 / self.L, self.T)

    def cost_spec(self, mesh: Mesh):
        kind = self.cost
        if kind == "none":
            return None
        if kind == "centring_both":
            return costs.CentringBoth(self.w_dL, self.w_dF, self.beta)
        if kind == "centring_follower":
            return costs.CentringFollower(self.w_dF, self.beta)
        g_I = costs.build_target_density(mesh)
        if kind == "final_time_both":
            return costs.FinalTimeBoth(g_I, g_I.copy(), self.beta)
        return costs.FinalTimeFollower(g_I, self.beta)

    def sweep_options(self) -> SweepOptions:
        return SweepOptions(nu=self.nu, tol=self.tol, max_iter=self.max_iter,
                            clamp=self.M if self.clamp else None, backstop=self.backstop)

    def snapshot_times(self) -> tuple[float, ...]:
        if self.snapshots:
            return tuple(self.snapshots)
        return tuple(self.T * f for f in (0.0, 0.25, 0.5, 0.75, 1.0))

    def validate(self) -> "ExperimentConfig":
        """Check every invariant, naming the offending field."""
        v = self.values

        def need(cond, name, what):
            if not cond:
                raise ConfigError(f"{name} = {v[name]!r}: {what}")

        need(v["L"] >= 2 and v["L"] % 2 == 0, "L", "must be an even integer >= 2")
        need(v["ds_factor"] > 0, "ds_factor", "must be positive")
        need(v["T"] > 0, "T", "must be positive")
        need(v["T"] >= v["ds_factor"] * 2.0 / v["L"], "T", "must be at least one time step")
        for name in ("tau_LL", "tau_FL", "tau_FF", "lambda_L", "lambda_F", "alpha_LF", "D_alpha", "r"):
            need(v[name] > 0, name, "must be positive")
        for name in ("P_L", "P_F", "P_tilde"):
            need(v[name] in KERNELS, name, f"must be one of {', '.join(KERNELS)}")
        need(v["R"] > 0, "R", "must be positive")
        need(-1 < v["c"] < 1, "c", "must lie in (-1, 1)")
        need(v["k"] > 0, "k", "must be positive")
        need(v["cost"] in COSTS, "cost", f"must be one of {', '.join(COSTS)}")
        need(v["beta"] > 0, "beta", "must be positive")
        need(v["nu"] > 0, "nu", "must be positive")
        need(v["tol"] >= 0, "tol", "must be nonnegative")
        need(v["max_iter"] >= 0, "max_iter", "must be nonnegative")
        need(v["M"] > 0, "M", "must be positive")
        need(v["backstop"] is None or v["backstop"] > 1, "backstop", "must exceed 1 or be none")
        need(0 < v["gamma_L"] < 0.5, "gamma_L", "must lie in (0, 1/2)")
        need(v["gamma_L"] * v["alpha_LF"] < 0.5, "alpha_LF", "gamma_F = alpha_LF * gamma_L must be < 1/2")
        need(v["n_agents"] >= 1, "n_agents", "must be positive")
        need(all(0 <= t <= v["T"] for t in v["snapshots"]), "snapshots", "times must lie in [0, T]")
        need(v["seed"] >= 0, "seed", "must be nonnegative")
        return self


def parse_config(text: str, source: str = "user", base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {raw.strip()!r}")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        sec, parse, _ = FIELDS[key]
        if section is not None and section != sec:
            raise ConfigError(f"line {lineno}: key {key!r} belongs in [{sec}], not [{section}]")
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        cfg.set(key, parsed, source)
    return cfg


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read, parse and validate a config file on top of ``base`` (defaults when omitted)."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), base=base).validate()
