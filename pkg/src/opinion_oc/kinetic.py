"""Monte Carlo simulation of the binary leader/follower interaction rules.

Every time step of length ``dt`` each agent independently picks an interaction
channel from the per-species mass function

    leader:   LL w.p. alpha*dt, LF w.p. b*dt, nothing otherwise
    follower: FF w.p. a*dt,     FL w.p. b*dt, nothing otherwise

draws a partner uniformly (with replacement) from the relevant species and
applies the rule to itself only, using the opinions from the start of the
step. Time is reported in the scaled variable ``s = gamma_L * t`` so results
line up with the Fokker-Planck solver.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .kernels import BoundedConfidence, CompromiseKernel, ModelParams, diffusion_D
from .mesh import Mesh

log = logging.getLogger(__name__)

MAX_REJECTIONS = 10_000
_SQRT3 = np.sqrt(3.0)


class KineticError(RuntimeError):
    """An interaction produced an opinion outside [-1, 1] or sampling failed."""


@dataclass
class KineticParams:
    gamma_L: float = 0.01
    gamma_F: float = 0.01
    sigma_L: float = 0.1
    sigma_F: float = 0.1
    P_L: CompromiseKernel = field(default_factory=BoundedConfidence)
    P_F: CompromiseKernel = field(default_factory=BoundedConfidence)
    P_tilde: CompromiseKernel = field(default_factory=BoundedConfidence)
    dt: float = 0.05
    # interaction frequencies: leader-leader, follower-follower, leader/follower cross
    alpha: float = 5.0
    a: float = 5.0
    b: float = 0.25
    D_alpha: float = 2.0

    def __post_init__(self):
        for name in ("gamma_L", "gamma_F"):
            g = getattr(self, name)
            if not 0 <= g < 0.5:
                raise ValueError(f"{name} must lie in [0, 1/2), got {g}")
        for name in ("sigma_L", "sigma_F"):
            s = getattr(self, name)
            if not 0 <= s < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {s}")
        for name in ("dt", "alpha", "a", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if (self.alpha + self.b) * self.dt > 1 or (self.a + self.b) * self.dt > 1:
            raise ValueError("interaction probabilities per step exceed 1; reduce dt")

    @classmethod
    def from_model(cls, params: ModelParams, gamma_L: float = 0.01, max_prob: float = 0.5,
                   M_L: float = 1.0, M_F: float = 1.0) -> "KineticParams":
        """Microscopic parameters whose quasi-invariant limit is the given Fokker-Planck model.

        Noise variances follow ``lambda = M sigma^2 / gamma``; ``gamma_F = alpha_LF gamma_L``.
        The cross frequency is ``1/(2 tau_FL)``: with per-agent updates this reproduces
        both the ``alpha_LF/(2 tau_FL)`` drift and the ``lambda_F/(4 tau_FL)`` diffusion
        of the follower equation.
        """
        gamma_F = params.alpha_LF * gamma_L
        alpha, a, b = 1.0 / params.tau_LL, 1.0 / params.tau_FF, 0.5 / params.tau_FL
        dt = max_prob / max(alpha + b, a + b)
        return cls(gamma_L=gamma_L, gamma_F=gamma_F,
                   sigma_L=float(np.sqrt(params.lambda_L * gamma_L / M_L)),
                   sigma_F=float(np.sqrt(params.lambda_F * gamma_L / M_F)),
                   P_L=params.P_L, P_F=params.P_F, P_tilde=params.P_tilde,
                   dt=dt, alpha=alpha, a=a, b=b, D_alpha=params.D_alpha)


@dataclass
class Ensemble:
    leaders: np.ndarray
    followers: np.ndarray
    rng_seed: int = 0

    def __post_init__(self):
        self.leaders = np.asarray(self.leaders, float)
        self.followers = np.asarray(self.followers, float)
        for name, x in (("leaders", self.leaders), ("followers", self.followers)):
            if x.size and np.abs(x).max() > 1:
                raise ValueError(f"{name} contain opinions outside [-1, 1]")


@dataclass
class MCResult:
    times: np.ndarray        # scaled times s of the histograms
    hist_L: np.ndarray       # (n_times, n_nodes) density-normalised nodal histograms
    hist_F: np.ndarray
    final: Ensemble
    rejections: int


def _check_in_I(x, what):
    x = np.asarray(x)
    if np.any(np.abs(x) > 1) or not np.all(np.isfinite(x)):
        raise KineticError(f"{what} left the opinion interval")


def interact_LL(w, v, gamma_L, P_L, eta_w, eta_v, u_w=0.0, u_v=0.0, D_alpha=2.0):
    """Leader-leader rule; ``u_w``, ``u_v`` are the control evaluated at ``w`` and ``v``."""
    w, v = np.asarray(w, float), np.asarray(v, float)
    ws = w + gamma_L * P_L(w, v) * (v - w) + eta_w * diffusion_D(w, D_alpha) + 0.5 * gamma_L * np.asarray(u_w)
    vs = v + gamma_L * P_L(v, w) * (w - v) + eta_v * diffusion_D(v, D_alpha) + 0.5 * gamma_L * np.asarray(u_v)
    _check_in_I(ws, "leader")
    _check_in_I(vs, "leader")
    return ws, vs


def interact_LF(w_L, w_F, gamma_F, P_tilde, eta, D_alpha=2.0):
    """Leader-follower rule: the leader keeps its opinion, the follower moves towards it."""
    w_L, w_F = np.asarray(w_L, float), np.asarray(w_F, float)
    ws = w_F + gamma_F * P_tilde(w_F, w_L) * (w_L - w_F) + eta * diffusion_D(w_F, D_alpha)
    _check_in_I(ws, "follower")
    return w_L.copy(), ws


def interact_FF(w, v, gamma_F, P_F, eta_w, eta_v, D_alpha=2.0):
    return interact_LL(w, v, gamma_F, P_F, eta_w, eta_v, 0.0, 0.0, D_alpha)


def sample_eta(sigma, w, rng, drift=None, D_alpha=2.0, counter=None):
    """Noise draws uniform on ``[-sqrt(3) sigma, sqrt(3) sigma]``, redrawn while the update leaves I.

    ``w`` are the current opinions and ``drift`` the deterministic post-interaction
    opinions (``w`` itself when omitted); the returned ``eta`` keeps
    ``drift + eta * D(w)`` inside [-1, 1]. ``counter``, if given, is a one-element
    list accumulating the number of redraws.
    """
    w = np.atleast_1d(np.asarray(w, float))
    base = w if drift is None else np.atleast_1d(np.asarray(drift, float))
    if sigma == 0:
        return np.zeros_like(w) if w.ndim else 0.0
    half = _SQRT3 * sigma
    Dw = diffusion_D(w, D_alpha)
    eta = rng.uniform(-half, half, size=w.shape)
    bad = np.abs(base + eta * Dw) > 1
    n_rej = 0
    while bad.any():
        n_rej += int(bad.sum())
        if n_rej > MAX_REJECTIONS * max(1, w.size):
            raise KineticError("noise rejection cap exceeded")
        eta[bad] = rng.uniform(-half, half, size=int(bad.sum()))
        bad = np.abs(base + eta * Dw) > 1
    if n_rej:
        log.debug("sample_eta: %d redraws", n_rej)
    if counter is not None:
        counter[0] += n_rej
    return eta


def sample_density(g, mesh: Mesh, n: int, rng, symmetric: bool = False) -> np.ndarray:
    """Draw ``n`` opinions from the nodal density ``g`` (piecewise linear between nodes).

    With ``symmetric`` the sample is made exactly even: half the draws and their mirror images.
    """
    g = np.clip(np.asarray(g, float), 0, None)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(mesh.w))])
    m = n // 2 if symmetric else n
    q = rng.uniform(0, cdf[-1], size=m)
    # invert the piecewise quadratic CDF cell by cell
    j = np.clip(np.searchsorted(cdf, q, side="right") - 1, 0, mesh.L - 1)
    h = mesh.w[j + 1] - mesh.w[j]
    g0, g1 = g[j], g[j + 1]
    r = q - cdf[j]
    slope = (g1 - g0) / h
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(np.abs(slope) > 1e-14,
                     (-g0 + np.sqrt(np.maximum(g0**2 + 2 * slope * r, 0))) / slope,
                     r / np.where(g0 > 0, g0, 1.0))
    out = np.clip(mesh.w[j] + np.clip(x, 0, h), -1, 1)
    if symmetric:
        out = np.concatenate([out, -out])
        if n % 2:
            out = np.concatenate([out, [0.0]])
    return out


def histogram(x, mesh: Mesh) -> np.ndarray:
    """Nodal density estimate: counts on the dual cells divided by ``N`` times the cell width."""
    x = np.asarray(x, float)
    edges = np.concatenate([[-1.0], 0.5 * (mesh.w[1:] + mesh.w[:-1]), [1.0]])
    counts, _ = np.histogram(x, bins=edges)
    return counts / (max(x.size, 1) * mesh.cell_widths)


def _control_at(u, w, s, mesh):
    if u is None:
        return 0.0
    if callable(u):
        return np.asarray(u(w, s), float)
    u = np.asarray(u, float)
    t = min(int(round(s / mesh.ds)), u.shape[0] - 1)
    return np.interp(w, mesh.w, u[t])


def mc_run(params: KineticParams, ensemble0: Ensemble, T: float, mesh: Mesh,
           output_times=None, u=None) -> MCResult:
    """Simulate up to scaled time ``T`` and return histograms at ``output_times``.

    ``u`` is the control of the leader rule, either a callable ``u(w, s)`` or a
    ``(Q + 1, L + 1)`` grid array on ``mesh``. Note the rule adds ``+gamma_L u / 2``
    to the opinion, so the Fokker-Planck control ``u`` of this package corresponds
    to ``-u`` here.
    """
    if ensemble0.leaders.size == 0 or ensemble0.followers.size == 0:
        raise ValueError("both species need at least one agent")
    rng = np.random.default_rng(ensemble0.rng_seed)
    p = params
    wL = ensemble0.leaders.copy()
    wF = ensemble0.followers.copy()
    nL, nF = wL.size, wF.size
    if output_times is None:
        output_times = T * np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    output_times = np.asarray(sorted(output_times), float)
    # a step of length dt advances scaled time by gamma_L * dt; gamma_L = 0 freezes time
    ds_step = p.gamma_L * p.dt if p.gamma_L > 0 else p.dt
    n_steps = int(np.ceil(T / ds_step - 1e-9))
    out_steps = np.minimum(np.round(output_times / ds_step).astype(int), n_steps)
    hist_L, hist_F, times = [], [], []
    rej = [0]
    k_out = 0

    def record(step):
        nonlocal k_out
        while k_out < len(out_steps) and out_steps[k_out] == step:
            hist_L.append(histogram(wL, mesh))
            hist_F.append(histogram(wF, mesh))
            times.append(step * ds_step)
            k_out += 1

    record(0)
    pLL, pFF, pX = p.alpha * p.dt, p.a * p.dt, p.b * p.dt
    for step in range(1, n_steps + 1):
        s = (step - 1) * ds_step
        rL = rng.random(nL)
        rF = rng.random(nF)
        new_L = wL.copy()
        new_F = wF.copy()

        # leader-leader; leader-follower encounters leave leaders unchanged
        i = np.flatnonzero(rL < pLL)
        if i.size:
            w = wL[i]
            v = wL[rng.integers(0, nL, i.size)]
            det = w + p.gamma_L * p.P_L(w, v) * (v - w) + 0.5 * p.gamma_L * _control_at(u, w, s, mesh)
            eta = sample_eta(p.sigma_L, w, rng, det, p.D_alpha, rej)
            new_L[i] = det + eta * diffusion_D(w, p.D_alpha)

        # follower-follower
        j = np.flatnonzero(rF < pFF)
        if j.size:
            w = wF[j]
            v = wF[rng.integers(0, nF, j.size)]
            det = w + p.gamma_F * p.P_F(w, v) * (v - w)
            eta = sample_eta(p.sigma_F, w, rng, det, p.D_alpha, rej)
            new_F[j] = det + eta * diffusion_D(w, p.D_alpha)

        # follower-leader
        j = np.flatnonzero((rF >= pFF) & (rF < pFF + pX))
        if j.size:
            w = wF[j]
            v = wL[rng.integers(0, nL, j.size)]
            det = w + p.gamma_F * p.P_tilde(w, v) * (v - w)
            eta = sample_eta(p.sigma_F, w, rng, det, p.D_alpha, rej)
            new_F[j] = det + eta * diffusion_D(w, p.D_alpha)

        _check_in_I(new_L, "leader")
        _check_in_I(new_F, "follower")
        wL, wF = new_L, new_F
        record(step)

    if rej[0]:
        log.info("mc_run: %d noise redraws over %d steps", rej[0], n_steps)
    return MCResult(times=np.array(times), hist_L=np.array(hist_L), hist_F=np.array(hist_F),
                    final=Ensemble(wL, wF, ensemble0.rng_seed), rejections=rej[0])
