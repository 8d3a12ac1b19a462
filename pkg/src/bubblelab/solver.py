"""Preconditioned projected descent for E_alpha on sphere-valued grid fields.

The basic step moves along the tangent direction -P_u[(-Lap + 1)^-1 grad_l2(u)],
renormalises nodewise and backtracks until the Armijo condition holds.  The
default driver accelerates this with nonlinear conjugate gradients whose line
search works on the exact directional derivative, because close to a minimiser
energy differences sink below round-off long before the L2 residual is small.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import torus as T
from .bubble import BubbleParams, bubble_grid, normalize, project_dP
from .energy import _check_alpha, degree, degree_raw, e_alpha, grad_l2, grad_sq, l2_norm

log = logging.getLogger(__name__)


class BacktrackingExhausted(RuntimeError):
    pass


class DegreeJump(RuntimeError):
    pass


class Divergence(RuntimeError):
    pass


@dataclass
class StepConfig:
    tau0: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    tau_min: float = 1e-14
    grow: float = 2.0  # next trial step = grow * last accepted step


@dataclass
class SolverConfig:
    n: int
    alpha: float
    init: BubbleParams | str | np.ndarray | None = None
    step: StepConfig = field(default_factory=StepConfig)
    tol_residual: float = 1e-6
    max_iters: int = 20000
    precondition: bool = True
    degree_every: int = 50
    checkpoint_every: int = 0
    checkpoint_dir: str | None = None
    resolve_bubble: bool = True  # enforce n >= 20 sqrt(2 pi / (alpha - 1))
    dirichlet_ceiling: float = 8 * np.pi  # single-bubble regime for the start
    method: str = "cg"  # "cg" (preconditioned Polak-Ribiere) or "gd" (descend_step only)
    restart_every: int = 100

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if self.resolve_bubble:
            if self.alpha <= 1.0:
                raise ValueError("alpha must exceed 1 for a bubbling run")
            need = 20 * np.sqrt(2 * np.pi / (self.alpha - 1))
            if self.n < need:
                raise ValueError(f"n = {self.n} under-resolves the expected bubble; need n >= {need:.0f}")
        if self.method not in ("cg", "gd"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_iters < 0 or self.degree_every < 1:
            raise ValueError("max_iters must be >= 0 and degree_every >= 1")

    def expected_lambda(self) -> float:
        return float(np.sqrt(2 * np.pi / (self.alpha - 1)))


@dataclass
class SolveRecord:
    alpha: float
    n: int
    iterations: int
    e_alpha: float
    residual: float
    degree: int
    converged: bool
    lam: float = np.nan
    a: tuple = (np.nan, np.nan)
    R: list | None = None
    theorem1_defect: float = np.nan
    theorem1_ratio: float = np.nan
    dist_z: float = np.nan
    sup_gap: float = np.nan
    sup_grad_gap: float = np.nan
    weight_sup: float = np.nan
    max_grad: float = np.nan
    e_init: float = np.nan
    seconds: float = 0.0
    history: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["a"] = list(d["a"])
        return d


# ----------------------------------------------------------------------------
# single step


def precondition(V, u=None, mass: float = 1.0):
    """Apply (-Lap + mass)^-1 componentwise; re-project onto T_u S^2 when u is given."""
    W = T.helmholtz_solve(V, mass)
    return W if u is None else project_dP(u, W)


def _energy(u, alpha, du=None):
    du = T.grad(u) if du is None else du
    return e_alpha(u, alpha, du), du


def descend_step(u, alpha: float, cfg: SolverConfig, tau: float | None = None, state=None):
    """One backtracking step.  Returns (u_new, tau_used, energy_drop, info).

    ``state`` may carry (E, du, G) for ``u`` from the previous step to avoid
    recomputation; ``info`` returns the same triple for ``u_new``.
    """
    sc = cfg.step
    if state is None:
        E0, du = _energy(u, alpha)
        G = grad_l2(u, alpha, du)
    else:
        E0, du, G = state
    D = -precondition(G, u) if cfg.precondition else -G
    slope = float(np.mean(np.sum(G * D, axis=-1)))  # directional derivative, <= 0
    if slope >= 0 or not np.any(D):
        return u, 0.0, 0.0, (E0, du, G)
    noise = 64 * np.finfo(float).eps * abs(E0)
    tau = sc.tau0 if tau is None else tau
    while tau >= sc.tau_min:
        cand = normalize(u + tau * D)
        E1, du1 = _energy(cand, alpha)
        if not np.isfinite(E1):
            raise Divergence("non-finite energy during line search")
        predicted = sc.armijo * tau * slope
        if E1 <= E0 + predicted or (-predicted < noise and E1 <= E0 + noise):
            G1 = grad_l2(cand, alpha, du1)
            return cand, tau, E0 - E1, (E1, du1, G1)
        tau *= sc.shrink
    raise BacktrackingExhausted(f"no Armijo step above tau = {sc.tau_min:g} (slope {slope:.3g})")


def _noise(E):
    return 64 * np.finfo(float).eps * abs(E)


def _evaluate_on_ray(u, D, tau, alpha):
    v = u + tau * D
    nv = np.linalg.norm(v, axis=-1)
    cand = v / nv[..., None]
    E1, du1 = _energy(cand, alpha)
    if not np.isfinite(E1):
        raise Divergence("non-finite energy during line search")
    G1 = grad_l2(cand, alpha, du1)
    # d/dtau E(normalize(u + tau D)) = <G(u_tau), D / |u + tau D|>, G tangent at u_tau
    s1 = float(np.mean(np.sum(G1 * D, axis=-1) / nv))
    return cand, (E1, du1, G1), s1


def wolfe_search(u, D, alpha, state, tau0: float, c1: float = 1e-4, c2: float = 0.1,
                 max_evals: int = 30):
    """Strong-Wolfe line search along tau -> normalize(u + tau D).

    Sufficient decrease is tested with a round-off allowance; the curvature
    test uses the exact directional derivative, so the search still makes
    progress once energy differences are below machine precision.
    """
    E0 = state[0]
    s0 = float(np.mean(np.sum(state[2] * D, axis=-1)))
    if s0 >= 0:
        raise ValueError("not a descent direction")
    noise = _noise(E0)
    lo, s_lo = 0.0, s0
    hi, s_hi = None, None
    tau = tau0
    best = None
    for _ in range(max_evals):
        cand, st, s1 = _evaluate_on_ray(u, D, tau, alpha)
        decrease_ok = st[0] <= E0 + c1 * tau * s0 + noise
        if decrease_ok and (best is None or abs(s1) < abs(best[3])):
            best = (cand, st, tau, s1)
        if decrease_ok and abs(s1) <= c2 * abs(s0):
            return cand, st, tau
        if not decrease_ok:
            # overshoot: minimise the quadratic through E0, s0 and E(tau), kept in [0.1, 0.5] of the bracket
            hi, s_hi = tau, None
            width = hi - lo
            curv = st[0] - E0 - s0 * tau
            t = -s0 * tau * tau / (2 * curv) if curv > 0 else lo + 0.5 * width
            tau = min(max(t, lo + 0.1 * width), lo + 0.5 * width)
            if width < 1e-14 * max(1.0, hi):
                break
            continue
        if s1 > 0:
            hi, s_hi = tau, s1
        else:
            lo, s_lo = tau, s1
        if hi is None:
            tau *= 4.0
            continue
        width = hi - lo
        if s_hi is not None and s_hi > 0 > s_lo:
            t = lo - s_lo * width / (s_hi - s_lo)  # secant on the slope
            tau = min(max(t, lo + 0.1 * width), hi - 0.1 * width)
        else:
            tau = lo + 0.5 * width
        if width < 1e-14 * max(1.0, hi):
            break
    if best is not None:
        return best[0], best[1], best[2]
    raise BacktrackingExhausted(f"line search failed (slope {s0:.3g})")


def _precond_or_identity(G, u, cfg):
    return precondition(G, u) if cfg.precondition else G


# ----------------------------------------------------------------------------
# initial data


def initial_field(cfg: SolverConfig):
    if isinstance(cfg.init, BubbleParams):
        return bubble_grid(cfg.init, cfg.n)
    if isinstance(cfg.init, (str, Path)):
        p = Path(cfg.init)
        f = T.read_grid_csv(p) if p.suffix == ".csv" else T.read_grid_binary(p)
        u = f.values
        return normalize(T.resample(u, cfg.n)) if u.shape[0] != cfg.n else u
    if isinstance(cfg.init, np.ndarray):
        u = cfg.init
        return normalize(T.resample(u, cfg.n)) if u.shape[0] != cfg.n else normalize(u)
    raise ValueError("SolverConfig.init must be BubbleParams, a grid file path or an array")


def perturbed_constant(n: int, rng, amplitude: float = 0.3, kmax: int = 3, c=(0.0, 0.0, 1.0)):
    """Degree-zero start: a constant map plus band-limited tangent noise."""
    from .energy import random_tangent

    u = np.broadcast_to(np.asarray(c, float), (n, n, 3)).copy()
    return normalize(u + random_tangent(u, rng, kmax=kmax, amplitude=amplitude))


# ----------------------------------------------------------------------------
# checkpoints


def _ckpt_paths(d):
    d = Path(d)
    return d / "checkpoint.bin", d / "checkpoint.json"


def write_checkpoint(d, u, meta: dict):
    d = Path(d)
    d.mkdir(parents=True, exist_ok=True)
    fb, fj = _ckpt_paths(d)
    T.write_grid_binary(fb, u)
    fj.write_text(json.dumps(meta, indent=1))


def read_checkpoint(d):
    fb, fj = _ckpt_paths(d)
    if not fb.exists():
        return None
    return T.read_grid_binary(fb).values, json.loads(fj.read_text())


# ----------------------------------------------------------------------------
# driver


def solve(cfg: SolverConfig, resume: bool = False, project: bool = True, u0=None,
          callback=None) -> tuple[SolveRecord, np.ndarray]:
    """Descend from the configured start until the L2 residual drops below tolerance."""
    t0 = time.perf_counter()
    it0, tau = 0, None
    ck = read_checkpoint(cfg.checkpoint_dir) if (resume and cfg.checkpoint_dir) else None
    e_init = None
    if ck is not None:
        u, meta = ck
        it0, tau, e_init = meta["iteration"], meta["tau"], meta["e_init"]
    else:
        u = initial_field(cfg) if u0 is None else normalize(np.array(u0, dtype=float))
    alpha = cfg.alpha
    deg0 = degree(u)
    E, du = _energy(u, alpha)
    e_init = E if e_init is None else e_init
    dir0 = 0.5 * float(np.mean(grad_sq(du)))
    if abs(deg0) == 1 and dir0 >= cfg.dirichlet_ceiling:
        raise ValueError(f"initial Dirichlet energy {dir0:.4f} exceeds the ceiling {cfg.dirichlet_ceiling:.4f}")
    G = grad_l2(u, alpha, du)
    state = (E, du, G)
    energies, residuals, taus = [E], [l2_norm(G)], []
    it = it0
    converged = residuals[-1] <= cfg.tol_residual
    d_prev = P_prev = None
    gp_prev = s_prev = None
    while not converged and it < cfg.max_iters:
        if cfg.method == "gd":
            trial = None if tau is None else min(cfg.step.tau0 * 1e3, tau * cfg.step.grow)
            u, tau_used, drop, state = descend_step(u, alpha, cfg, trial, state)
            tau = tau_used or tau
        else:
            G = state[2]
            P = _precond_or_identity(G, u, cfg)
            gp = float(np.mean(np.sum(G * P, axis=-1)))
            D = -P
            if d_prev is not None and (it - it0) % cfg.restart_every:
                beta = max(0.0, (gp - float(np.mean(np.sum(G * project_dP(u, P_prev), axis=-1)))) / gp_prev)
                D = -P + beta * project_dP(u, d_prev)
                if float(np.mean(np.sum(G * D, axis=-1))) > -1e-3 * gp:
                    D = -P
            s0 = float(np.mean(np.sum(G * D, axis=-1)))
            if gp == 0.0:
                break
            trial = cfg.step.tau0 if s_prev is None else min(1e3, tau * s_prev / s0)
            u, state, tau_used = wolfe_search(u, D, alpha, state, trial)
            tau = tau_used
            d_prev, P_prev, gp_prev, s_prev = D, P, gp, s0
        it += 1
        E = state[0]
        if E > energies[-1] + _noise(E):
            raise Divergence(f"energy increased at iteration {it}")
        energies.append(E)
        residuals.append(l2_norm(state[2]))
        taus.append(tau)
        converged = residuals[-1] <= cfg.tol_residual
        if it % cfg.degree_every == 0:
            d = degree(u)
            if d != deg0:
                raise DegreeJump(f"degree changed from {deg0} to {d} at iteration {it} (under-resolved?)")
        if cfg.checkpoint_every and cfg.checkpoint_dir and it % cfg.checkpoint_every == 0:
            write_checkpoint(cfg.checkpoint_dir, u, {"iteration": it, "tau": tau, "e_init": e_init,
                                                     "alpha": alpha, "n": cfg.n})
        if callback is not None:
            callback(it, u, E, residuals[-1])
        if it % 500 == 0:
            log.info("iter %d  E=%.12f  res=%.3e  tau=%.3g", it, E, residuals[-1], tau)
    du = state[1]
    s = grad_sq(du)
    rec = SolveRecord(
        alpha=alpha, n=cfg.n, iterations=it, e_alpha=float(E), residual=residuals[-1],
        degree=degree(u), converged=bool(converged), e_init=float(e_init),
        weight_sup=float(((2 + s) ** (alpha - 1)).max()), max_grad=float(np.sqrt(s.max())),
        seconds=time.perf_counter() - t0,
        history={"energy": energies[:: max(1, len(energies) // 200)], "residual_final": residuals[-1],
                 "degree_raw": degree_raw(u)},
    )
    if project and abs(rec.degree) == 1:
        from .projection import closeness, project_to_Z, theorem1_defect

        pr = project_to_Z(u)
        rec.lam, rec.a, rec.R = pr.params.lam, tuple(pr.params.a), pr.params.R.tolist()
        rec.theorem1_defect, rec.theorem1_ratio = theorem1_defect(pr, alpha)
        rec.dist_z = pr.distance
        rec.sup_gap, rec.sup_grad_gap = closeness(u, pr.params)
    return rec, u


def fit_exponent(alphas, lams) -> float:
    x = np.log(np.asarray(alphas, float) - 1.0)
    y = np.log(np.asarray(lams, float))
    return float(np.polyfit(x, y, 1)[0])


def alpha_sweep(alphas, template: SolverConfig, warm_start: bool = False, init_factor: float = 0.6,
                callback=None):
    """Solve for each alpha; returns (records, fitted exponent of lambda(u) vs alpha - 1).

    Cold starts use a bubble at ``init_factor`` times the expected scale;
    warm starts continue from the previous solution (alphas taken in the given order).
    """
    records, u_prev = [], None
    for alpha in alphas:
        init = BubbleParams(max(5.0, init_factor * np.sqrt(2 * np.pi / (alpha - 1))))
        cfg = replace(template, alpha=alpha, init=init)
        rec, u = solve(cfg, u0=u_prev if warm_start else None, callback=callback)
        if not rec.converged:
            raise RuntimeError(f"solve at alpha = {alpha} did not converge (residual {rec.residual:.3g})")
        records.append(rec)
        u_prev = u
    return records, fit_exponent([r.alpha for r in records], [r.lam for r in records])
