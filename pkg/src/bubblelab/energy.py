"""The Sacks-Uhlenbeck alpha-energy of sphere-valued grid fields and its variations.

    E_alpha(u) = 1/2 int (2 + |grad u|^2)^alpha

All derivatives are spectral; the discrete first variation and L2 gradient
are exact adjoints of each other on the grid.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import torus as T
from .bubble import BubbleParams, bubble_grid, project_dP, rho_grid, tangent_basis_Z, z_inner

UNIT_TOL = 1e-10
TANGENT_TOL = 1e-8


class NotTangentError(ValueError):
    pass


def _check_unit(u):
    dev = np.abs(np.linalg.norm(u, axis=-1) - 1.0).max()
    if dev > UNIT_TOL:
        raise ValueError(f"field is not unit-norm (max deviation {dev:.3g})")


def _check_tangent(u, V):
    scale = np.abs(V).max()
    if scale == 0:
        return
    dev = np.abs(np.sum(u * V, axis=-1)).max()
    if dev > TANGENT_TOL * scale:
        raise NotTangentError(f"variation is not tangent to u (max |V.u| = {dev:.3g})")


def _check_alpha(alpha):
    if not 1.0 <= alpha <= 2.0:
        raise ValueError(f"alpha must lie in [1, 2], got {alpha}")


def grad_sq(du):
    return np.sum(du**2, axis=(0, -1))


def e_alpha(u, alpha: float, du=None) -> float:
    _check_alpha(alpha)
    _check_unit(u)
    du = T.grad(u) if du is None else du
    # subtract the constant-map density first so near-constant fields keep precision
    s = grad_sq(du)
    dens = 2.0**alpha * np.expm1(alpha * np.log1p(0.5 * s))
    return 0.5 * (float(np.mean(dens)) + 2.0**alpha)


def dirichlet(u) -> float:
    return 0.5 * float(np.mean(grad_sq(T.grad(u))))


def _weight(du, alpha):
    return (2.0 + grad_sq(du)) ** (alpha - 1.0)


def d_e_alpha(u, V, alpha: float, du=None) -> float:
    """alpha int (2 + |grad u|^2)^(alpha-1) grad u . grad V."""
    _check_alpha(alpha)
    _check_tangent(u, V)
    du = T.grad(u) if du is None else du
    dV = T.grad(V)
    return alpha * float(np.mean(_weight(du, alpha) * np.sum(du * dV, axis=(0, -1))))


def d2_e_alpha(u, V, W, alpha: float, du=None) -> float:
    """Second variation along P(u + sV + tW) for the round sphere."""
    _check_alpha(alpha)
    _check_tangent(u, V)
    _check_tangent(u, W)
    du = T.grad(u) if du is None else du
    dV, dW = T.grad(V), T.grad(W)
    s = grad_sq(du)
    w = (2.0 + s) ** (alpha - 1.0)
    first = np.sum(dV * dW, axis=(0, -1)) - s * np.sum(V * W, axis=-1)
    uv = np.sum(du * dV, axis=-1)  # (2, n, n): d_i u . d_i V
    uw = np.sum(du * dW, axis=-1)
    second = np.sum(uv, axis=0) * np.sum(uw, axis=0)
    return alpha * float(np.mean(w * first)) + 2 * alpha * (alpha - 1) * float(np.mean(w / (2.0 + s) * second))


def grad_l2(u, alpha: float, du=None):
    """The tangent field G with d_e_alpha(u, V) = int G . V for every tangent V."""
    _check_alpha(alpha)
    du = T.grad(u) if du is None else du
    w = _weight(du, alpha)
    flux = w[None, ..., None] * du
    return project_dP(u, -alpha * T.div(flux))


def tension_alpha(u, alpha: float):
    """Lap u + u |grad u|^2 + (alpha - 1) grad log(2 + |grad u|^2) . grad u, made tangent."""
    _check_alpha(alpha)
    _check_unit(u)
    du = T.grad(u)
    s = grad_sq(du)
    dl = T.grad(np.log(2.0 + s))
    t = T.laplacian(u) + u * s[..., None] + (alpha - 1) * np.einsum("inm,inmc->nmc", dl, du)
    return project_dP(u, t)


def l2_norm(V) -> float:
    return float(np.sqrt(np.mean(np.sum(V**2, axis=-1))))


def degree_raw(u) -> float:
    du = T.grad(u)
    return float(np.mean(np.sum(u * np.cross(du[0], du[1]), axis=-1))) / (4 * np.pi)


def degree(u, tol: float = 0.1) -> int:
    """Rounded topological degree; raises when the raw integral is not near an integer."""
    raw = degree_raw(u)
    k = int(np.rint(raw))
    if abs(raw - k) > tol:
        raise ValueError(f"degree integral {raw:.4f} is not within {tol} of an integer (under-resolved field?)")
    return k


@dataclass
class EnergyReport:
    alpha: float
    e_alpha: float
    dirichlet: float
    grad_norm_l2: float
    degree: int
    max_grad: float

    def to_dict(self):
        return asdict(self)


def energy_report(u, alpha: float) -> EnergyReport:
    du = T.grad(u)
    return EnergyReport(
        alpha=alpha,
        e_alpha=e_alpha(u, alpha, du),
        dirichlet=0.5 * float(np.mean(grad_sq(du))),
        grad_norm_l2=l2_norm(grad_l2(u, alpha, du)),
        degree=degree(u),
        max_grad=float(np.sqrt(grad_sq(du).max())),
    )


# ----------------------------------------------------------------------------
# random tangent probes and the normal Hessian gap


def random_tangent(u, rng, kmax: int = 6, amplitude: float = 1.0):
    """Band-limited random ambient field (modes |k|_inf <= kmax) projected onto T_u S^2."""
    n = u.shape[0]
    X = T.lowpass(rng.standard_normal((n, n, 3)), kmax)
    X *= amplitude / max(np.abs(X).max(), 1e-300)
    return project_dP(u, X)


def localized_tangent(u, center, scale, rng, degree_max: int = 3):
    """Random polynomial times a Gaussian of width ``scale`` at ``center``, made tangent."""
    n = u.shape[0]
    x = T.chart(center, T.grid_points(n)) / scale
    env = np.exp(-0.5 * np.sum(x**2, axis=-1))
    X = np.zeros((n, n, 3))
    for p in range(degree_max + 1):
        for q in range(degree_max + 1 - p):
            X += (x[..., 0] ** p * x[..., 1] ** q)[..., None] * rng.standard_normal(3)
    return project_dP(u, X * env[..., None])


def orthogonalize(V, basis, rho, gram_inv=None):
    """Remove the <.,.>_z projection of V onto span(basis); result stays tangent."""
    b = np.array([z_inner(V, B, rho) for B in basis])
    if gram_inv is None:
        from .bubble import gram

        gram_inv = np.linalg.inv(gram(basis, rho))
    c = gram_inv @ b
    return V - np.tensordot(c, basis, axes=(0, 0))


def hessian_gap(params: BubbleParams, alpha: float, samples: int = 100, n: int = 512, rng=None,
                return_all: bool = False):
    """Sampled minimum of d2E(z)[V,V] / ||V||_z^2 over probes <.,.>_z-orthogonal to T_z Z.

    Probes mix band-limited global fields with fields localised at the bubble
    scale, so both the body and the bubble neck are explored.
    """
    if params.lam < 20 or alpha - 1 > 0.02 or samples < 50:
        raise ValueError("hessian_gap needs lambda >= 20, alpha - 1 <= 0.02 and at least 50 samples")
    rng = np.random.default_rng(0) if rng is None else rng
    z = bubble_grid(params, n)
    rho = rho_grid(params, n)
    basis = tangent_basis_Z(params, n)
    from .bubble import gram

    Ginv = np.linalg.inv(gram(basis, rho))
    du = T.grad(z)
    quotients = []
    for k in range(samples):
        if k % 2 == 0:
            V = random_tangent(z, rng, kmax=int(rng.integers(1, 9)))
        else:
            scale = float(rng.uniform(0.5, 4.0)) / params.lam
            V = localized_tangent(z, params.a, scale, rng)
        V = orthogonalize(V, basis, rho, Ginv)
        q = d2_e_alpha(z, V, V, alpha, du=du) / z_inner(V, V, rho)
        quotients.append(q)
    quotients = np.array(quotients)
    gap = float(quotients.min())
    if gap <= 0:
        raise ArithmeticError(f"nonpositive normal Hessian quotient {gap:.4g}")
    return (gap, quotients) if return_all else gap
