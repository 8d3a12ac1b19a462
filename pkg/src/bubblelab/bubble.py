"""Adapted bubbles z = R P(z~_{lambda,a}) on the flat torus.

In the translation chart x = p - a the glued map is

    z~(x) = phi(|x|) (pi_lam(x) + j(x)) + (1 - phi(|x|)) tail(x),
    j(x)    = (-(2/lam)(grad H(x) - grad H(0)), 0),
    tail(x) = (-(2/lam)(grad G(x) - grad H(0)), -1),

with pi_lam(x) = pi(lam x) the inverse stereographic projection, G the torus
Green's function and H = G + log|x| its regular part.  Where phi vanishes the
inner formula coincides with the Green's tail, so one expression serves the
whole fundamental domain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import torus as T
from .greens import GreenJet, GreensTorus
from .jets import Jet, dot, stack, where

LAMBDA_MIN = 4.0
R_CUT = T.TORUS.r_cut
IOTA = T.TORUS.iota

_GREENS = GreensTorus()


@dataclass
class BubbleParams:
    lam: float
    a: tuple[float, float] = (0.0, 0.0)
    R: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        self.lam = float(self.lam)
        if not self.lam > 1.0:
            raise ValueError(f"bubble scale must exceed 1, got {self.lam}")
        self.a = T.wrap(self.a).coords
        self.R = np.asarray(self.R, dtype=float)
        if self.R.shape != (3, 3) or np.abs(self.R.T @ self.R - np.eye(3)).max() > 1e-12:
            raise ValueError("R must be a 3x3 orthogonal matrix")

    @property
    def orientation(self) -> int:
        return int(np.sign(np.linalg.det(self.R)))

    def replace(self, **kw) -> "BubbleParams":
        d = dict(lam=self.lam, a=self.a, R=self.R)
        d.update(kw)
        return BubbleParams(**d)


# ----------------------------------------------------------------------------
# building blocks


def inv_stereo(x) -> np.ndarray:
    """Inverse stereographic projection from the south pole."""
    x = np.asarray(x, dtype=float)
    n2 = np.sum(x**2, axis=-1)
    den = 1.0 + n2
    return np.concatenate([2 * x / den[..., None], ((1 - n2) / den)[..., None]], axis=-1)


def inv_stereo_scaled(lam, x) -> np.ndarray:
    return inv_stereo(lam * np.asarray(x, dtype=float))


def _smoothstep(t):
    """exp(-1/t) based C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    inner = (t > 0) & (t < 1)
    ts = np.where(inner, t, 0.5)
    f = np.exp(-1.0 / ts)
    g = np.exp(-1.0 / (1.0 - ts))
    return np.where(t >= 1, 1.0, np.where(inner, f / (f + g), 0.0))


def cutoff(s, r: float = R_CUT):
    """Radial cutoff: 1 on [0, r], 0 on [2r, inf), smooth and nonincreasing."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("cutoff expects nonnegative radii")
    return _smoothstep((2 * r - s) / r)


def _cutoff_jet(q: Jet, r: float = R_CUT) -> Jet:
    """phi(sqrt(q)) as a Jet; derivatives vanish identically off the open annulus."""
    qv = q.v
    ann = (qv > r * r) & (qv < 4 * r * r)
    qs = where(ann, q, Jet(2.25 * r * r))
    s = qs.sqrt()
    t = (2 * r - s) / r
    f = (-(t.reciprocal())).exp()
    g = (-((1.0 - t).reciprocal())).exp()
    phi = f / (f + g)
    const = np.where(qv <= r * r, 1.0, 0.0)
    return where(ann, phi, Jet(const))


def j_field(x, lam: float, greens: GreensTorus = _GREENS) -> np.ndarray:
    """Harmonic Green's correction j(x) = ((2/lam)(grad_y J(x,0) - grad_y J(0,0)), 0)."""
    x = np.asarray(x, dtype=float)
    gy = greens.grad_y_J(x)
    gy0 = greens.grad_y_J(np.zeros(2))
    j12 = (2.0 / lam) * (gy - gy0)
    return np.concatenate([j12, np.zeros(j12.shape[:-1] + (1,))], axis=-1)


# ----------------------------------------------------------------------------
# the bubble map


def _seed(d, x0):
    """Seed vectors for a derivative direction: None, 'lam' or a 2-vector in x."""
    if d is None or isinstance(d, str):
        return np.zeros(2), (1.0 if d == "lam" else 0.0)
    return np.asarray(d, dtype=float), 0.0


class BubbleMap:
    """Evaluators for z, its derivatives, and the weight rho_z at chart points."""

    def __init__(self, params: BubbleParams, greens: GreensTorus = _GREENS, check: bool = True):
        self.params = params
        self.greens = greens
        if check and params.lam < LAMBDA_MIN:
            raise ValueError(f"lambda = {params.lam} below lambda_min = {LAMBDA_MIN}")
        self._gH0 = greens.regular_grad_origin()

    # -- core jet --------------------------------------------------------

    def _grad_H(self, x0, s1, s2, H=None):
        order = 1 + (np.any(s1 != 0) or np.any(s2 != 0)) + (np.any(s1 != 0) and np.any(s2 != 0))
        if H is None:
            H = self.greens.regular_jet(x0, order)
        gv = H.grad
        ga = H.hess @ s1 if order >= 2 else 0.0
        gb = H.hess @ s2 if order >= 2 else 0.0
        gab = np.einsum("pijk,j,k->pi", H.third, s1, s2) if order >= 3 else 0.0
        return Jet(gv, ga, gb, gab)

    def tilde_jet(self, x0, d1=None, d2=None, lam=None, H=None) -> Jet:
        """z~ (unprojected, unrotated) with derivatives along seeds d1, d2."""
        lam0 = self.params.lam if lam is None else lam
        x0 = np.asarray(x0, dtype=float).reshape(-1, 2)
        s1, l1 = _seed(d1, x0)
        s2, l2 = _seed(d2, x0)
        x = Jet(x0, np.broadcast_to(s1, x0.shape), np.broadcast_to(s2, x0.shape))
        lam = Jet(np.full(x0.shape[0], lam0), l1, l2)
        q = dot(x, x)
        core = q.v <= R_CUT**2
        outer = q.v >= 4 * R_CUT**2

        # bubble part
        y = x * lam[:, None]
        n2 = dot(y, y)
        den = n2 + 1.0
        pi = stack([2 * y[:, 0] / den, 2 * y[:, 1] / den, (1.0 - n2) / den])
        gH = self._grad_H(x0, s1, s2, H) - self._gH0
        c = -2.0 / lam
        j = stack([c * gH[:, 0], c * gH[:, 1], Jet(np.zeros(x0.shape[0]))])
        inner = pi + j

        # Green's tail, with the chart origin masked away
        xs = where(core[:, None], Jet(np.full_like(x0, 0.5 * R_CUT)), x)
        qs = dot(xs, xs)
        logpart = xs / qs[:, None]
        gG = gH - logpart
        tail = stack([c * gG[:, 0], c * gG[:, 1], Jet(-np.ones(x0.shape[0]))])

        phi = _cutoff_jet(q)[:, None]
        blend = phi * inner + (1.0 - phi) * tail
        return where(core[:, None], inner, where(outer[:, None], tail, blend))

    def jet(self, x0, d1=None, d2=None, lam=None, H=None) -> Jet:
        zt = self.tilde_jet(x0, d1, d2, lam, H)
        nrm = dot(zt, zt).sqrt()
        if np.min(nrm.v) < 0.5:
            raise FloatingPointError(f"|z~| dropped to {np.min(nrm.v):.3g}; lambda too small for this cutoff")
        z = zt / nrm[:, None]
        return z.matmul_left(self.params.R)

    # -- convenience evaluators (chart coordinates) ------------------------

    def value(self, x) -> np.ndarray:
        return self.jet(x).v

    def tilde(self, x) -> np.ndarray:
        return self.tilde_jet(x).v

    def grad(self, x) -> np.ndarray:
        """(P, 2, 3): d z / d x_i."""
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        H = self.greens.regular_jet(x, 2)
        return np.stack([self.jet(x, e, None, H=H).a for e in np.eye(2)], axis=1)

    def d_lambda(self, x) -> np.ndarray:
        return self.jet(x, "lam").a

    def d_center(self, x, A) -> np.ndarray:
        """grad_A z = d/ds z_{lam, a + sA} = -A . grad_x z on the flat torus."""
        A = np.asarray(A, dtype=float)
        return -self.jet(x, A).a

    def rho(self, x) -> np.ndarray:
        return rho_from_dist(np.linalg.norm(np.asarray(x, dtype=float), axis=-1), self.params.lam)

    # -- torus-point evaluators -------------------------------------------

    def at(self, p) -> np.ndarray:
        return self.value(T.chart(self.params.a, p))


def rho_from_dist(d, lam):
    d = np.minimum(np.asarray(d, dtype=float), IOTA)
    return lam / (1.0 + lam**2 * d**2)


def rho_weight(p, params: BubbleParams) -> np.ndarray:
    return rho_from_dist(T.torus_dist(p, params.a), params.lam)


def z_tilde(p, params: BubbleParams) -> np.ndarray:
    return BubbleMap(params, check=False).tilde(T.chart(params.a, p))


def z_map(p, params: BubbleParams) -> np.ndarray:
    return BubbleMap(params).at(p)


def d_lambda_z(p, params: BubbleParams) -> np.ndarray:
    return BubbleMap(params).d_lambda(T.chart(params.a, p))


def d_center_z(p, params: BubbleParams, A) -> np.ndarray:
    return BubbleMap(params).d_center(T.chart(params.a, p), A)


# ----------------------------------------------------------------------------
# grid sampling


@lru_cache(maxsize=4)
def _grid_green(n: int):
    x = T.chart((0.0, 0.0), T.grid_points(n)).reshape(-1, 2)
    return x, _GREENS.regular_jet(x, 1)


def _node_offset(a, n):
    ia = np.asarray(a) * n
    k = np.rint(ia)
    return k.astype(int) if np.allclose(ia, k, atol=1e-12, rtol=0) else None


@lru_cache(maxsize=4)
def _grid_split(n: int, a: tuple[float, float] | None = None):
    """Grid data in the chart at a, split into the cutoff disk and the pure-tail region.

    Only the Green's data depend on the centre, so one entry serves every
    lambda and R there.  a = None is the origin with first-order data; an
    explicit centre also carries second derivatives for the x-gradient of z.
    """
    if a is None:
        x, H = _grid_green(n)
    else:
        x = T.chart(a, T.grid_points(n)).reshape(-1, 2)
        H = _GREENS.regular_jet(x, 2, with_value=False)
    q = np.sum(x**2, axis=-1)
    disk = q < 4 * R_CUT**2
    gH0 = _GREENS.regular_grad_origin()
    xo, qo = x[~disk], q[~disk, None]
    tail_base = H.grad[~disk] - xo / qo - gH0
    tail_hess = None
    if H.hess is not None:
        # d_k of grad G = hess H - d_k (x / |x|^2)
        qh = qo[..., None]
        tail_hess = H.hess[~disk] - np.eye(2) / qh + 2 * xo[:, :, None] * xo[:, None, :] / qh**2
    H_disk = GreenJet(None, H.grad[disk], None if H.hess is None else H.hess[disk])
    return x[disk], H_disk, disk, tail_base, tail_hess


def _sample_split(lam, n, R, split, with_grad=False):
    xd, Hd, disk, tail_base, tail_hess = split
    bm = BubbleMap(BubbleParams(lam))
    out = np.empty((n * n, 3))
    out[disk] = bm.jet(xd, H=Hd).v
    zt = np.empty((tail_base.shape[0], 3))
    zt[:, :2] = (-2.0 / lam) * tail_base
    zt[:, 2] = -1.0
    nt = np.linalg.norm(zt, axis=-1, keepdims=True)
    zn = zt / nt
    out[~disk] = zn
    fields = [out]
    if with_grad:
        grad = np.empty((2, n * n, 3))
        for k, e in enumerate(np.eye(2)):
            grad[k, disk] = bm.jet(xd, e, H=Hd).a
            dzt = np.zeros_like(zt)
            dzt[:, :2] = (-2.0 / lam) * tail_hess[:, :, k]
            grad[k, ~disk] = (dzt - zn * np.sum(zn * dzt, axis=-1, keepdims=True)) / nt
        fields.append(grad)
    if R is not None:
        fields = [f @ np.asarray(R).T for f in fields]
    out = fields[0].reshape(n, n, 3)
    return (out, fields[1].reshape(2, n, n, 3)) if with_grad else out


def origin_bubble_grid(lam: float, n: int, R=None) -> np.ndarray:
    """z_{lam,0} on the grid: jets on D_2r, the closed-form Green's tail elsewhere."""
    return _sample_split(lam, n, R, _grid_split(n))


def centred_bubble_grid(lam: float, a, n: int, R=None, with_grad: bool = False):
    """z_{lam,a} sampled exactly at any centre, optionally with its pointwise x-gradient
    (shape (2, n, n, 3)).  Repeated calls at one centre reuse the Green's data."""
    k = _node_offset(a, n)
    if k is not None and not with_grad:
        return np.roll(origin_bubble_grid(lam, n, R), tuple(k), axis=(0, 1))
    return _sample_split(lam, n, R, _grid_split(n, (float(a[0]), float(a[1]))), with_grad)


def bubble_grid(params: BubbleParams, n: int, with_dlam: bool = False):
    """Sample z (and optionally d z / d lambda) on the n x n node grid.

    Centres on grid nodes reuse a cached origin-centred evaluation and an
    exact index roll; other centres are evaluated directly, with their
    Green's data cached.
    """
    if not with_dlam:
        return centred_bubble_grid(params.lam, params.a, n, params.R)
    k = _node_offset(params.a, n)
    bm = BubbleMap(params)
    if k is not None:
        x, H = _grid_green(n)
    else:
        x = T.chart(params.a, T.grid_points(n)).reshape(-1, 2)
        H = _GREENS.regular_jet(x, 1)
    J = bm.jet(x, "lam", H=H)
    z = J.v.reshape(n, n, 3)
    dz = J.a.reshape(n, n, 3)
    if k is not None:
        z = np.roll(z, tuple(k), axis=(0, 1))
        dz = np.roll(dz, tuple(k), axis=(0, 1))
    return z, dz


def rho_grid(params: BubbleParams, n: int) -> np.ndarray:
    return rho_weight(T.grid_points(n), params)


# ----------------------------------------------------------------------------
# inner product, projections and the tangent space of the bubble set


def z_inner(V, W, rho) -> float:
    """<V, W>_z = int grad V . grad W + rho^2 V . W on the grid."""
    if V.shape != W.shape:
        raise ValueError(f"grid mismatch: {V.shape} vs {W.shape}")
    dV, dW = T.grad(V), T.grad(W)
    return float(np.mean(np.sum(dV * dW, axis=(0, -1)) + rho**2 * np.sum(V * W, axis=-1)))


def z_norm(V, rho) -> float:
    return float(np.sqrt(max(z_inner(V, V, rho), 0.0)))


def project_dP(u, X):
    """dP(u)[X] = X - (X . u) u, the tangential part of X at the unit vector u."""
    return X - np.sum(X * u, axis=-1, keepdims=True) * u


def second_fundamental(u, V, W):
    """A(u)(V, W) = -u (V . W) for the round sphere."""
    return -u * np.sum(V * W, axis=-1, keepdims=True)


def normalize(u):
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


_OMEGA = np.eye(3)


def tangent_basis_Z(params: BubbleParams, n: int) -> np.ndarray:
    """The six generators of T_z Z on the grid: d_lambda z, grad_{e1} z, grad_{e2} z, e_k x z."""
    z, dl = bubble_grid(params, n, with_dlam=True)
    dz = T.grad(z)
    # spectral derivatives of a unit field are tangent only up to aliasing
    basis = [project_dP(z, dl), project_dP(z, -dz[0]), project_dP(z, -dz[1])]
    basis += [np.cross(_OMEGA[k], z) for k in range(3)]
    return np.stack(basis)


def gram(basis, rho) -> np.ndarray:
    m = basis.shape[0]
    Gm = np.empty((m, m))
    for i in range(m):
        for k in range(i, m):
            Gm[i, k] = Gm[k, i] = z_inner(basis[i], basis[k], rho)
    return Gm
