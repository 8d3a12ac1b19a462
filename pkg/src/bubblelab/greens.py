"""Green's function of the unit square torus and its regular part.

The Green's function solves -Lap G = 2 pi (delta_0 - 1) with zero mean,

    G(w) = sum_{k != 0} exp(2 pi i k.w) / (2 pi |k|^2),

evaluated by Ewald splitting with screening parameter ``eta``:

    G(w) = 1/2 sum_n E1(eta^2 |w - n|^2) - pi / (2 eta^2)
           + sum_{k != 0} exp(-pi^2 |k|^2 / eta^2) cos(2 pi k.w) / (2 pi |k|^2).

The regular part H(w) = G(w) + log|w| (w the chart representative nearest 0)
is smooth; its nearest-image term is handled through the entire function
Ein(t) = E1(t) + gamma + log t so the logarithm cancels symbolically.
In the chart at a, J_a(x, y) = H(x - y).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import exp1

from .torus import chart

EULER_GAMMA = 0.57721566490153286061
_SERIES_T = 0.5


def _ein_derivs(t: np.ndarray, order: int):
    """Ein(t) and its first ``order`` derivatives in t (Ein' = (1 - e^{-t}) / t)."""
    t = np.asarray(t, dtype=float)
    small = t < _SERIES_T
    ts = np.where(small, t, 0.0)
    tl = np.where(small, 1.0, t)
    out = []
    # value
    m = np.arange(1, 25)
    fact = np.cumprod(np.r_[1.0, m[:-1] + 0.0]) * 1.0  # (m-1)!
    mfact = fact * m  # m!
    sign = (-1.0) ** (m + 1)
    ser = np.polynomial.polynomial.polyval(ts, np.r_[0.0, sign / (m * mfact)])
    direct = exp1(tl) + EULER_GAMMA + np.log(tl)
    out.append(np.where(small, ser, direct))
    if order >= 1:
        # (1 - e^{-t}) / t = sum_{j>=0} (-1)^j t^j / (j+1)!
        j = np.arange(0, 24)
        c1 = (-1.0) ** j / np.cumprod(np.r_[1.0, np.arange(2, 25.0)])[: j.size]
        ser1 = np.polynomial.polynomial.polyval(ts, c1)
        d1 = -np.expm1(-tl) / tl
        out.append(np.where(small, ser1, d1))
    if order >= 2:
        c2 = np.polynomial.polynomial.polyder(c1)
        e = np.exp(-tl)
        d2 = (tl * e + np.expm1(-tl)) / tl**2
        out.append(np.where(small, np.polynomial.polynomial.polyval(ts, c2), d2))
    if order >= 3:
        c3 = np.polynomial.polynomial.polyder(c1, 2)
        e = np.exp(-tl)
        d3 = (-(tl**2) * e - 2 * tl * e - 2 * np.expm1(-tl)) / tl**3
        out.append(np.where(small, np.polynomial.polynomial.polyval(ts, c3), d3))
    return out


def _radial_jet(F, d, order):
    """Cartesian derivatives of F(|d|^2) from q-derivatives F = [F, F', F'', F''']."""
    out = [F[0]]
    if order >= 1:
        out.append(2 * F[1][..., None] * d)
    if order >= 2:
        eye = np.eye(2)
        out.append(4 * F[2][..., None, None] * d[..., :, None] * d[..., None, :]
                   + 2 * F[1][..., None, None] * eye)
    if order >= 3:
        eye = np.eye(2)
        sym = (eye[:, :, None] * d[..., None, None, :]
               + eye[:, None, :] * d[..., None, :, None]
               + eye[None, :, :] * d[..., :, None, None])
        out.append(8 * F[3][..., None, None, None] * d[..., :, None, None] * d[..., None, :, None] * d[..., None, None, :]
                   + 4 * F[2][..., None, None, None] * sym)
    return out


@dataclass(frozen=True)
class GreenJet:
    """Value and Cartesian derivatives up to third order at a batch of points."""

    value: np.ndarray
    grad: np.ndarray | None = None
    hess: np.ndarray | None = None
    third: np.ndarray | None = None


@dataclass
class GreensTorus:
    """Ewald evaluator for G and H = G + log|w| on the unit square torus."""

    eta: float = 2.0
    tol: float = 1e-14
    genus: int = 1
    _images: np.ndarray = field(init=False, repr=False)
    _kvecs: np.ndarray = field(init=False, repr=False)
    _kcoef: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.genus != 1:
            raise ValueError(f"unsupported genus {self.genus}: only the flat torus (c_1 = 1) is implemented")
        if self.eta <= 0:
            raise ValueError("Ewald parameter eta must be positive")
        cut = -np.log(self.tol) + 1.0  # e^{-x} below tol, with a little room for prefactors
        r_real = np.sqrt(cut) / self.eta + np.sqrt(0.5) + 1.0
        m = int(np.ceil(r_real))
        n1, n2 = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
        imgs = np.stack([n1.ravel(), n2.ravel()], axis=1).astype(float)
        keep = np.linalg.norm(imgs, axis=1) <= r_real
        imgs = imgs[keep]
        # the nearest image (n = 0) is handled separately
        self._images = imgs[np.any(imgs != 0, axis=1)]
        k_max = self.eta * np.sqrt(cut) / np.pi + 1.0
        m = int(np.ceil(k_max))
        k1, k2 = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
        ks = np.stack([k1.ravel(), k2.ravel()], axis=1).astype(float)
        kk = np.sum(ks**2, axis=1)
        # half space: cos(2 pi k.w) pairs k and -k
        half = (ks[:, 0] > 0) | ((ks[:, 0] == 0) & (ks[:, 1] > 0))
        keep = half & (kk <= k_max**2)
        self._kvecs = ks[keep]
        kk = kk[keep]
        self._kcoef = 2.0 * np.exp(-np.pi**2 * kk / self.eta**2) / (2 * np.pi * kk)

    # -- core -------------------------------------------------------------

    def _jet(self, w, order: int, regular: bool, with_value: bool = True) -> GreenJet:
        w = np.asarray(chart((0.0, 0.0), w), dtype=float)
        shp = w.shape[:-1]
        w = w.reshape(-1, 2)
        c = self.eta**2
        out = [np.zeros(w.shape[0]), np.zeros((w.shape[0], 2)),
               np.zeros((w.shape[0], 2, 2)), np.zeros((w.shape[0], 2, 2, 2))][: order + 1]

        # nearest image: 1/2 (-gamma - 2 log eta + Ein(eta^2 q)) [- 1/2 log q if not regular]
        q0 = np.sum(w**2, axis=1)
        E = _ein_derivs(c * q0, order)
        F = [0.5 * (-EULER_GAMMA - 2 * np.log(self.eta) + E[0])]
        F += [0.5 * c**k * E[k] for k in range(1, order + 1)]
        if not regular:
            if np.any(q0 == 0):
                raise ZeroDivisionError("Green's function is singular at lattice points")
            F[0] = F[0] - 0.5 * np.log(q0)
            logd = [None, -0.5 / q0, 0.5 / q0**2, -1.0 / q0**3]
            for k in range(1, order + 1):
                F[k] = F[k] + logd[k]
        for k, t in enumerate(_radial_jet(F, w, order)):
            out[k] += t

        # remaining real-space images
        chunk = max(1, 400000 // max(1, len(self._images)))
        for s in range(0, w.shape[0], chunk):
            ws = w[s : s + chunk]
            d = ws[:, None, :] - self._images[None, :, :]
            q = np.sum(d**2, axis=-1)
            e = np.exp(-c * q)
            # exp1 dominates the cost and only the value needs it
            Fi = [0.5 * exp1(c * q) if with_value else None]
            if order >= 1:
                Fi.append(-0.5 * e / q)
            if order >= 2:
                Fi.append(0.5 * e * (c * q + 1) / q**2)
            if order >= 3:
                Fi.append(-0.5 * e * (c**2 * q**2 + 2 * c * q + 2) / q**3)
            for k, t in enumerate(_radial_jet(Fi, d, order)):
                if t is not None:
                    out[k][s : s + chunk] += t.sum(axis=1)

        # smooth reciprocal-space part
        out[0] += -np.pi / (2 * c)
        for s in range(0, w.shape[0], chunk):
            ws = w[s : s + chunk]
            ph = 2 * np.pi * ws @ self._kvecs.T
            cs, sn = np.cos(ph), np.sin(ph)
            K = 2 * np.pi * self._kvecs
            a = self._kcoef
            out[0][s : s + chunk] += cs @ a
            if order >= 1:
                out[1][s : s + chunk] += -(sn * a) @ K
            if order >= 2:
                out[2][s : s + chunk] += -np.einsum("pm,mi,mj->pij", cs * a, K, K)
            if order >= 3:
                out[3][s : s + chunk] += np.einsum("pm,mi,mj,mk->pijk", sn * a, K, K, K)

        vals = [o.reshape(shp + o.shape[1:]) for o in out]
        if not with_value:
            vals[0] = None
        return GreenJet(*vals)

    # -- public API -------------------------------------------------------

    def green(self, w) -> np.ndarray:
        return self._jet(w, 0, regular=False).value

    def green_jet(self, w, order: int = 1) -> GreenJet:
        return self._jet(w, order, regular=False)

    def regular(self, w) -> np.ndarray:
        """H(w) = G(w) + log|w| for the chart representative w."""
        return self._jet(w, 0, regular=True).value

    def regular_jet(self, w, order: int = 2, with_value: bool = True) -> GreenJet:
        return self._jet(w, order, regular=True, with_value=with_value)

    def regular_grad_origin(self) -> np.ndarray:
        """grad H(0), cached; it vanishes by symmetry but is evaluated, not assumed."""
        g = self.__dict__.get("_grad_H0")
        if g is None:
            g = self.__dict__["_grad_H0"] = self._jet(np.zeros((1, 2)), 1, regular=True).grad[0]
        return g

    def grad_y_J(self, x) -> np.ndarray:
        """grad_y J_a(x, 0) in the chart at a; equals -grad H(x) on the torus."""
        return -self._jet(x, 1, regular=True).grad

    def jay(self, a=(0.0, 0.0)) -> float:
        """d_{x1} d_{y1} J_a(0,0) + d_{x2} d_{y2} J_a(0,0) = -Lap H(0)."""
        # the torus chart at any a is a translation, so J_a does not depend on a
        np.asarray(a, dtype=float)
        h = self._jet(np.zeros((1, 2)), 2, regular=True).hess[0]
        return float(-(h[0, 0] + h[1, 1]))

    def grad_jay(self, a=(0.0, 0.0)) -> np.ndarray:
        """Gradient of the Robin function from third derivatives of J at the diagonal.

        -1/2 grad_A jay = A^i d_{x^i}[d_{x^1} d_{y^1} + d_{x^2} d_{y^2}] J_a(0, 0), and
        d_x d_x d_y J = -d^3 H there.
        """
        t = self._jet(np.zeros((1, 2)), 3, regular=True).third[0]
        lap_grad = t[:, 0, 0] + t[:, 1, 1]
        return 2.0 * lap_grad


def jay_one_form(genus: int = 1) -> float:
    """Robin function from the normalised holomorphic one-form dz / sqrt(2) (|dz|^2 = 2)."""
    if genus != 1:
        raise ValueError(f"unsupported genus {genus}")
    c_gamma = 1.0
    phi_sq = 2.0 / 2.0
    return -2 * np.pi * c_gamma * phi_sq


# ----------------------------------------------------------------------------
# independent oracles


def spectral_green(n: int) -> np.ndarray:
    """Grid solution of -Lap g = 2 pi (delta_h - 1), zero mean, by Fourier division."""
    k = np.fft.fftfreq(n, 1.0 / n)
    kk = k[:, None] ** 2 + k[None, :] ** 2
    kk[0, 0] = 1.0
    G = 2 * np.pi / (4 * np.pi**2 * kk)
    G[0, 0] = 0.0
    return np.real(np.fft.ifft2(G)) * n * n


def theta_green(w, terms: int = 12) -> np.ndarray:
    """-log|theta_1(pi (w1 + i w2), e^{-pi})| + pi w2^2, equal to G up to a constant."""
    w = np.asarray(chart((0.0, 0.0), w), dtype=float)
    z = np.pi * (w[..., 0] + 1j * w[..., 1])
    q = np.exp(-np.pi)
    th = np.zeros(z.shape, dtype=complex)
    for m in range(terms):
        th += 2 * (-1) ** m * q ** ((m + 0.5) ** 2) * np.sin((2 * m + 1) * z)
    return -np.log(np.abs(th)) + np.pi * w[..., 1] ** 2


def weak_form_residual(greens: GreensTorus, rng, kmax: int = 3, trials: int = 5) -> float:
    """max |int G (-Lap v) - 2 pi (v(0) - int v)| over random trigonometric polynomials v.

    G carries a log singularity at 0, so the integral uses the bubble-adapted
    polar rule centred there.
    """
    from .torus import torus_quadrature

    q = torus_quadrature(8.0)
    x = q.points
    gx = greens.green(x)
    ks = np.array([(i, j) for i in range(-kmax, kmax + 1) for j in range(-kmax, kmax + 1)], float)
    worst = 0.0
    for _ in range(trials):
        c = rng.standard_normal(len(ks))
        s = rng.standard_normal(len(ks))
        ph = 2 * np.pi * x @ ks.T
        kk = 4 * np.pi**2 * np.sum(ks**2, axis=1)
        minus_lap_v = (np.cos(ph) * c + np.sin(ph) * s) @ kk
        lhs = q.integrate(gx * minus_lap_v)
        mean_v = float(np.sum(c[np.all(ks == 0, axis=1)]))
        rhs = 2 * np.pi * (float(np.sum(c)) - mean_v)
        worst = max(worst, abs(lhs - rhs))
    return worst
