"""Geometry, spectral calculus and quadrature on the unit square flat torus.

Grid fields are plain numpy arrays of shape ``(n, n)`` (scalars) or
``(n, n, c)`` (vectors); node ``(i, j)`` sits at the point ``(i/n, j/n)``.
Axis 0 is the x1 direction, axis 1 the x2 direction.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.fft as sfft


@dataclass(frozen=True)
class FlatTorus:
    """The unit-area square torus R^2 / Z^2 and its chart constants."""

    side: tuple[float, float] = (1.0, 1.0)
    area: float = 1.0
    iota: float = 0.25  # half the injectivity radius
    r_cut: float = 0.0625  # 4 r = iota
    rho_chart: float = 0.5  # rho = 2 iota


TORUS = FlatTorus()


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, float]

    def __post_init__(self):
        x, y = self.coords
        if not (0.0 <= x < 1.0 and 0.0 <= y < 1.0):
            raise ValueError(f"TorusPoint coordinates must lie in [0,1)^2, got {self.coords}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def _mod1(v):
    w = np.mod(v, 1.0)
    # np.mod can return exactly 1.0 for tiny negative inputs
    return np.where(w >= 1.0, 0.0, w)


def wrap(p) -> TorusPoint:
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise ValueError(f"wrap needs a finite pair, got {p!r}")
    w = _mod1(p)
    return TorusPoint((float(w[0]), float(w[1])))


def chart(a, p) -> np.ndarray:
    """Representative of ``p - a`` nearest the origin (the translation chart at ``a``).

    Works on arrays of points with trailing dimension 2.  Ties at a
    coordinate of exactly 1/2 resolve to +1/2.
    """
    d = np.asarray(p, dtype=float) - np.asarray(a, dtype=float)
    d = d - np.floor(d + 0.5)
    return np.where(d == -0.5, 0.5, d)


def torus_dist(p, q):
    return np.linalg.norm(chart(q, p), axis=-1)


# ----------------------------------------------------------------------------
# grid fields


@dataclass
class GridField:
    """A periodic n x n grid of scalars or vectors."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim not in (2, 3) or v.shape[0] != v.shape[1]:
            raise ValueError(f"grid field must be (n, n) or (n, n, c), got {v.shape}")
        n = v.shape[0]
        if n < 8 or n & (n - 1):
            raise ValueError(f"grid resolution must be a power of two >= 8, got {n}")
        self.values = v

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def components(self) -> int:
        return 1 if self.values.ndim == 2 else self.values.shape[2]


MAGIC = b"ABLGRID1"


def write_grid_binary(path, f: GridField | np.ndarray) -> None:
    """Raw little-endian float64 with a 16-byte header: magic, u32 n, u32 components."""
    f = f if isinstance(f, GridField) else GridField(f)
    header = MAGIC + struct.pack("<II", f.n, f.components)
    data = np.ascontiguousarray(f.values, dtype="<f8")
    Path(path).write_bytes(header + data.tobytes())


def read_grid_binary(path) -> GridField:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path}: not an ABLGRID1 file")
    n, c = struct.unpack("<II", raw[8:16])
    vals = np.frombuffer(raw[16:], dtype="<f8")
    if vals.size != n * n * c:
        raise ValueError(f"{path}: expected {n * n * c} values, found {vals.size}")
    shape = (n, n) if c == 1 else (n, n, c)
    return GridField(vals.reshape(shape).astype(float))


def write_grid_csv(path, f: GridField | np.ndarray) -> None:
    f = f if isinstance(f, GridField) else GridField(f)
    n, c = f.n, f.components
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    cols = [ii.ravel(), jj.ravel()] + [f.values.reshape(n * n, c)[:, k] for k in range(c)]
    names = ["i", "j"] + [f"v{k}" for k in range(c)]
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(f"{row[0]},{row[1]}," + ",".join(repr(float(v)) for v in row[2:]) + "\n")


def read_grid_csv(path) -> GridField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    i, j = data[:, 0].astype(int), data[:, 1].astype(int)
    n = int(i.max()) + 1
    c = data.shape[1] - 2
    vals = np.zeros((n, n, c))
    vals[i, j] = data[:, 2:]
    return GridField(vals[..., 0] if c == 1 else vals)


def grid_points(n: int) -> np.ndarray:
    t = np.arange(n) / n
    return np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1)


# ----------------------------------------------------------------------------
# spectral calculus


@lru_cache(maxsize=8)
def _wavenumbers(n: int):
    k0 = sfft.fftfreq(n, 1.0 / n)
    k1 = sfft.rfftfreq(n, 1.0 / n)
    k0d = k0.copy()
    k1d = k1.copy()
    # odd derivatives drop the Nyquist mode so D stays real and skew-adjoint
    k0d[n // 2] = 0.0
    k1d[n // 2] = 0.0
    return k0, k1, k0d, k1d


def _check_grid(f):
    n = f.shape[0]
    if f.ndim < 2 or f.shape[1] != n:
        raise ValueError(f"expected an (n, n, ...) grid array, got {f.shape}")
    if n < 8:
        raise ValueError(f"resolution too small for spectral derivatives (n={n} < 8)")
    return n


def _fwd(f):
    return sfft.rfft2(f, axes=(0, 1))


def _inv(F, n):
    return sfft.irfft2(F, s=(n, n), axes=(0, 1))


def _bshape(k, axis, ndim):
    shape = [1] * ndim
    shape[axis] = k.size
    return k.reshape(shape)


def grad(f: np.ndarray) -> np.ndarray:
    """Spectral gradient; result has a leading axis of length 2."""
    n = _check_grid(f)
    _, _, k0d, k1d = _wavenumbers(n)
    F = _fwd(f)
    m0 = 2j * np.pi * _bshape(k0d, 0, F.ndim)
    m1 = 2j * np.pi * _bshape(k1d, 1, F.ndim)
    return np.stack([_inv(m0 * F, n), _inv(m1 * F, n)])


def div(g: np.ndarray) -> np.ndarray:
    """Spectral divergence of a field with leading axis 2 (the adjoint of -grad)."""
    n = _check_grid(g[0])
    _, _, k0d, k1d = _wavenumbers(n)
    G0, G1 = _fwd(g[0]), _fwd(g[1])
    m0 = 2j * np.pi * _bshape(k0d, 0, G0.ndim)
    m1 = 2j * np.pi * _bshape(k1d, 1, G0.ndim)
    return _inv(m0 * G0 + m1 * G1, n)


def _k2(n, ndim):
    k0, k1, _, _ = _wavenumbers(n)
    return _bshape(k0, 0, ndim) ** 2 + _bshape(k1, 1, ndim) ** 2


def laplacian(f: np.ndarray) -> np.ndarray:
    n = _check_grid(f)
    F = _fwd(f)
    return _inv(-4.0 * np.pi**2 * _k2(n, F.ndim) * F, n)


def helmholtz_solve(f: np.ndarray, mass: float = 1.0) -> np.ndarray:
    """Solve (-Laplacian + mass) g = f spectrally."""
    n = _check_grid(f)
    F = _fwd(f)
    return _inv(F / (4.0 * np.pi**2 * _k2(n, F.ndim) + mass), n)


def shift(f: np.ndarray, v) -> np.ndarray:
    """Return the trigonometric interpolant of ``f`` translated by ``v``: f(. - v)."""
    n = _check_grid(f)
    v = np.asarray(v, dtype=float)
    k0, k1, _, _ = _wavenumbers(n)
    F = _fwd(f)
    phase = np.exp(-2j * np.pi * (_bshape(k0, 0, F.ndim) * v[0] + _bshape(k1, 1, F.ndim) * v[1]))
    return _inv(F * phase, n)


def lowpass(f: np.ndarray, kmax: float) -> np.ndarray:
    """Zero all Fourier modes with |k|_inf > kmax."""
    n = _check_grid(f)
    k0, k1, _, _ = _wavenumbers(n)
    F = _fwd(f)
    keep = (np.abs(_bshape(k0, 0, F.ndim)) <= kmax) & (np.abs(_bshape(k1, 1, F.ndim)) <= kmax)
    return _inv(F * keep, n)


def integrate(f: np.ndarray) -> float:
    """Periodic trapezoid rule over the unit torus (mean times area)."""
    return float(np.mean(f, axis=(0, 1)).sum()) if f.ndim > 2 else float(np.mean(f))


def resample(f: np.ndarray, m: int) -> np.ndarray:
    """Spectral up/down-sampling of a grid field to resolution ``m``."""
    n = _check_grid(f)
    if m == n:
        return f.copy()
    F = sfft.fft2(f, axes=(0, 1))
    G = np.zeros((m, m) + f.shape[2:], dtype=complex)
    h = min(n, m) // 2
    idx = np.r_[0:h, -h + 1 : 0]
    G[np.ix_(idx, idx)] = F[np.ix_(idx, idx)]
    return np.real(sfft.ifft2(G, axes=(0, 1))) * (m * m) / (n * n)


# ----------------------------------------------------------------------------
# composite polar quadrature in a chart


@dataclass
class PolarQuadrature:
    """Nodes and weights for integrals in chart coordinates centred on the bubble.

    ``points`` are chart vectors x (shape (m, 2)) and ``weights`` already
    contain the polar Jacobian.  ``rings`` holds the radial panel breakpoints.
    """

    center: tuple[float, float]
    points: np.ndarray
    weights: np.ndarray
    rings: np.ndarray
    n_angular: int

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.any(np.diff(self.rings) <= 0):
            raise ValueError("ring radii must be strictly increasing")

    def integrate(self, values: np.ndarray) -> float:
        values = np.asarray(values)
        if not np.all(np.isfinite(values)):
            raise FloatingPointError("non-finite integrand sample")
        return float(np.tensordot(self.weights, values, axes=(0, 0)).sum())

    def __len__(self):
        return self.weights.size


def _gl(m):
    return np.polynomial.legendre.leggauss(m)


def _panels(r0, r1, ratio):
    k = max(1, int(np.ceil(np.log(r1 / r0) / np.log(ratio))))
    return np.geomspace(r0, r1, k + 1)


def _radial_nodes(breaks, order):
    t, w = _gl(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    r = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    wr = 0.5 * (b - a) * w[None, :]
    return r.ravel(), wr.ravel()


def disk_quadrature(
    lam: float,
    r_outer: float = 2 * TORUS.r_cut,
    n_angular: int = 32,
    order: int = 12,
    ratio: float = 1.15,
    r_join: float | None = TORUS.r_cut,
    join_panels: int = 8,
    center=(0.0, 0.0),
) -> PolarQuadrature:
    """Polar rule on the disk of radius ``r_outer`` graded geometrically towards 0.

    Rings start at 1e-3/lam (a single Gauss panel covers the innermost disk).
    If ``r_join`` lies inside, the annulus [r_join, r_outer] gets
    ``join_panels`` uniform panels so the cutoff's flat joins sit on breakpoints.
    """
    r0 = 1e-3 / lam
    if r_join is not None and r0 < r_join < r_outer:
        inner = _panels(r0, r_join, ratio)
        annulus = np.linspace(r_join, r_outer, join_panels + 1)
        breaks = np.concatenate([[0.0], inner, annulus[1:]])
    else:
        breaks = np.concatenate([[0.0], _panels(r0, r_outer, ratio)])
    r, wr = _radial_nodes(breaks, order)
    th = 2 * np.pi * np.arange(n_angular) / n_angular
    rr, tt = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    wts = (wr[:, None] * rr * (2 * np.pi / n_angular)).ravel()
    return PolarQuadrature(tuple(center), pts, wts, breaks, n_angular)


def plane_quadrature(lam: float, n_angular: int = 32, order: int = 12, ratio: float = 1.15):
    """Disk rule extended far enough (|x| <= 1e8/lam) to stand in for all of R^2."""
    return disk_quadrature(lam, r_outer=1e8 / lam, n_angular=n_angular, order=order, ratio=ratio, r_join=None)


def complement_quadrature(
    r_inner: float = 2 * TORUS.r_cut,
    n_theta: int = 24,
    order: int = 12,
    ratio: float = 1.25,
    center=(0.0, 0.0),
) -> PolarQuadrature:
    """Polar rule on the fundamental square [-1/2,1/2]^2 minus the disk of radius r_inner.

    Eight angular sectors (edges at multiples of pi/4) keep the square's
    boundary smooth within each sector.
    """
    tg, wg = _gl(n_theta)
    tr, wr = _gl(order)
    pts, wts = [], []
    for s in range(8):
        t0, t1 = s * np.pi / 4, (s + 1) * np.pi / 4
        th = 0.5 * (t1 - t0) * tg + 0.5 * (t0 + t1)
        wth = 0.5 * (t1 - t0) * wg
        R = 0.5 / np.maximum(np.abs(np.cos(th)), np.abs(np.sin(th)))
        k = max(1, int(np.ceil(np.log(R.max() / r_inner) / np.log(ratio))))
        # breakpoints scale with R(theta) so every ray has the same panel count
        u = np.geomspace(1.0, R[:, None] / r_inner, k + 1, axis=-1)[:, 0, :] * r_inner
        a, b = u[:, :-1, None], u[:, 1:, None]
        r = 0.5 * (b - a) * tr + 0.5 * (a + b)
        w = 0.5 * (b - a) * wr
        r = r.reshape(n_theta, -1)
        w = w.reshape(n_theta, -1)
        pts.append(np.stack([r * np.cos(th)[:, None], r * np.sin(th)[:, None]], axis=-1).reshape(-1, 2))
        wts.append((w * r * wth[:, None]).ravel())
    pts = np.concatenate(pts)
    wts = np.concatenate(wts)
    return PolarQuadrature(tuple(center), pts, wts, np.array([r_inner, np.sqrt(0.5)]), n_theta)


@dataclass
class TorusQuadrature:
    """Composite rule for the whole torus: bubble disk D_{2r} plus its complement."""

    disk: PolarQuadrature
    outer: PolarQuadrature

    @property
    def points(self):
        return np.concatenate([self.disk.points, self.outer.points])

    @property
    def weights(self):
        return np.concatenate([self.disk.weights, self.outer.weights])

    def integrate(self, values) -> float:
        values = np.asarray(values)
        m = len(self.disk)
        return self.disk.integrate(values[:m]) + self.outer.integrate(values[m:])

    def __len__(self):
        return len(self.disk) + len(self.outer)


def torus_quadrature(lam: float, refine: int = 1, **kw) -> TorusQuadrature:
    """Composite quadrature of the torus adapted to a bubble of scale 1/lam at the origin."""
    ratio = 1.15 ** (1.0 / refine)
    disk = disk_quadrature(
        lam, n_angular=32 * refine, order=12, ratio=ratio, join_panels=8 * refine, **kw
    )
    outer = complement_quadrature(n_theta=24 * refine, ratio=1.25 ** (1.0 / refine))
    return TorusQuadrature(disk, outer)


def integrate_bubble(f, q: PolarQuadrature | TorusQuadrature) -> float:
    """Integrate a function of chart coordinates with a composite polar rule."""
    return q.integrate(f(q.points))
