import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblelab import golden
from bubblelab import torus as T
from bubblelab.bubble import (
    IOTA,
    R_CUT,
    BubbleMap,
    BubbleParams,
    bubble_grid,
    cutoff,
    d_center_z,
    d_lambda_z,
    gram,
    inv_stereo,
    inv_stereo_scaled,
    j_field,
    origin_bubble_grid,
    project_dP,
    rho_grid,
    rho_weight,
    tangent_basis_Z,
    z_inner,
    z_map,
    z_norm,
    z_tilde,
)
from bubblelab.energy import degree, degree_raw

GOLD = golden.load()["bubble"]
REGRESSION = 1.2  # frozen constants are checked with 20% headroom


def rot(axis, angle):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def disk_samples(rng, r_lo, r_hi, m=2000):
    r = np.sqrt(rng.uniform(r_lo**2, r_hi**2, m))
    th = rng.uniform(0, 2 * np.pi, m)
    return np.stack([r * np.cos(th), r * np.sin(th)], -1)


# -- building blocks --------------------------------------------------------


def test_inv_stereo_basics(rng):
    assert np.allclose(inv_stereo(np.zeros(2)), [0, 0, 1])
    x = rng.normal(scale=5, size=(1000, 2))
    assert np.abs(np.linalg.norm(inv_stereo(x), axis=-1) - 1).max() < 1e-14
    lam, h = 17.0, 1e-6
    g = [(inv_stereo_scaled(lam, h * e) - inv_stereo_scaled(lam, -h * e)) / (2 * h) for e in np.eye(2)]
    assert np.sum(np.square(g)) == pytest.approx(8 * lam**2, rel=1e-8)


def test_cutoff_profile():
    assert cutoff(0.0) == 1.0 and cutoff(2 * R_CUT) == 0.0
    assert 0 < cutoff(1.5 * R_CUT) < 1
    s = np.linspace(0, 3 * R_CUT, 2001)
    assert np.all(np.diff(cutoff(s)) <= 0)
    # flat joins: second differences vanish to FD accuracy across r and 2r
    h = 1e-4 * R_CUT
    for s0 in (R_CUT, 2 * R_CUT):
        d1 = (cutoff(s0 + h) - cutoff(s0 - h)) / (2 * h)
        d2 = (cutoff(s0 + h) - 2 * cutoff(s0) + cutoff(s0 - h)) / h**2
        assert abs(d1) < 1e-6 and abs(d2) * R_CUT**2 < 1e-6


def test_j_field(rng):
    assert np.allclose(j_field(np.zeros((1, 2)), 20.0), 0.0)
    x = disk_samples(rng, 0, 0.49)
    for lam in (20.0, 80.0):
        j = j_field(x, lam)
        assert np.all(j[:, 2] == 0)
        assert (np.linalg.norm(j, axis=-1) * lam / np.linalg.norm(x, axis=-1)).max() <= REGRESSION * GOLD["j_C"]
    # harmonic componentwise: five-point Laplacian
    h = 1e-3
    x0 = disk_samples(rng, 0.05, 0.3, 20)
    lap = sum(j_field(x0 + h * e, 20.0) + j_field(x0 - h * e, 20.0) for e in np.eye(2)) - 4 * j_field(x0, 20.0)
    assert np.abs(lap / h**2).max() < 1e-6 * 1e3  # FD truncation O(h^2) on a 1/lam-sized field


def test_z_tilde_branches(rng):
    p = BubbleParams(40.0, (0.3, 0.6))
    assert np.allclose(z_tilde(np.array([p.a]), p), [[0, 0, 1]])
    x = disk_samples(rng, R_CUT, 2 * R_CUT)
    for lam in (20.0, 50.0, 100.0):
        d = BubbleMap(BubbleParams(lam)).tilde(x) - inv_stereo_scaled(lam, x) - j_field(x, lam)
        assert np.linalg.norm(d, axis=-1).max() * lam**2 <= REGRESSION * GOLD["annulus_C"]
    far = T.grid_points(32).reshape(-1, 2)
    far = far[T.torus_dist(far, p.a) > IOTA]
    zt = z_tilde(far, p)
    assert np.all(zt[:, 2] == -1.0)
    assert np.abs(zt[:, :2]).max() < 8.0 / p.lam  # (2/lam) |grad G| with |grad G| ~ 1/|x| <= 4


def test_decomposition_residual(rng):
    # in D_r: z = pi + j^T + K with |grad K| <= C lam^-2 |x|
    x = disk_samples(rng, 1e-4, R_CUT)
    for lam in (20.0, 100.0):
        bm = BubbleMap(BubbleParams(lam))

        def K(y):
            z, pi, j = bm.value(y), inv_stereo_scaled(lam, y), j_field(y, lam)
            return z - pi - (j - np.sum(j * pi, -1, keepdims=True) * pi)

        h = 1e-7
        g = np.stack([(K(x + h * e) - K(x - h * e)) / (2 * h) for e in np.eye(2)], 1)
        ratio = np.sqrt(np.sum(g**2, axis=(1, 2))) * lam**2 / np.linalg.norm(x, axis=1)
        assert ratio.max() <= REGRESSION * GOLD["grad_K_C"]


@settings(max_examples=30, deadline=None)
@given(st.floats(4.0, 500.0), st.floats(0, 0.999), st.floats(0, 0.999), st.floats(0, np.pi))
def test_z_unit_norm_and_centre(lam, a1, a2, angle):
    R = rot((1, 2, 3), angle)
    p = BubbleParams(lam, (a1, a2), R)
    pts = np.random.default_rng(0).uniform(0, 1, (200, 2))
    z = z_map(pts, p)
    assert np.abs(np.linalg.norm(z, axis=-1) - 1).max() < 1e-14
    assert np.allclose(z_map(np.array([p.a]), p)[0], R @ [0, 0, 1], atol=1e-14)


def test_lambda_min_guard():
    with pytest.raises(ValueError):
        BubbleParams(1.0)
    with pytest.raises(ValueError):
        BubbleMap(BubbleParams(3.0))
    with pytest.raises(ValueError):
        BubbleParams(10.0, R=np.ones((3, 3)))


def test_degree_and_reflection():
    z = bubble_grid(BubbleParams(20.0), 512)
    assert abs(degree_raw(z) - 1) < 0.02
    zr = bubble_grid(BubbleParams(20.0, R=np.diag([1.0, 1.0, -1.0])), 512)
    assert degree(zr) == -1


def test_dirichlet_energy_single_bubble():
    for lam in (20.0, 30.0):
        z = bubble_grid(BubbleParams(lam), 512)
        e = 0.5 * T.integrate(np.sum(T.grad(z) ** 2, axis=(0, -1)))
        assert abs(e - 4 * np.pi) < 0.5


def test_grad_bounded_by_weight():
    for lam in (20.0, 50.0):
        p = BubbleParams(lam, (0.25, 0.5))
        z = bubble_grid(p, 512)
        g = np.sqrt(np.sum(T.grad(z) ** 2, axis=(0, -1)))
        assert (g / rho_grid(p, 512)).max() <= REGRESSION * GOLD["grad_over_rho_C"]


def test_weight_comparable_to_gradient_near_centre(rng):
    lo, hi = GOLD["rho_over_grad_range"]
    x = disk_samples(rng, 0, IOTA)
    for lam in (20.0, 100.0):
        bm = BubbleMap(BubbleParams(lam))
        q = bm.rho(x) / np.sqrt(np.sum(bm.grad(x) ** 2, axis=(1, 2)))
        assert q.min() >= lo / REGRESSION and q.max() <= hi * REGRESSION


def test_d_lambda_matches_fd(rng):
    p = BubbleParams(30.0, (0.1, 0.2), rot((0, 1, 1), 0.4))
    pts = np.array(T.wrap(p.a)) + rng.normal(scale=0.05, size=(20, 2))
    h = 1e-4 * p.lam
    fd = (z_map(pts, p.replace(lam=p.lam + h)) - z_map(pts, p.replace(lam=p.lam - h))) / (2 * h)
    an = d_lambda_z(pts, p)
    assert np.abs(an - fd).max() <= 1e-6 * np.abs(an).max()
    assert np.allclose(d_lambda_z(np.array([p.a]), p), 0.0, atol=1e-14)


def test_d_lambda_small_away_from_centre(rng):
    p = T.grid_points(64).reshape(-1, 2)
    for lam in (20.0, 100.0):
        bp = BubbleParams(lam)
        far = p[T.torus_dist(p, bp.a) > R_CUT]
        assert np.linalg.norm(d_lambda_z(far, bp), axis=-1).max() * lam**2 <= REGRESSION * GOLD["d_lambda_outside_C"]


def test_d_center_matches_fd(rng):
    p = BubbleParams(30.0, (0.4, 0.7))
    pts = np.array(p.a) + rng.normal(scale=0.05, size=(20, 2))
    for A in (np.array([1.0, 0.0]), np.array([0.6, 0.8])):
        h = 1e-6
        fd = (z_map(pts, p.replace(a=np.array(p.a) + h * A)) - z_map(pts, p.replace(a=np.array(p.a) - h * A))) / (2 * h)
        an = d_center_z(pts, p, A)
        assert np.abs(an - fd).max() <= 1e-6 * np.abs(an).max()
        centre = d_center_z(np.array([p.a]), p, A)[0]
        assert abs(centre @ z_map(np.array([p.a]), p)[0]) < 1e-12
        # |grad pi_lam(0) A| = 2 lam, reduced by grad j(0) = -(2/lam) Hess H(0) = -(2 pi/lam) I
        assert np.linalg.norm(centre) == pytest.approx(2 * p.lam - 2 * np.pi / p.lam, rel=1e-9)


def test_rho_weight():
    p = BubbleParams(25.0, (0.5, 0.5))
    assert rho_weight(np.array([p.a]), p)[0] == 25.0
    q = np.array([[0.5 + IOTA, 0.5], [0.5 + IOTA + 1e-3, 0.5]])
    w = rho_weight(q, p)
    assert w[0] == w[1] == pytest.approx(25.0 / (1 + 625 * IOTA**2))
    corner = rho_weight(np.array([[0.0, 0.0]]), p)[0]
    assert corner >= 25.0 / (1 + 625 / 2)


def test_z_inner(rng):
    n = 128
    p = BubbleParams(10.0)
    rho = rho_grid(p, n)
    V, W = rng.normal(size=(2, n, n, 3))
    V, W = T.lowpass(V, 6), T.lowpass(W, 6)
    assert z_norm(np.zeros((n, n, 3)), rho) == 0.0
    assert z_inner(V, W, rho) == pytest.approx(z_inner(W, V, rho), rel=1e-12)
    assert z_inner(V, V, rho) > 0
    with pytest.raises(ValueError):
        z_inner(V, W[:64, :64], rho)


def test_z_norm_refinement():
    p = BubbleParams(20.0)
    vals = [z_inner(bubble_grid(p, n), bubble_grid(p, n), rho_grid(p, n)) for n in (256, 512)]
    assert abs(vals[0] - vals[1]) < 1e-4 * vals[1]


def test_tangent_basis():
    n = 256
    p = BubbleParams(20.0)
    z = bubble_grid(p, n)
    B = tangent_basis_Z(p, n)
    assert B.shape == (6, n, n, 3)
    assert np.abs(np.sum(B * z, axis=-1)).max() < 1e-10
    assert np.linalg.norm(B[5], axis=-1).max() <= 1 + 1e-14
    G = gram(B, rho_grid(p, n))
    assert np.all(np.linalg.eigvalsh(G) > 0)
    assert abs(G[0, 5]) < 1e-8 * np.sqrt(G[0, 0] * G[5, 5])


@pytest.mark.slow
def test_gram_condition_regression():
    p = BubbleParams(20.0)
    G = gram(tangent_basis_Z(p, 512), rho_grid(p, 512))
    assert np.linalg.cond(G) == pytest.approx(GOLD["gram_cond_lam20_n512"], rel=0.2)


def test_project_dP(rng):
    u = rng.normal(size=(10, 3))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    X = rng.normal(size=(10, 3))
    assert np.abs(np.sum(project_dP(u, X) * u, axis=-1)).max() < 1e-15


def test_grid_fast_paths_agree():
    n = 128
    p = BubbleParams(12.0, (32 / n, 96 / n), rot((1, 0, 0), 0.3))
    z_fast = bubble_grid(p, n)
    z_slow = z_map(T.grid_points(n).reshape(-1, 2), p).reshape(n, n, 3)
    assert np.abs(z_fast - z_slow).max() < 1e-14
    z0 = origin_bubble_grid(12.0, n, p.R)
    assert np.abs(np.roll(z0, (32, 96), axis=(0, 1)) - z_fast).max() < 1e-14
