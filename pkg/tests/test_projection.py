import numpy as np
import pytest

from bubblelab.bubble import BubbleParams, bubble_grid, normalize, rho_grid, tangent_basis_Z, z_inner
from bubblelab.energy import orthogonalize, random_tangent
from bubblelab.greens import GreensTorus
from bubblelab.projection import (
    ProjectionError,
    ProjectionResult,
    closeness,
    init_guess,
    procrustes_R,
    project_to_Z,
    search_grid,
    theorem1_defect,
)
from test_bubble import rot


def rotation_error(A, B):
    return np.abs(A - B).max()


@pytest.mark.parametrize("lam,a,axis,angle", [
    (10.0, (0.2, 0.7), (1, 0, 0), 0.4),
    (30.0, (0.55, 0.1), (0, 1, 1), 2.0),
    (100.0, (0.31, 0.62), (1, 2, 3), -1.2),
])
def test_round_trip(lam, a, axis, angle):
    n = 512
    p = BubbleParams(lam, a, rot(axis, angle))
    res = project_to_Z(bubble_grid(p, n))
    assert res.converged and not res.multiple_minima
    assert res.distance < 1e-8
    assert res.params.lam == pytest.approx(lam, rel=1e-8)
    assert np.allclose(res.params.a, a, atol=1e-9)
    assert rotation_error(res.params.R, p.R) < 1e-8


def test_centre_recovers_scale_to_five_digits():
    res = project_to_Z(bubble_grid(BubbleParams(25.0, (0.5, 0.5)), 256))
    assert round(res.params.lam, 3) == 25.0
    assert res.sup_gap < 1e-8 and res.sup_grad_gap < 1e-6


def test_rotation_and_translation_equivariance():
    n = 256
    # a field that is not itself a bubble, so the minimiser is not trivially exact
    rng = np.random.default_rng(7)
    p = BubbleParams(12.0, (0.25, 0.5))
    z = bubble_grid(p, n)
    u = normalize(z + 0.02 * random_tangent(z, rng, kmax=4))
    base = project_to_Z(u)
    Q = rot((2, -1, 1), 0.9)
    res_R = project_to_Z(u @ Q.T)
    assert abs(res_R.distance - base.distance) < 1e-8
    assert res_R.params.lam == pytest.approx(base.params.lam, rel=1e-6)
    assert rotation_error(res_R.params.R, Q @ base.params.R) < 1e-5
    shift = (16, 48)
    res_T = project_to_Z(np.roll(u, shift, axis=(0, 1)))
    assert abs(res_T.distance - base.distance) < 1e-8
    a_expected = np.mod(np.array(base.params.a) + np.array(shift) / n, 1.0)
    assert np.allclose(res_T.params.a, a_expected, atol=1e-6)


@pytest.mark.parametrize("eps", [1e-3, 1e-2])
def test_normal_perturbation_distance(eps):
    # a perturbation orthogonal to T_z Z moves u off Z by its own z-norm to first order
    n = 256
    p = BubbleParams(15.0, (0.4, 0.3))
    z = bubble_grid(p, n)
    rho = rho_grid(p, n)
    V = orthogonalize(random_tangent(z, np.random.default_rng(11), kmax=6), tangent_basis_Z(p, n), rho)
    V *= eps / np.sqrt(z_inner(V, V, rho))
    u = normalize(z + V)
    injected = np.sqrt(z_inner(u - z, u - z, rho))
    res = project_to_Z(u)
    assert res.distance == pytest.approx(injected, rel=0.2)
    assert res.params.lam == pytest.approx(15.0, rel=10 * eps)


def test_init_guess_locates_bubble():
    g = init_guess(bubble_grid(BubbleParams(20.0, (0.75, 0.25)), 256))
    assert np.allclose(g.a, (0.75, 0.25), atol=1 / 256)
    assert g.lam == pytest.approx(20.0, rel=0.2)
    assert abs(np.linalg.det(g.R) - 1) < 1e-12


def test_init_guess_rejects_flat_field():
    u = np.broadcast_to([0.0, 0.0, 1.0], (64, 64, 3)).copy()
    with pytest.raises(ProjectionError, match="no concentration"):
        init_guess(u)


def test_procrustes_exact_recovery():
    n = 128
    p = BubbleParams(8.0)
    z = bubble_grid(p, n)
    rho = rho_grid(p, n)
    Q = rot((1, 1, 1), 1.3)
    assert rotation_error(procrustes_R(z @ Q.T, z, rho), Q) < 1e-12


def test_procrustes_orientation_reversing():
    n = 128
    p = BubbleParams(8.0)
    z = bubble_grid(p, n)
    rho = rho_grid(p, n)
    flip = np.diag([1.0, 1.0, -1.0])
    R = procrustes_R(z @ flip.T, z, rho)
    assert np.linalg.det(R) == pytest.approx(-1.0)
    assert rotation_error(R, flip) < 1e-12


def test_procrustes_rejects_constant():
    u = np.broadcast_to([0.0, 0.0, 1.0], (32, 32, 3)).copy()
    with pytest.raises(ProjectionError):
        procrustes_R(u, u, np.ones((32, 32)), orientation=1)


def test_search_grid():
    assert search_grid(1024, 10.0) == 128
    assert search_grid(1024, 100.0) == 256
    assert search_grid(1024, 600.0) == 1024
    assert search_grid(64, 10.0) == 64


def test_closeness_zero_on_bubble():
    p = BubbleParams(10.0, (0.3, 0.8), rot((0, 0, 1), 0.5))
    assert max(closeness(bubble_grid(p, 256), p)) < 1e-9


def test_stationarity_at_minimiser():
    n = 256
    z = bubble_grid(BubbleParams(12.0, (0.5, 0.5)), n)
    u = normalize(z + 0.02 * random_tangent(z, np.random.default_rng(3), kmax=4))
    res = project_to_Z(u)
    assert res.converged
    assert res.stationarity < 1e-6
    assert len(res.candidates) == 4
    h = res.polish_history
    assert len(h) >= 2 and all(b <= a for a, b in zip(h, h[1:]))
    assert res.distance == pytest.approx(np.sqrt(h[-1]), rel=1e-12)


def _result(lam, a=(0.0, 0.0)):
    return ProjectionResult(BubbleParams(lam, a), 0.0, 0.0, 0.0, True, 0)


def test_theorem1_defect_examples():
    greens = GreensTorus()
    alpha = 1.01
    lam_star = np.sqrt(-greens.jay() / (alpha - 1))
    assert lam_star == pytest.approx(np.sqrt(2 * np.pi / 0.01), rel=1e-10)
    d, ratio = theorem1_defect(_result(lam_star), alpha, greens)
    assert d < 1e-15 and ratio < 1e-12
    d, _ = theorem1_defect(_result(2 * lam_star, (0.3, 0.9)), alpha, greens)
    assert d == pytest.approx(0.75 * (alpha - 1), rel=1e-10)
    d, ratio = theorem1_defect(_result(lam_star), 1.0, greens)
    assert np.isnan(ratio)
