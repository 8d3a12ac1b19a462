import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblelab import torus as T
from conftest import band_limited

coord = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
small = st.floats(-0.2499, 0.2499, allow_nan=False)


def test_wrap_and_point_range():
    p = T.wrap((1.25, -0.25))
    assert p.coords == (0.25, 0.75)
    assert T.wrap((-1e-18, 0.0)).coords[0] == 0.0
    with pytest.raises(ValueError):
        T.TorusPoint((1.0, 0.0))
    with pytest.raises(ValueError):
        T.wrap((np.nan, 0.0))


@given(coord, coord, small, small)
def test_chart_inverts_wrap_near_base(a1, a2, d1, d2):
    a = np.array([a1, a2])
    p = np.array(T.wrap(a + [d1, d2]))
    x = T.chart(a, p)
    assert np.allclose(x, [d1, d2], atol=1e-12)
    back = np.mod(x + a - p + 0.5, 1.0) - 0.5
    assert np.allclose(back, 0.0, atol=1e-12)


def test_chart_tie_breaking():
    assert np.array_equal(T.chart((0.0, 0.0), (0.5, 0.5)), [0.5, 0.5])
    assert np.array_equal(T.chart((0.5, 0.0), (0.0, 0.0)), [0.5, 0.0])


def test_integration_by_parts(rng):
    n = 64
    f, g = band_limited(rng, n, 6), band_limited(rng, n, 6)
    lhs = T.integrate(np.sum(T.grad(f) * T.grad(g), axis=0))
    rhs = T.integrate(-T.laplacian(f) * g)
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))


def test_derivatives_annihilate_constants():
    c = np.full((32, 32, 3), 0.7)
    assert np.abs(T.grad(c)).max() == 0.0
    assert np.abs(T.laplacian(c)).max() == 0.0


def test_grad_matches_analytic():
    n = 64
    p = T.grid_points(n)
    f = np.sin(2 * np.pi * p[..., 0]) * np.cos(4 * np.pi * p[..., 1])
    g = T.grad(f)
    assert np.allclose(g[0], 2 * np.pi * np.cos(2 * np.pi * p[..., 0]) * np.cos(4 * np.pi * p[..., 1]), atol=1e-10)
    assert np.allclose(g[1], -4 * np.pi * np.sin(2 * np.pi * p[..., 0]) * np.sin(4 * np.pi * p[..., 1]), atol=1e-10)
    assert np.allclose(T.div(g), T.laplacian(f), atol=1e-9)


def test_integrate_exact_for_trig_polynomials():
    p = T.grid_points(32)
    f = 0.3 + np.cos(2 * np.pi * 5 * p[..., 0]) * np.sin(2 * np.pi * 3 * p[..., 1])
    assert abs(T.integrate(f) - 0.3) < 1e-15


def test_helmholtz_inverts(rng):
    f = band_limited(rng, 32, 5)
    u = T.helmholtz_solve(f, 2.0)
    assert np.allclose(-T.laplacian(u) + 2.0 * u, f, atol=1e-12)


def test_shift_whole_cells_is_roll(rng):
    f = band_limited(rng, 32, 8, 3)
    assert np.allclose(T.shift(f, (3 / 32, -5 / 32)), np.roll(f, (3, -5), axis=(0, 1)), atol=1e-13)


def test_resample_round_trip(rng):
    f = band_limited(rng, 32, 6, 3)
    assert np.allclose(T.resample(T.resample(f, 64), 32), f, atol=1e-13)


def test_grid_io(tmp_path, rng):
    f = rng.standard_normal((16, 16, 3))
    T.write_grid_binary(tmp_path / "f.bin", f)
    raw = (tmp_path / "f.bin").read_bytes()
    assert raw[:8] == b"ABLGRID1" and len(raw) == 16 + 16 * 16 * 3 * 8
    assert np.array_equal(T.read_grid_binary(tmp_path / "f.bin").values, f)
    T.write_grid_csv(tmp_path / "f.csv", f)
    assert np.array_equal(T.read_grid_csv(tmp_path / "f.csv").values, f)
    s = rng.standard_normal((8, 8))
    T.write_grid_binary(tmp_path / "s.bin", s)
    assert T.read_grid_binary(tmp_path / "s.bin").values.shape == (8, 8)


def test_grid_io_rejects_garbage(tmp_path):
    (tmp_path / "bad.bin").write_bytes(b"NOTAGRID" + bytes(8))
    with pytest.raises(ValueError):
        T.read_grid_binary(tmp_path / "bad.bin")
    with pytest.raises(ValueError):
        T.GridField(np.zeros((12, 12)))


@settings(max_examples=20, deadline=None)
@given(st.floats(5.0, 400.0))
def test_plane_quadrature_bubble_energy(lam):
    from bubblelab.bubble import inv_stereo_scaled

    q = T.plane_quadrature(lam)
    x = q.points
    dens = 8 * lam**2 / (1 + lam**2 * np.sum(x**2, axis=-1)) ** 2  # |grad pi_lam|^2
    assert abs(0.5 * q.integrate(dens) - 4 * np.pi) < 1e-6
    assert inv_stereo_scaled(lam, x).shape == (len(q), 3)


def test_torus_quadrature_area():
    q = T.torus_quadrature(50.0)
    assert abs(q.integrate(np.ones(len(q))) - 1.0) < 1e-13
    # a smooth periodic function integrates correctly in the chart
    x = q.points
    f = np.cos(2 * np.pi * x[:, 0]) ** 2 * (1 + np.sin(2 * np.pi * x[:, 1]))
    assert abs(q.integrate(f) - 0.5) < 1e-10
