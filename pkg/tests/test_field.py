import numpy as np
import pytest

import rupture_lab as rl
from rupture_lab.field import field_from_json, field_to_json
from rupture_lab.profiles import radial_exact

from oracles import radial_ball_integral


def test_grid_validation():
    with pytest.raises(rl.FieldError):
        rl.interval_grid(0.0, 1.0, 2)
    with pytest.raises(rl.FieldError):
        rl.Grid(2, (4, 4), -0.1, (0.0, 0.0), np.zeros((4, 4), dtype=bool), "rectangle")
    bad_mask = np.ones((4, 4), dtype=bool)  # interior on the array edge
    with pytest.raises(rl.FieldError):
        rl.Grid(2, (4, 4), 0.1, (0.0, 0.0), bad_mask, "rectangle")


def test_disk_mask_rule():
    g = rl.disk_grid((0.0, 0.0), 1.0, 1.0 / 64)
    r = g.radii_from((0.0, 0.0))
    assert np.array_equal(g.interior_mask, r < 1.0 - g.h / 2)


def test_annulus_mask_rule():
    g = rl.annulus_grid((0.0, 0.0), 0.2, 1.0, 1.0 / 64)
    r = g.radii_from((0.0, 0.0))
    assert np.array_equal(g.interior_mask, (r < 1.0 - g.h / 2) & (r > 0.2 + g.h / 2))


def test_scalar_field_validation():
    g = rl.rectangle_grid((0, 0), (1, 1), 0.25)
    with pytest.raises(rl.FieldError):
        rl.ScalarField(g, np.full(g.shape, np.nan), 3.0)
    with pytest.raises(rl.FieldError):
        rl.ScalarField(g, -np.ones(g.shape), 3.0, nonneg=True)
    with pytest.raises(rl.FieldError):
        rl.ScalarField(g, np.ones(g.shape), 0.5)


def test_gradient_exact_on_affine_and_quadratic():
    g = rl.rectangle_grid((-1, -1), (1, 1), 1 / 32)
    X, Y = g.meshgrid()
    lin = rl.ScalarField(g, X, 3.0)
    grad = rl.gradient(lin)
    assert np.allclose(grad.components[0], 1.0, atol=1e-13)
    assert np.allclose(grad.components[1], 0.0, atol=1e-13)
    quad = rl.ScalarField(g, X ** 2 + Y ** 2, 3.0)
    grad = rl.gradient(quad)
    assert np.allclose(grad.components[0], 2 * X, atol=1e-12)
    assert np.allclose(grad.components[1], 2 * Y, atol=1e-12)


def test_gradient_second_order_on_sqrt_profile():
    ex = radial_exact(2, 3)
    errs = {}
    for n in (128, 256):
        g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / n)
        X, Y = g.meshgrid()
        u = ex.sample(g)
        grad = rl.gradient(u)
        s = np.maximum(g.radii_from((0, 0)), 1e-12)
        gx = ex.radial_slope(s) * X / s
        gy = ex.radial_slope(s) * Y / s
        err = np.maximum(np.abs(grad.components[0] - gx), np.abs(grad.components[1] - gy))
        errs[n] = float(np.max(err[g.interior_mask]))
    assert errs[256] < 2e-4  # C h^2 with C ~ 10 near the inner circle
    assert 3.0 < errs[128] / errs[256] < 5.0


def test_laplacian_exact_on_polynomials():
    g = rl.rectangle_grid((-1, -1), (1, 1), 1 / 32)
    X, Y = g.meshgrid()
    quad = rl.ScalarField(g, X ** 2 + Y ** 2, 3.0)
    lap = rl.laplacian(quad)
    assert np.allclose(lap.values[1:-1, 1:-1], 4.0, atol=1e-11)
    lin = rl.laplacian(rl.ScalarField(g, X, 3.0))
    assert np.allclose(lin.values[1:-1, 1:-1], 0.0, atol=1e-12)


def test_laplacian_matches_negative_power_on_exact_solution():
    ex = radial_exact(2, 3)
    errs = {}
    for n in (128, 256):
        g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / n)
        u = ex.sample(g)
        lap = rl.laplacian(u)
        err = np.abs(lap.values - np.maximum(u.values, 1e-9) ** -3.0)[g.interior_mask]
        errs[n] = float(np.max(err))
    assert 3.0 < errs[128] / errs[256] < 5.0


def test_ball_integral_area():
    g = rl.rectangle_grid((-1, -1), (1, 1), 1 / 128)
    one = rl.ScalarField(g, np.ones(g.shape), 3.0)
    val = rl.ball_integral(one, (0, 0), 0.5)
    assert abs(val - np.pi * 0.25) <= 2 * g.h


def test_ball_integral_singular_power(disk256, radial256):
    # oracle: 1D radial quadrature of u^-3; equals sqrt(2) pi sqrt(r)
    inv3 = rl.ScalarField(disk256, np.maximum(radial256.values, 1e-12) ** -3.0, 3.0)
    for r in (0.25, 0.5):
        oracle = radial_ball_integral(lambda s: (np.sqrt(2 * s)) ** -3.0, r)
        assert oracle == pytest.approx(np.sqrt(2) * np.pi * np.sqrt(r), rel=1e-8)
        # plain node quadrature with the inner 3h core excluded stays within 2%
        val = rl.ball_integral(inv3, (0, 0), r, inner=3 * disk256.h)
        core = radial_ball_integral(lambda s: (np.sqrt(2 * s)) ** -3.0, 3 * disk256.h)
        assert val + core == pytest.approx(oracle, rel=0.02)


def test_ball_integral_of_u(disk256, radial256):
    oracle = radial_ball_integral(lambda s: np.sqrt(2 * s), 1.0 - 2 * disk256.h)
    val = rl.ball_integral(radial256, (0, 0), 1.0 - 2 * disk256.h)
    assert val == pytest.approx(oracle, rel=0.02)
    assert radial_ball_integral(lambda s: np.sqrt(2 * s), 1.0) == pytest.approx(
        4 * np.sqrt(2) * np.pi / 5, rel=1e-8)


def test_ball_integral_rejects_escaping_ball():
    g = rl.rectangle_grid((-1, -1), (1, 1), 1 / 16)
    one = rl.ScalarField(g, np.ones(g.shape), 3.0)
    with pytest.raises(rl.FieldError, match="hull"):
        rl.ball_integral(one, (0.8, 0.0), 0.5)


def test_sphere_integral_examples():
    g = rl.rectangle_grid((-1.25, -1.25), (1.25, 1.25), 1 / 128)
    X, Y = g.meshgrid()
    one = rl.ScalarField(g, np.ones(g.shape), 3.0)
    assert rl.sphere_integral(one, (0, 0), 0.5) == pytest.approx(np.pi, rel=0.01)
    x1sq = rl.ScalarField(g, X ** 2, 3.0)
    assert rl.sphere_integral(x1sq, (0, 0), 1.0) == pytest.approx(np.pi, rel=0.01)
    usq = rl.ScalarField(g, 2 * np.sqrt(X ** 2 + Y ** 2), 3.0)
    for r in (0.3, 0.8):
        assert rl.sphere_integral(usq, (0, 0), r) == pytest.approx(4 * np.pi * r ** 2,
                                                                   rel=0.01)


def test_radial_derivative_examples():
    g = rl.rectangle_grid((-1.25, -1.25), (1.25, 1.25), 1 / 128)
    X, Y = g.meshgrid()
    sq = rl.ScalarField(g, X ** 2 + Y ** 2, 3.0)
    pts, dudr = rl.radial_derivative(sq, (0, 0), 0.6)
    assert np.allclose(dudr, 1.2, atol=5e-4)
    ex = radial_exact(2, 3)
    u = rl.ScalarField(g, ex(X, Y), 3.0)
    _, dudr = rl.radial_derivative(u, (0, 0), 0.5)
    assert np.allclose(dudr, np.sqrt(2) / 2 / np.sqrt(0.5), rtol=2e-3)
    lin = rl.ScalarField(g, X, 3.0)
    pts, dudr = rl.radial_derivative(lin, (0, 0), 1.0)
    cos = (pts[:, 0]) / 1.0
    assert np.allclose(dudr, cos, atol=5e-4)


def test_shell_identity():
    g = rl.rectangle_grid((-1, -1), (1, 1), 1 / 128)
    X, Y = g.meshgrid()
    f = rl.ScalarField(g, 1.0 + X ** 2 + 0.5 * Y, 3.0)
    delta = 0.05
    for r in (0.4, 0.7):
        shell = rl.ball_integral(f, (0, 0), r) - rl.ball_integral(f, (0, 0), r - delta)
        flux = delta * rl.sphere_integral(f, (0, 0), r)
        assert abs(shell - flux) <= 6 * delta * (delta + g.h)


def test_ball_volume_convergence_order():
    errs = {}
    for n in (64, 128, 256):
        g = rl.rectangle_grid((-1, -1), (1, 1), 1.0 / n)
        one = rl.ScalarField(g, np.ones(g.shape), 3.0)
        errs[n] = abs(rl.ball_integral(one, (0, 0), 0.55) / 0.55 ** 2 - np.pi)
    assert errs[256] < errs[64]
    order = np.log2(errs[64] / errs[256]) / 2
    assert order >= 0.9


def test_interval_ball_and_sphere():
    g = rl.interval_grid(-1.0, 1.0, 257)
    x = g.meshgrid()[0]
    f = rl.ScalarField(g, 1.0 + 0 * x, 3.0)
    assert rl.ball_integral(f, (0.0,), 0.5) == pytest.approx(1.0, abs=2 * g.h)
    sq = rl.ScalarField(g, x ** 2, 3.0)
    assert rl.sphere_integral(sq, (0.0,), 0.5) == pytest.approx(0.5, abs=1e-10)
    _, dudr = rl.radial_derivative(sq, (0.0,), 0.5)
    assert np.allclose(dudr, 1.0, atol=1e-8)


def test_serialization_roundtrip_bit_exact(radial256):
    text = field_to_json(radial256)
    back = field_from_json(text)
    assert np.array_equal(back.values, radial256.values)
    assert back.grid.shape == radial256.grid.shape
    assert back.grid.h == radial256.grid.h
    assert back.p == radial256.p
    assert np.array_equal(back.grid.interior_mask, radial256.grid.interior_mask)
    assert field_to_json(back) == text


def test_serialization_rejects_bad_documents():
    with pytest.raises(rl.FieldError, match="missing key 'shape'"):
        field_from_json('{"format": "rupture-lab-field/1", "dim": 1}')
    with pytest.raises(rl.FieldError, match="unsupported field format"):
        field_from_json('{"format": "nope", "dim": 1, "shape": [3], "h": 1.0,'
                        ' "origin": [0], "domain_kind": "interval", "p": 2.0,'
                        ' "values": [1,1,1], "interior_mask": [0,1,0]}')


def test_save_load_roundtrip(tmp_path, radial256):
    path = tmp_path / "field.json"
    rl.save_field(radial256, path)
    back = rl.load_field(path)
    assert np.array_equal(back.values, radial256.values)


def test_sample_linear_outside_hull():
    g = rl.rectangle_grid((0, 0), (1, 1), 0.25)
    f = rl.ScalarField(g, np.ones(g.shape), 3.0)
    with pytest.raises(rl.FieldError):
        rl.sample_linear(f, np.array([[1.5, 0.5]]))
