import math

import numpy as np
import pytest

from regulab import (
    CurveSystem,
    LLine,
    RegulusStrip,
    coplanarity_defect,
    dual_direction,
    dual_ray,
    frame_at,
    pi_t_basis,
    plank_for,
    printed_xi_prime,
    project_pi_t,
    projected_segment,
    slice_tube,
)
from regulab.duality import curve_normal, curve_point, curve_tangent_v1
from regulab.errors import DegenerateHeight
from regulab.rng import make_rng


def test_dual_direction():
    assert np.allclose(dual_direction(0.5), [-0.5, 0.25, 1.0])


def test_dual_ray_incidence():
    rng = make_rng(11)
    for _ in range(50):
        p = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1),
                      rng.uniform(0.05, 1.0)])
        base, direction = dual_ray(p)
        for s in (-1.0, 0.0, 0.4):
            a, b, c = base + s * direction
            t = p[2]
            assert abs(a + c * t - p[0]) < 1e-12
            assert abs(b + a * t - p[1]) < 1e-12


def test_dual_ray_degenerate_height():
    base, direction = dual_ray([0.3, 0.4, 0.0])
    assert np.allclose(base, [0.3, 0.4, 0.0])
    assert np.allclose(direction, [0.0, 0.0, 1.0])


def test_frame_parallelism():
    # v(t) = -sqrt(1 + t^2 + t^4) * xi'(t), exactly
    for t in np.linspace(0.0, 1.0, 101):
        fr = frame_at(t)
        scale = math.sqrt(1.0 + t * t + t ** 4)
        assert np.linalg.norm(fr.v + scale * fr.xi_prime) < 1e-9


def test_frame_xi_unit_and_orthogonal_derivative():
    for t in np.linspace(0.0, 1.0, 11):
        fr = frame_at(t)
        assert abs(np.linalg.norm(fr.xi) - 1.0) < 1e-12
        assert abs(float(fr.xi @ fr.xi_prime)) < 1e-12


def test_printed_xi_prime_is_a_fixture_not_the_derivative():
    # the transcribed tuple disagrees with the closed-form derivative
    fr = frame_at(0.0)
    assert np.linalg.norm(printed_xi_prime(0.0) - fr.xi_prime) > 0.5


def test_pi_t_basis_orthonormal():
    for t in (0.0, 0.3, 0.7, 1.0):
        b1, b2 = pi_t_basis(t)
        xi = frame_at(t).xi
        assert abs(np.linalg.norm(b1) - 1.0) < 1e-12
        assert abs(np.linalg.norm(b2) - 1.0) < 1e-12
        assert abs(float(b1 @ b2)) < 1e-12
        assert abs(float(b1 @ xi)) < 1e-12
        assert abs(float(b2 @ xi)) < 1e-12


def test_project_pi_t_kills_xi():
    t = 0.4
    xi = frame_at(t).xi
    assert np.linalg.norm(project_pi_t(xi, t)) < 1e-12


def test_plank_for_axes():
    plank = plank_for([0.2, 0.3, 0.4], 0.4, rho=0.1, delta=0.01)
    assert np.allclose(plank.center, [0.2, 0.3, 0.4])
    # axes orthonormal, extents (1, rho, delta)
    axes = np.stack(plank.axes)
    assert np.allclose(axes @ axes.T, np.eye(3), atol=1e-12)
    assert plank.half_extents == (1.0, 0.1, 0.01)


def test_slice_tube_geometry():
    delta, rho = 2 ** -6, 2 ** -3
    strip = RegulusStrip(LLine(0.5, 0.2, -0.1), delta, rho)
    st = slice_tube(strip, 0.5)
    assert np.allclose(st.center, [0.5 - 0.05, 0.2 + 0.25])
    assert abs(st.half_length - rho * math.sqrt(1.25)) < 1e-12
    assert np.allclose(st.direction, np.array([1.0, -0.5]) / math.sqrt(1.25))


def test_projected_segment_degenerate():
    with pytest.raises(DegenerateHeight):
        projected_segment([0.1, 0.2, 0.3], 0.0, 0.1)


def _quadratic_curve(seed):
    rng = make_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, size=(3, 3))
    coeffs[0, 0] = 2.5

    def gamma(t, c=coeffs):
        return c[:, 0] + c[:, 1] * t + c[:, 2] * t * t

    return CurveSystem(gamma=gamma)


def test_coplanarity_defect_vanishes():
    for seed in range(5):
        cs = _quadratic_curve(seed)
        for t in np.linspace(0.05, 0.95, 20):
            assert coplanarity_defect(cs, t) < 1e-9


def test_curve_normal_orthogonal_to_tangent():
    for seed in range(5):
        cs = _quadratic_curve(seed)
        for t in (0.2, 0.5, 0.8):
            n = curve_normal(cs, t)
            v1 = curve_tangent_v1(cs, t)
            assert abs(float(n[:2] @ v1[:2])) < 1e-9


def test_curve_point_height():
    cs = _quadratic_curve(3)
    p = curve_point(cs, [0.1, 0.2, 0.3], 0.6)
    assert p[2] == 0.6
