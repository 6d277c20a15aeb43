import numpy as np
import pytest

from errors import DimensionMismatchError, NumericOverflowError
from systems.dynamics import finite_difference_jacobians, linearize, step
from systems.kinematics import LINK_LENGTHS, forward_kinematics, link_point_derivatives
from systems.models import Car, LinearSystem, Manipulator, PointMass, Quadcopter


def _relative_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def _random_state(rng: np.random.Generator, model) -> tuple[np.ndarray, np.ndarray]:
    x = rng.uniform(-0.5, 0.5, model.state_dim)
    u = rng.uniform(-0.5, 0.5, model.control_dim)
    return x, u


class TestStep:

    def test_point_mass_constant_velocity_drift(self):
        model = PointMass(dt=0.1)
        np.testing.assert_allclose(step(model, np.array([0.0, 0.0, 1.0, 0.0]), np.zeros(2)),
                                   [0.1, 0.0, 1.0, 0.0], atol=1e-15)

    def test_point_mass_exact_discretization(self):
        h = 0.1
        f_x, f_u = linearize(PointMass(dt=h), np.zeros(4), np.zeros(2))
        eye = np.eye(2)
        np.testing.assert_array_equal(f_x, np.block([[eye, h * eye], [np.zeros((2, 2)), eye]]))
        np.testing.assert_allclose(f_u, np.vstack([0.5 * h * h * eye, h * eye]), atol=1e-15)

    def test_car_advances_by_speed_times_dt(self):
        x_next = step(Car(dt=0.05), np.array([0.0, 0.0, 0.0, 1.0, 0.0]), np.zeros(2))
        assert x_next[0] == pytest.approx(0.05, abs=1e-12)
        np.testing.assert_allclose(x_next[1:], [0.0, 0.0, 1.0, 0.0], atol=1e-15)

    def test_quadcopter_hovers_with_zero_control(self):
        x = np.zeros(12)
        x[2] = 1.0
        np.testing.assert_allclose(step(Quadcopter(dt=0.05), x, np.zeros(4)), x, atol=1e-12)

    def test_manipulator_constant_torque(self):
        dt = 0.05
        x_next = step(Manipulator(dt=dt), np.zeros(14), np.ones(7))
        np.testing.assert_allclose(x_next[:7], 0.5 * dt * dt, rtol=1e-12)
        np.testing.assert_allclose(x_next[7:], dt, rtol=1e-12)

    def test_wrong_state_shape(self):
        with pytest.raises(DimensionMismatchError):
            step(PointMass(dt=0.1), np.zeros(3), np.zeros(2))

    def test_wrong_control_shape(self):
        with pytest.raises(DimensionMismatchError):
            linearize(Car(dt=0.05), np.zeros(5), np.zeros(3))

    def test_overflow_is_reported(self):
        model = LinearSystem(dt=1.0, a=np.array([[1e200]]), b=np.array([[1.0]]))
        with pytest.raises(NumericOverflowError):
            step(model, np.array([1e200]), np.zeros(1), t=3)


class TestJacobians:

    @pytest.mark.parametrize("model", [Car(dt=0.05), Quadcopter(dt=0.05), Manipulator(dt=0.05),
                                       PointMass(dt=0.1)], ids=["car", "quadcopter", "manipulator", "pointmass"])
    def test_linearize_matches_finite_differences(self, model):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x, u = _random_state(rng, model)
            f_x, f_u = linearize(model, x, u)
            fd_x, fd_u = finite_difference_jacobians(model, x, u)
            assert _relative_error(f_x, fd_x) < 1e-5
            assert _relative_error(f_u, fd_u) < 1e-5

    def test_car_vector_field_jacobians_are_analytic(self):
        model = Car(dt=0.05)
        x = np.array([0.3, -0.2, 0.7, 1.3, 0.1])
        a, b = model.vector_field_jacobians(x, np.zeros(2))
        assert a[0, 2] == pytest.approx(-1.3 * np.sin(0.7))
        assert a[1, 3] == pytest.approx(np.sin(0.7))
        np.testing.assert_array_equal(b[[2, 4], [0, 1]], [1.0, 1.0])


def _homogeneous_fk(angles: np.ndarray) -> np.ndarray:
    """End effector from 4x4 transforms: each joint is Rz(yaw) Ry(pitch) then its link along x."""
    def rz(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])

    def ry(a):
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, 0, s, 0], [0, 1, 0, 0], [-s, 0, c, 0], [0, 0, 0, 1]])

    def tx(length):
        out = np.eye(4)
        out[0, 3] = length
        return out

    pitch = [angles[0], angles[2], angles[4], 0.0]
    yaw = [angles[1], angles[3], angles[5], angles[6]]
    transform = np.eye(4)
    for j, length in enumerate(LINK_LENGTHS):
        transform = transform @ rz(yaw[j]) @ ry(pitch[j]) @ tx(length)
    return transform[:3, 3]


class TestKinematics:

    def test_zero_configuration_is_fully_extended(self):
        np.testing.assert_allclose(forward_kinematics(np.zeros(7)), [sum(LINK_LENGTHS), 0.0, 0.0], atol=1e-15)

    def test_base_yaw_of_pi_mirrors_the_position(self):
        np.testing.assert_allclose(forward_kinematics(np.array([0.0, np.pi, 0, 0, 0, 0, 0])),
                                   [-sum(LINK_LENGTHS), 0.0, 0.0], atol=1e-12)
        rng = np.random.default_rng(5)
        for _ in range(20):
            angles = rng.uniform(-1.0, 1.0, 7)
            turned = angles.copy()
            turned[1] += np.pi
            expected = forward_kinematics(angles) * np.array([-1.0, -1.0, 1.0])
            np.testing.assert_allclose(forward_kinematics(turned), expected, atol=1e-12)

    def test_matches_homogeneous_transforms(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            angles = rng.uniform(-np.pi, np.pi, 7)
            np.testing.assert_allclose(forward_kinematics(angles), _homogeneous_fk(angles), atol=1e-12)

    def test_jacobian_and_hessian_match_finite_differences(self):
        rng = np.random.default_rng(11)
        eps = 1e-6
        for _ in range(20):
            angles = rng.uniform(-1.0, 1.0, 7)
            points = link_point_derivatives(angles)
            for j, (p, jac, hess) in enumerate(points):
                fd_jac = np.empty((3, 7))
                fd_hess = np.empty((3, 7, 7))
                for i in range(7):
                    d = np.zeros(7)
                    d[i] = eps
                    plus, minus = link_point_derivatives(angles + d), link_point_derivatives(angles - d)
                    fd_jac[:, i] = (plus[j][0] - minus[j][0]) / (2 * eps)
                    fd_hess[:, :, i] = (plus[j][1] - minus[j][1]) / (2 * eps)
                np.testing.assert_allclose(jac, fd_jac, atol=1e-8)
                np.testing.assert_allclose(hess, fd_hess, atol=1e-6)
            np.testing.assert_allclose(points[-1][0], forward_kinematics(angles), atol=1e-15)
