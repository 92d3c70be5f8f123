import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusecal import se3
from fusecal.errors import GimbalLockError
from fusecal.se3 import DecalRange, RigidTransform, SixDof


def scalar_zyx_matrix(roll, pitch, yaw):
    """Independent oracle: the three axis rotations hand-multiplied in Z*Y*X order."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = [[1, 0, 0], [0, cr, -sr], [0, sr, cr]]
    ry = [[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]]
    rz = [[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]]

    def matmul(a, b):
        return [
            [sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)]
            for i in range(3)
        ]

    return np.array(matmul(matmul(rz, ry), rx))


small_angle = st.floats(min_value=-0.5, max_value=0.5)
small_trans = st.floats(min_value=-2.0, max_value=2.0)


@st.composite
def small_sixdof(draw):
    return SixDof(
        draw(small_angle), draw(small_angle), draw(small_angle),
        draw(small_trans), draw(small_trans), draw(small_trans),
    )


class TestFromSixdof:
    def test_identity(self):
        t = se3.from_sixdof(SixDof(0, 0, 0, 0, 0, 0))
        assert np.allclose(t.rotation, np.eye(3))
        assert np.allclose(t.translation, 0)

    def test_quarter_turn_z(self):
        t = se3.from_sixdof(SixDof(0, 0, math.pi / 2, 0, 0, 0))
        expected = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
        assert np.abs(t.rotation - expected).max() < 1e-12
        assert np.allclose(t.translation, 0)

    def test_against_scalar_oracle(self):
        p = SixDof(0.01, -0.02, 0.03, 0.1, 0.0, -0.05)
        t = se3.from_sixdof(p)
        assert np.abs(t.rotation - scalar_zyx_matrix(0.01, -0.02, 0.03)).max() < 1e-12
        assert np.allclose(t.translation, [0.1, 0.0, -0.05])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            se3.from_sixdof(SixDof(math.nan, 0, 0, 0, 0, 0))
        with pytest.raises(ValueError):
            se3.from_sixdof(SixDof(0, 0, 0, math.inf, 0, 0))


class TestToSixdof:
    def test_identity(self):
        p = se3.to_sixdof(RigidTransform.identity())
        assert p.as_array().tolist() == [0, 0, 0, 0, 0, 0]

    @given(small_sixdof())
    def test_round_trip(self, p):
        q = se3.to_sixdof(se3.from_sixdof(p))
        assert np.abs(q.as_array() - p.as_array()).max() < 1e-9

    def test_round_trip_sweep(self):
        rng = np.random.Generator(np.random.PCG64(11))
        worst = 0.0
        for _ in range(1000):
            p = SixDof(*rng.uniform(-0.5, 0.5, 3), *rng.uniform(-5, 5, 3))
            t = se3.from_sixdof(p)
            q = se3.to_sixdof(t)
            t2 = se3.from_sixdof(q)
            worst = max(worst, np.abs(t2.rotation - t.rotation).max())
            worst = max(worst, np.abs(q.as_array() - p.as_array()).max())
        assert worst < 1e-9

    def test_gimbal_lock_raises(self):
        t = se3.from_sixdof(SixDof(0, math.pi / 2, 0, 0, 0, 0))
        with pytest.raises(GimbalLockError):
            se3.to_sixdof(t)


class TestCompose:
    def test_identity_neutral(self):
        t = se3.from_sixdof(SixDof(0.1, -0.2, 0.3, 1, 2, 3))
        out = se3.compose(RigidTransform.identity(), t)
        assert np.allclose(out.matrix(), t.matrix())

    def test_decal_recovery_identity(self):
        t_gt = se3.from_sixdof(SixDof(0.02, 0.01, -0.03, 0.5, -0.2, 1.0))
        t_decal = se3.from_sixdof(SixDof(0.01, -0.005, 0.008, 0.05, -0.02, 0.03))
        t_init = se3.compose(t_decal, t_gt)
        recovered = se3.compose(se3.inverse(t_decal), t_init)
        assert np.abs(recovered.matrix() - t_gt.matrix()).max() < 1e-9

    def test_hand_evaluated_point(self):
        # translate(1,0,0) * rotate_z(pi/2) applied to (1,0,0): rotate to (0,1,0), then shift x.
        t = se3.compose(
            se3.from_sixdof(SixDof(0, 0, 0, 1, 0, 0)),
            se3.from_sixdof(SixDof(0, 0, math.pi / 2, 0, 0, 0)),
        )
        out = se3.apply(t, np.array([[1.0, 0.0, 0.0]]))
        assert np.abs(out[0] - np.array([1.0, 1.0, 0.0])).max() < 1e-12

    @given(small_sixdof(), small_sixdof(), small_sixdof())
    @settings(max_examples=50)
    def test_associativity(self, pa, pb, pc):
        a, b, c = (se3.from_sixdof(p) for p in (pa, pb, pc))
        left = se3.compose(se3.compose(a, b), c)
        right = se3.compose(a, se3.compose(b, c))
        assert np.abs(left.matrix() - right.matrix()).max() < 1e-9


class TestInverse:
    def test_identity(self):
        t = se3.inverse(RigidTransform.identity())
        assert np.allclose(t.matrix(), np.eye(4))

    def test_pure_translation(self):
        t = se3.inverse(se3.from_sixdof(SixDof(0, 0, 0, 1, 2, 3)))
        assert np.allclose(t.rotation, np.eye(3))
        assert np.allclose(t.translation, [-1, -2, -3])

    def test_double_inverse_sweep(self):
        rng = np.random.Generator(np.random.PCG64(3))
        for _ in range(100):
            p = SixDof(*rng.uniform(-0.5, 0.5, 3), *rng.uniform(-5, 5, 3))
            t = se3.from_sixdof(p)
            back = se3.inverse(se3.inverse(t))
            assert np.abs(back.matrix() - t.matrix()).max() < 1e-12

    def test_left_inverse(self):
        t = se3.from_sixdof(SixDof(0.3, -0.2, 0.1, 4, -5, 6))
        prod = se3.compose(se3.inverse(t), t)
        assert np.abs(prod.matrix() - np.eye(4)).max() < 1e-9


class TestApply:
    def test_identity_keeps_cloud(self):
        cloud = np.array([[1, 2, 3, 0.5], [4, 5, 6, 0.9]], dtype=float)
        out = se3.apply(RigidTransform.identity(), cloud)
        assert np.array_equal(out, cloud)

    def test_translation(self):
        out = se3.apply(
            se3.from_sixdof(SixDof(0, 0, 0, 0, 0, 1)), np.zeros((1, 3))
        )
        assert np.allclose(out, [[0, 0, 1]])

    def test_rotation_preserves_order(self):
        t = se3.from_sixdof(SixDof(0, 0, math.pi / 2, 0, 0, 0))
        cloud = np.array([[1, 0, 0], [0, 1, 0]], dtype=float)
        out = se3.apply(t, cloud)
        assert np.abs(out - np.array([[0, 1, 0], [-1, 0, 0]])).max() < 1e-12

    def test_intensity_passthrough_exact(self):
        rng = np.random.Generator(np.random.PCG64(5))
        cloud = rng.uniform(-10, 10, size=(50, 4))
        t = se3.from_sixdof(SixDof(0.1, 0.2, -0.1, 1, 2, 3))
        out = se3.apply(t, cloud)
        assert np.array_equal(out[:, 3], cloud[:, 3])
        assert out.shape == cloud.shape


class TestSampleDecalibration:
    def test_paper_range_bounds(self):
        r = DecalRange(max_rot=math.radians(1.0), max_trans=0.10)
        for seed in range(200):
            p = se3.sample_decalibration(r, seed)
            assert np.abs(p.rotation_vector()).max() <= math.radians(1.0)
            assert np.abs(p.translation_vector()).max() <= 0.10
    def test_zero_range(self):
        p = se3.sample_decalibration(DecalRange(0.0, 0.0), 99)
        assert p.as_array().tolist() == [0, 0, 0, 0, 0, 0]

    def test_deterministic(self):
        r = DecalRange(0.02, 0.1)
        a = se3.sample_decalibration(r, 1234)
        b = se3.sample_decalibration(r, 1234)
        assert a.as_array().tolist() == b.as_array().tolist()

    def test_law_of_large_numbers(self):
        r = DecalRange(max_rot=math.radians(1.0), max_trans=0.10)
        n = 100_000
        draws = np.array([se3.sample_decalibration(r, s).as_array() for s in range(n)])
        bounds = np.array([r.max_rot] * 3 + [r.max_trans] * 3)
        # uniform(-b, b): mean 0 with sigma = b/sqrt(3)
        tol = 3 * bounds / math.sqrt(3) / math.sqrt(n)
        assert np.all(np.abs(draws.mean(axis=0)) < tol)
        assert np.all(draws.max(axis=0) > 0.99 * bounds)
        assert np.all(draws.min(axis=0) < -0.99 * bounds)
        assert np.all(draws.max(axis=0) <= bounds)
        assert np.all(draws.min(axis=0) >= -bounds)


class TestRecoverGt:
    def test_exact_cancellation(self):
        t_gt = se3.from_sixdof(SixDof(0.1, -0.05, 0.2, 1, -2, 0.5))
        t_decal = se3.from_sixdof(SixDof(0.01, 0.005, -0.002, 0.05, 0.01, -0.03))
        t_init = se3.compose(t_decal, t_gt)
        out = se3.recover_gt(t_decal, t_init)
        assert np.abs(out.matrix() - t_gt.matrix()).max() < 1e-9

    def test_identity_pred(self):
        t_init = se3.from_sixdof(SixDof(0.1, 0.2, 0.3, 1, 2, 3))
        out = se3.recover_gt(RigidTransform.identity(), t_init)
        assert np.allclose(out.matrix(), t_init.matrix())

    def test_perturbed_prediction_residual(self):
        # Predicting T_decal perturbed by delta leaves exactly
        # inverse(delta * T_decal) * T_decal * T_gt = inverse-by-matrix residual.
        rng = np.random.Generator(np.random.PCG64(7))
        for _ in range(20):
            t_gt = se3.from_sixdof(SixDof(*rng.uniform(-0.3, 0.3, 3), *rng.uniform(-2, 2, 3)))
            t_decal = se3.from_sixdof(SixDof(*rng.uniform(-0.02, 0.02, 3), *rng.uniform(-0.1, 0.1, 3)))
            delta = se3.from_sixdof(SixDof(*rng.uniform(-0.01, 0.01, 3), *rng.uniform(-0.05, 0.05, 3)))
            t_pred = se3.compose(delta, t_decal)
            t_init = se3.compose(t_decal, t_gt)
            out = se3.recover_gt(t_pred, t_init)
            # independent matrix-algebra oracle via 4x4 homogeneous products
            oracle = np.linalg.inv(t_pred.matrix()) @ t_init.matrix()
            assert np.abs(out.matrix() - oracle).max() < 1e-9


class TestErrorMetrics:
    def test_zero_for_equal(self):
        t = se3.from_sixdof(SixDof(0.1, 0.2, 0.3, 1, 2, 3))
        rot, trans = se3.error_metrics(t, t)
        assert np.allclose(rot, 0) and np.allclose(trans, 0)

    def test_pure_yaw_offset(self):
        t_a = se3.from_sixdof(SixDof(0.05, -0.02, 0.1, 1, 2, 3))
        t_b = se3.compose(t_a, se3.from_sixdof(SixDof(0, 0, math.radians(1.0), 0, 0, 0)))
        rot, trans = se3.error_metrics(t_a, t_b)
        assert np.abs(rot - np.array([0, 0, 1.0])).max() < 1e-9
        assert np.abs(trans).max() < 1e-9

    def test_matches_independent_decomposition(self):
        t_a = se3.from_sixdof(SixDof(0.01, 0.02, -0.01, 0.3, -0.2, 0.1))
        t_b = se3.from_sixdof(SixDof(0.015, 0.018, -0.013, 0.32, -0.21, 0.08))
        rot, trans = se3.error_metrics(t_a, t_b)
        # scalar recomputation from the residual matrix
        m = np.linalg.inv(t_a.matrix()) @ t_b.matrix()
        pitch = math.asin(-m[2, 0])
        roll = math.atan2(m[2, 1], m[2, 2])
        yaw = math.atan2(m[1, 0], m[0, 0])
        assert np.abs(rot - np.degrees(np.abs([roll, pitch, yaw]))).max() < 1e-9
        assert np.abs(trans - 100 * np.abs(m[:3, 3])).max() < 1e-9


class TestInvariants:
    def test_determinant_stable_over_compose_chains(self):
        rng = np.random.Generator(np.random.PCG64(21))
        t = RigidTransform.identity()
        for i in range(100):
            p = SixDof(*rng.uniform(-0.4, 0.4, 3), *rng.uniform(-1, 1, 3))
            step = se3.from_sixdof(p)
            t = se3.compose(t, step) if i % 3 else se3.compose(se3.inverse(step), t)
            assert abs(np.linalg.det(t.rotation) - 1.0) < 1e-9
            assert np.abs(t.rotation.T @ t.rotation - np.eye(3)).max() < 1e-9

    @given(small_sixdof(), st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=50)
    def test_training_identity(self, p_gt, seed):
        # The identity the regression task is built on: recovering with the
        # exact sampled de-calibration reproduces T_gt.
        t_gt = se3.from_sixdof(p_gt)
        sample = se3.sample_decalibration(DecalRange(math.radians(1.0), 0.1), seed)
        t_decal = se3.from_sixdof(sample)
        recovered = se3.recover_gt(t_decal, se3.compose(t_decal, t_gt))
        assert np.abs(recovered.matrix() - t_gt.matrix()).max() < 1e-9
