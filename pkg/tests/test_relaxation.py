import numpy as np
import pytest

from src.catalog import lookup_problem
from src.models import BarrierParams
from src.problem import ProblemModel
from src.relaxation import (
    DENSE_Q_LIMIT,
    QOperator,
    RelaxPoint,
    assemble_Q,
    eval_C,
    eval_F,
    eval_gradF,
    eval_jacC,
    eval_zy,
    eval_zy_derivatives,
    eval_zy_mu_derivative,
    scaling_R,
)
from tests.conftest import random_point, random_spd


def _single_inequality(f=lambda x: 0.0, grad_f=lambda x: np.zeros(1)):
    """n = 1, c(x) = x."""
    return ProblemModel(
        name="ONE",
        n=1,
        m_e=0,
        m=1,
        f=f,
        grad_f=grad_f,
        c=lambda x: np.array([x[0]]),
        jac_c=lambda x: np.array([[1.0]]),
    )


class TestZy:
    @pytest.mark.parametrize("t, s, mu, tau, z, y", [
        (1.0, 0.1, 0.1, 1.0, 1.0, 0.1),
        (0.3, 0.3, 0.25, 1.0, 0.5, 0.5),
        (-1.0, 1.0, 0.1, 2.0, 0.06524758424985283, 3.065247584249853),
    ])
    def test_examples(self, t, s, mu, tau, z, y):
        zz, yy = eval_zy([t], [s], BarrierParams(mu, tau))
        np.testing.assert_allclose(zz, [z], rtol=1e-12)
        np.testing.assert_allclose(yy, [y], rtol=1e-12)

    def test_identities(self, rng):
        for _ in range(100):
            mu = 10.0 ** rng.uniform(-9, 0)
            tau = 10.0 ** rng.uniform(-9, 1)
            t = rng.uniform(-1e3, 1e3, 1_000)
            s = rng.uniform(-1e3, 1e3, 1_000)
            z, y = eval_zy(t, s, BarrierParams(mu, tau))
            assert np.all(z > 0.0) and np.all(y > 0.0)
            np.testing.assert_allclose(z * y, tau * mu, rtol=1e-12)
            scale = np.maximum(1.0, np.maximum(np.abs(t), tau * np.abs(s)))
            assert np.all(np.abs((z - y) - (t - tau * s)) <= 1e-12 * scale)

    def test_complementarity_gives_z_equal_t(self, rng):
        for _ in range(10_000):
            t = 10.0 ** rng.uniform(-3, 3)
            mu = 10.0 ** rng.uniform(-6, 0)
            tau = 10.0 ** rng.uniform(-3, 1)
            z, _ = eval_zy([t], [mu / t], BarrierParams(mu, tau))
            assert abs(z[0] - t) <= 1e-12 * max(1.0, t)

    def test_z_equal_t_gives_complementarity(self, rng):
        # samples near t s = mu, both signs of t: whenever z matches t, t and s are positive and t s = mu
        matched = 0
        for _ in range(10_000):
            t = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 10.0)
            mu = rng.uniform(1e-3, 1.0)
            tau = rng.uniform(0.1, 10.0)
            s = mu / t * (1.0 + rng.uniform(-1e-15, 1e-15))
            z, _ = eval_zy([t], [s], BarrierParams(mu, tau))
            if abs(z[0] - t) <= 1e-14:
                matched += 1
                assert t > 0.0 and s > 0.0
                assert abs(t * s - mu) <= 1e-10
        assert matched >= 1_000

    def test_z_differs_from_t_off_complementarity(self, rng):
        for _ in range(2_000):
            t = rng.uniform(0.1, 10.0)
            mu = rng.uniform(0.01, 1.0)
            tau = rng.uniform(0.1, 10.0)
            factor = rng.choice([rng.uniform(0.5, 0.99), rng.uniform(1.01, 2.0)])
            z, _ = eval_zy([t], [factor * mu / t], BarrierParams(mu, tau))
            assert abs(z[0] - t) > 1e-14
        z, _ = eval_zy([-0.5, 0.0], [1.0, 1.0], BarrierParams(0.1, 1.0))
        assert np.all(z > np.array([-0.5, 0.0]))

    def test_derivative_examples(self):
        bp = BarrierParams(0.25, 1.0)
        d = eval_zy_derivatives([0.5], [0.5], bp)
        np.testing.assert_allclose([d.dz_dt[0], d.dz_ds[0], d.dy_dt[0], d.dy_ds[0]], [0.5, -0.5, -0.5, 0.5])
        d = eval_zy_derivatives([1.0], [0.1], BarrierParams(0.1, 1.0))
        np.testing.assert_allclose([d.dz_dt[0], d.dy_ds[0]], [1.0 / 1.1, 0.1 / 1.1])

    def test_derivatives_against_differences(self, rng):
        h = 1e-6
        for _ in range(200):
            t, s = rng.uniform(-2.0, 2.0, 2)
            bp = BarrierParams(rng.uniform(0.05, 1.0), rng.uniform(0.5, 2.0))
            z, y = eval_zy([t], [s], bp)
            d = eval_zy_derivatives(z, y, bp)
            zp, yp = eval_zy([t + h], [s], bp)
            zm, ym = eval_zy([t - h], [s], bp)
            assert (zp - zm)[0] / (2 * h) == pytest.approx(d.dz_dt[0], abs=1e-6)
            assert (yp - ym)[0] / (2 * h) == pytest.approx(d.dy_dt[0], abs=1e-6)
            zp, yp = eval_zy([t], [s + h], bp)
            zm, ym = eval_zy([t], [s - h], bp)
            assert (zp - zm)[0] / (2 * h) == pytest.approx(d.dz_ds[0], abs=1e-6)
            assert (yp - ym)[0] / (2 * h) == pytest.approx(d.dy_ds[0], abs=1e-6)
            # dz/dt - dy/dt = 1, dz/ds - dy/ds = -tau
            assert d.dz_dt[0] - d.dy_dt[0] == pytest.approx(1.0, rel=1e-12)
            assert d.dz_ds[0] - d.dy_ds[0] == pytest.approx(-bp.tau, rel=1e-12)
            assert d.dz_dt[0] > 0 and d.dy_dt[0] < 0 and d.dz_ds[0] < 0 and d.dy_ds[0] > 0
            zp, yp = eval_zy([t], [s], BarrierParams(bp.mu + h, bp.tau))
            zm, ym = eval_zy([t], [s], BarrierParams(bp.mu - h, bp.tau))
            dmu = eval_zy_mu_derivative(z, y, bp)[0]
            assert (zp - zm)[0] / (2 * h) == pytest.approx(dmu, abs=1e-6)
            assert (yp - ym)[0] / (2 * h) == pytest.approx(dmu, abs=1e-6)


class TestRelaxationQuantities:
    def test_unconstrained_F_is_f(self):
        p = ProblemModel(name="Q", n=2, m_e=0, m=0, f=lambda x: x @ x, grad_f=lambda x: 2 * x)
        rp = RelaxPoint(p, [1.0, 2.0], [], [], BarrierParams(0.1, 1.0))
        assert eval_F(rp) == 5.0
        assert eval_C(rp).shape == (0,)
        np.testing.assert_array_equal(eval_gradF(rp), [2.0, 4.0])

    def test_zero_objective_with_unit_z(self):
        rp = RelaxPoint(_single_inequality(), [-1.0], [1.0], [0.1], BarrierParams(0.1, 1.0))
        assert rp.z[0] == pytest.approx(1.0, rel=1e-15)
        assert eval_F(rp) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(eval_C(rp), [0.0, 0.0], atol=1e-14)

    def test_tp1_start(self, tp1):
        bp = BarrierParams(0.1, 1.0)
        t = np.array([1.0, 1.0])
        s = np.array([0.095, 0.095])
        rp = RelaxPoint(tp1, tp1.standard_start, t, s, bp)
        z, _ = eval_zy(t, s, bp)
        assert eval_F(rp) == pytest.approx(-4.0 - 0.1 * np.sum(np.log(z)), rel=1e-12)
        C = eval_C(rp)
        np.testing.assert_allclose(C[:2], [14.0, -7.0])
        np.testing.assert_allclose(C[2:4], [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(C[4:], z - t, rtol=1e-12)
        assert rp.infeasibility() == pytest.approx(np.sqrt(245.0))

    def test_complementary_point_has_zero_gap(self):
        rp = RelaxPoint(_single_inequality(), [-2.0], [2.0], [0.05], BarrierParams(0.1, 1.0))
        np.testing.assert_allclose(rp.C, [0.0, 0.0], atol=1e-14)

    def test_gradient_example(self):
        rp = RelaxPoint(_single_inequality(), [0.0], [0.3], [0.3], BarrierParams(0.25, 1.0))
        np.testing.assert_allclose(eval_gradF(rp), [0.0, -0.25, 0.25], rtol=1e-12)

    def test_jacobian_example(self):
        # z = y when t = tau*s
        rp = RelaxPoint(_single_inequality(), [0.0], [1.0], [0.5], BarrierParams(0.3, 2.0))
        J = eval_jacC(rp)
        assert J.shape == (3, 2)
        np.testing.assert_allclose(J[:, 0], [1.0, 1.0, 0.0])
        np.testing.assert_allclose(J[:, 1], [0.0, -0.5, -1.0], rtol=1e-12)

    def test_params_override(self, tp1):
        rp = RelaxPoint(tp1, tp1.standard_start, [1.0, 1.0], [0.095, 0.095], BarrierParams(0.1, 1.0))
        other = BarrierParams(0.01, 0.5)
        assert eval_F(rp, other) == rp.with_params(other).F
        assert rp.with_params(rp.bp) is rp
        assert rp.with_params(other).xeval is rp.xeval

    def test_moved(self, tp1):
        rp = RelaxPoint(tp1, tp1.standard_start, [1.0, 1.0], [0.095, 0.095], BarrierParams(0.1, 1.0))
        d = np.arange(7, dtype=float)
        np.testing.assert_allclose(rp.moved(d, 0.5).v, rp.v + 0.5 * d)

    def test_shape_mismatch(self, tp1):
        with pytest.raises(ValueError):
            RelaxPoint(tp1, [0.0, 0.0], [1.0, 1.0], [1.0, 1.0], BarrierParams(0.1, 1.0))

    @pytest.mark.parametrize("name", ["TP1", "TP2", "TP3"])
    def test_derivatives_against_differences(self, name, rng):
        p = lookup_problem(name)
        h = 1e-6
        for _ in range(100):
            rp = random_point(rng, p)
            n, m = p.n, p.m
            v = rp.v
            grad = rp.gradF
            J = rp.jacC

            def at(w):
                return RelaxPoint(p, w[:n], w[n:n + m], w[n + m:], rp.bp)

            fd = np.empty(v.size)
            for i in range(v.size):
                e = np.zeros(v.size)
                e[i] = h
                fd[i] = (at(v + e).F - at(v - e).F) / (2 * h)
            assert np.max(np.abs(fd - grad) / np.maximum(1.0, np.abs(grad))) <= 1e-5

            d = rng.standard_normal(v.size)
            fd_dir = (at(v + h * d).C - at(v - h * d).C) / (2 * h)
            exact = J.T @ d
            assert np.max(np.abs(fd_dir - exact) / np.maximum(1.0, np.abs(exact))) <= 1e-5


class TestQ:
    def test_null_direction(self):
        Q = QOperator(np.eye(2), np.array([0.3, 0.7]), 2.0)
        d = np.concatenate([np.zeros(2), [2.0, 4.0], [1.0, 2.0]])
        assert Q.quad(d) == 0.0

    def test_example(self):
        rp = RelaxPoint(_single_inequality(), [0.0], [0.3], [0.3], BarrierParams(0.25, 1.0))
        Q = assemble_Q(np.eye(1), rp)
        np.testing.assert_allclose(Q.weights, [0.25])
        assert Q.quad(np.array([0.0, 1.0, 0.0])) == pytest.approx(0.25)

    def test_matches_dense(self, rng):
        for _ in range(50):
            n, m = rng.integers(1, 6), rng.integers(0, 5)
            Q = QOperator(random_spd(rng, n), rng.uniform(0.01, 3.0, m), rng.uniform(0.1, 2.0))
            dense = Q.to_dense()
            np.testing.assert_allclose(dense, dense.T)
            assert np.linalg.eigvalsh(dense)[0] >= -1e-10
            d = rng.standard_normal(n + 2 * m)
            assert Q.quad(d) == pytest.approx(d @ dense @ d, rel=1e-10, abs=1e-12)
            np.testing.assert_allclose(Q.matvec(d), dense @ d, rtol=1e-10, atol=1e-12)

    def test_dense_refused_when_large(self):
        Q = QOperator(np.eye(DENSE_Q_LIMIT), np.ones(1), 1.0)
        with pytest.raises(ValueError):
            Q.to_dense()


class TestR:
    def test_identity_when_tau_is_one(self):
        np.testing.assert_array_equal(scaling_R(BarrierParams(0.1, 1.0), 2, 3).to_dense(), np.eye(8))

    def test_tau_block(self, rng):
        R = scaling_R(BarrierParams(0.1, 0.5), 1, 2)
        np.testing.assert_array_equal(R.apply(np.ones(5)), [1.0, 1.0, 1.0, 0.5, 0.5])
        v = rng.standard_normal(5)
        np.testing.assert_allclose(R.apply(R.apply_inv(v)), v)
        np.testing.assert_allclose(R.apply_inv2(v), v / R.diag ** 2)
