import numpy as np
import pytest

from zerofpr.directions import (
    BFGS, ENGINES, LBFGS, Broyden, NullDirection, SymmetrizedBFGS, bfgs_push, broyden_push, lbfgs_apply,
    make_engine, powell_theta, symmetrized_bfgs_residual,
)
from zerofpr.fbe import prox_grad_step
from zerofpr.problem import Problem, compose_quadratic, zero_oracle


class TestBroyden:
    def test_secant_already_satisfied(self, rng):
        s = rng.standard_normal(4)
        np.testing.assert_allclose(broyden_push(np.eye(4), s, s), np.eye(4), atol=1e-15)

    def test_maps_y_to_s(self):
        e1 = np.eye(3)[0]
        H = broyden_push(np.eye(3), e1, 2 * e1)
        np.testing.assert_allclose(H @ (2 * e1), e1)

    def test_theta_branches(self):
        assert powell_theta(0.0, 1e-4) == pytest.approx(1 - 1e-4)
        assert powell_theta(2.0, 1e-4) == 1.0
        assert powell_theta(-5e-5, 1e-4) == pytest.approx((1 + 1e-4) / (1 + 5e-5))

    def test_secant_exact_with_theta_one(self, rng):
        H = np.eye(5) + 0.1 * rng.standard_normal((5, 5))
        s, y = rng.standard_normal(5), rng.standard_normal(5)
        Hn = broyden_push(H, s, y)
        if powell_theta(float((H @ y) @ s) / float(s @ s), 1e-4) == 1.0:
            np.testing.assert_allclose(Hn @ y, s, rtol=1e-12, atol=1e-12)

    def test_drifted_secant(self, rng):
        H = np.eye(3)
        s = np.array([1.0, 0.0, 0.0])
        y = np.array([0.0, 1.0, 0.0])  # <Hy, s> = 0
        theta = powell_theta(0.0, 1e-4)
        Hn = broyden_push(H, s, y)
        y_tilde = (1 - theta) * np.linalg.solve(H, s) + theta * y
        np.testing.assert_allclose(Hn @ y_tilde, s, atol=1e-12)
        assert np.linalg.matrix_rank(Hn) == 3

    def test_zero_s_dropped(self):
        eng = Broyden()
        eng.push(np.zeros(2), np.ones(2))
        np.testing.assert_array_equal(eng.apply(np.ones(2)), -np.ones(2))


class TestBFGS:
    def test_skip_on_nonpositive_curvature(self, rng):
        H = np.eye(3) * 2
        assert bfgs_push(H, np.ones(3), -np.ones(3)) is H

    def test_unit_curvature(self):
        e1 = np.eye(2)[0]
        np.testing.assert_allclose(bfgs_push(np.eye(2), e1, e1), np.eye(2))

    def test_secant_symmetry_and_definiteness(self, rng):
        for _ in range(20):
            M = rng.standard_normal((5, 5))
            H = M @ M.T + np.eye(5)
            s = rng.standard_normal(5)
            y = s + 0.3 * rng.standard_normal(5)
            if s @ y <= 0:
                continue
            Hn = bfgs_push(H, s, y)
            np.testing.assert_allclose(Hn @ y, s, rtol=1e-10, atol=1e-10)
            np.testing.assert_allclose(Hn, Hn.T, atol=1e-10)
            assert np.linalg.eigvalsh(Hn).min() > 0


class TestLBFGS:
    def test_empty_memory(self, rng):
        v = rng.standard_normal(4)
        np.testing.assert_array_equal(lbfgs_apply([], v), -v)

    def test_one_pair_matches_dense(self, backend, rng):
        s = rng.standard_normal(6)
        y = s + 0.2 * rng.standard_normal(6)
        v = rng.standard_normal(6)
        scaling = s @ y / (y @ y)
        dense = bfgs_push(scaling * np.eye(6), s, y)
        np.testing.assert_allclose(lbfgs_apply([(s, y, 1 / (s @ y))], v), -dense @ v, rtol=1e-10, atol=1e-12)

    def test_truncated_history_matches_dense(self, backend, rng):
        M = rng.standard_normal((8, 8))
        Q = M @ M.T + np.eye(8)
        eng = LBFGS(memory=3)
        pairs = []
        for _ in range(6):
            s = rng.standard_normal(8)
            eng.push(s, Q @ s)
            pairs.append((s, Q @ s))
        s_last, y_last = pairs[-1]
        H = (s_last @ y_last) / (y_last @ y_last) * np.eye(8)
        for s, y in pairs[-3:]:
            H = bfgs_push(H, s, y)
        v = rng.standard_normal(8)
        np.testing.assert_allclose(eng.apply(v), -H @ v, rtol=1e-9, atol=1e-12)

    def test_curvature_skip(self):
        eng = LBFGS()
        eng.push(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert len(eng.pairs) == 0

    def test_reset(self, rng):
        eng = LBFGS()
        s = rng.standard_normal(3)
        eng.push(s, 2 * s)
        eng.reset()
        v = rng.standard_normal(3)
        np.testing.assert_array_equal(eng.apply(v), -v)


class TestSymmetrized:
    def _step(self, Q, q, xb, gamma):
        p = Problem(compose_quadratic(Q, q), zero_oracle())
        return p, prox_grad_step(p, xb, gamma)

    def test_affine_unchanged(self, rng):
        p, st = self._step(np.zeros((3, 3)), rng.standard_normal(3), rng.standard_normal(3), 0.5)
        np.testing.assert_allclose(symmetrized_bfgs_residual(st, p), st.r)

    def test_zero_residual(self):
        p, st = self._step(np.eye(2), np.zeros(2), np.zeros(2), 0.5)
        np.testing.assert_array_equal(symmetrized_bfgs_residual(st, p), np.zeros(2))

    def test_quadratic_formula(self, rng):
        M = rng.standard_normal((4, 4))
        Q = M @ M.T
        gamma = 0.5 / np.linalg.norm(Q, 2)
        p, st = self._step(Q, rng.standard_normal(4), rng.standard_normal(4), gamma)
        np.testing.assert_allclose(symmetrized_bfgs_residual(st, p), (np.eye(4) - gamma * Q) @ st.r, rtol=1e-10)

    def test_one_extra_gradient(self, rng):
        p, st = self._step(np.eye(3), np.ones(3), rng.standard_normal(3), 0.3)
        before = p.counts().smooth
        symmetrized_bfgs_residual(st, p)
        assert p.counts().smooth == before + 1


def test_null_engine(rng):
    eng = NullDirection()
    eng.push(np.ones(2), np.ones(2))
    assert not np.any(eng.apply(rng.standard_normal(5)))


@pytest.mark.parametrize("name", sorted(ENGINES))
def test_reset_gives_identity(name, rng):
    eng = make_engine(name)
    v = rng.standard_normal(4)
    for _ in range(3):
        s = rng.standard_normal(4)
        eng.push(s, 3 * s)
    eng.reset()
    expected = np.zeros(4) if name == "null" else -v
    np.testing.assert_allclose(eng.apply(v), expected)


def test_unknown_engine():
    with pytest.raises(ValueError):
        make_engine("sr1")


def test_symmetrized_flag():
    assert SymmetrizedBFGS.symmetrized and not BFGS.symmetrized and not Broyden.symmetrized
