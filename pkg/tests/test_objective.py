import numpy as np
import pytest

from csdesign.objective import (
    ObjectiveSpec,
    gradient_check,
    objective_gradient,
    objective_value,
    value_and_gradient,
)


def elementwise_objective(phi, psi, g, lam, sre=None):
    """Independent oracle: accumulate the squared terms one entry at a time."""
    d = phi @ psi
    gram = d.T @ d
    total = 0.0
    l = psi.shape[1]
    for i in range(l):
        for j in range(l):
            total += (g[i, j] - gram[i, j]) ** 2
    if sre is None:
        for v in phi.ravel():
            total += lam * v * v
    else:
        proj = phi @ sre
        for v in proj.ravel():
            total += lam * v * v
    return total


def random_instance(rng, m=3, n=5, l=6, lam=0.7, baseline=False, p=12):
    psi = rng.standard_normal((n, l))
    phi = rng.standard_normal((m, n))
    g = rng.standard_normal((l, l))
    g = (g + g.T) / 2.0
    sre = rng.standard_normal((n, p)) if baseline else None
    return phi, ObjectiveSpec(psi=psi, gram_target=g, lam=lam, sre=sre)


class TestObjectiveValue:
    def test_zero_phi_identity_target(self):
        psi = np.ones((4, 6))
        spec = ObjectiveSpec(psi=psi, lam=0.3)
        assert objective_value(np.zeros((2, 4)), spec) == pytest.approx(6.0)

    def test_perfect_gram_match_zero(self):
        # orthonormal square psi, phi with phi.T @ phi = I, target = psi.T psi
        rng = np.random.default_rng(1)
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        psi = q
        phi, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        spec = ObjectiveSpec(psi=psi, gram_target=psi.T @ psi, lam=0.0)
        assert objective_value(phi, spec) == pytest.approx(0.0, abs=1e-24)

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(2)
        phi, spec = random_instance(rng)
        expected = elementwise_objective(phi, spec.psi, spec.gram_target, spec.lam)
        assert objective_value(phi, spec) == pytest.approx(expected, rel=1e-12)

    def test_baseline_matches_elementwise_oracle(self):
        rng = np.random.default_rng(3)
        phi, spec = random_instance(rng, baseline=True)
        expected = elementwise_objective(
            phi, spec.psi, spec.gram_target, spec.lam, sre=spec.sre
        )
        assert objective_value(phi, spec) == pytest.approx(expected, rel=1e-12)

    def test_nonnegative_and_regularizer_floor(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            phi, spec = random_instance(rng, lam=float(rng.uniform(0, 2)))
            assert objective_value(phi, spec) >= 0.0

    def test_pure_regularizer_when_gram_term_vanishes(self):
        # target set to the achieved Gram: only lam * ||phi||^2 remains
        rng = np.random.default_rng(40)
        psi = rng.standard_normal((5, 7))
        phi = rng.standard_normal((3, 5))
        d = phi @ psi
        spec = ObjectiveSpec(psi=psi, gram_target=d.T @ d, lam=0.8)
        assert objective_value(phi, spec) == pytest.approx(
            0.8 * float(np.sum(phi**2)), rel=1e-12
        )

    def test_dimension_mismatch(self):
        spec = ObjectiveSpec(psi=np.eye(4), lam=0.1)
        with pytest.raises(ValueError):
            objective_value(np.zeros((2, 5)), spec)


class TestObjectiveSpecValidation:
    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            ObjectiveSpec(psi=np.eye(3), lam=-0.1)

    def test_sre_row_mismatch(self):
        with pytest.raises(ValueError):
            ObjectiveSpec(psi=np.eye(3), lam=0.1, sre=np.zeros((4, 7)))

    def test_gram_target_shape(self):
        with pytest.raises(ValueError):
            ObjectiveSpec(psi=np.eye(3), gram_target=np.eye(4), lam=0.0)

    def test_sre_outer_cached(self):
        rng = np.random.default_rng(5)
        e = rng.standard_normal((3, 9))
        spec = ObjectiveSpec(psi=np.eye(3), lam=0.2, sre=e)
        np.testing.assert_allclose(spec.sre_outer, e @ e.T, rtol=1e-14)


class TestGradient:
    def test_zero_phi_zero_gradient(self):
        rng = np.random.default_rng(6)
        _, spec = random_instance(rng)
        np.testing.assert_array_equal(
            objective_gradient(np.zeros((3, 5)), spec), np.zeros((3, 5))
        )

    def test_stationary_when_gram_matches(self):
        # lam = 0 and target equal to the achieved Gram: gradient cancels
        rng = np.random.default_rng(7)
        psi = rng.standard_normal((5, 6))
        phi = rng.standard_normal((3, 5))
        d = phi @ psi
        spec = ObjectiveSpec(psi=psi, gram_target=d.T @ d, lam=0.0)
        np.testing.assert_allclose(
            objective_gradient(phi, spec), np.zeros((3, 5)), atol=1e-12
        )

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        phi, spec = random_instance(rng, m=4, n=8, l=10)
        report = gradient_check(phi, spec, step=1e-6, tol=1e-5)
        assert report.passed, report

    def test_baseline_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        phi, spec = random_instance(rng, m=4, n=8, l=10, baseline=True, p=50)
        report = gradient_check(phi, spec, step=1e-6, tol=1e-5)
        assert report.passed, report

    def test_corrupted_gradient_fails(self):
        rng = np.random.default_rng(10)
        phi, spec = random_instance(rng)
        bad = objective_gradient(phi, spec)
        bad[0, 0] += 1e-2
        report = gradient_check(phi, spec, gradient=bad)
        assert not report.passed

    def test_value_and_gradient_agree_with_parts(self):
        rng = np.random.default_rng(11)
        phi, spec = random_instance(rng, baseline=True)
        f, g = value_and_gradient(phi, spec)
        assert f == pytest.approx(objective_value(phi, spec), rel=1e-14)
        np.testing.assert_allclose(g, objective_gradient(phi, spec), rtol=1e-14)


class TestDirectionalDerivative:
    def test_second_order_convergence(self):
        rng = np.random.default_rng(12)
        phi, spec = random_instance(rng, m=4, n=6, l=8)
        v = rng.standard_normal(phi.shape)
        exact = float(np.sum(objective_gradient(phi, spec) * v))
        errors = []
        for h in (1e-2, 5e-3, 2.5e-3):
            fd = (objective_value(phi + h * v, spec) - objective_value(phi - h * v, spec)) / (2 * h)
            errors.append(abs(fd - exact))
        # halving h should shrink the error ~4x; allow generous slack
        assert errors[1] <= errors[0] / 2.5
        assert errors[2] <= errors[1] / 2.5


class TestRegularizerIdentities:
    def test_proposed_equals_baseline_with_isotropic_sre(self):
        # E built so E @ E.T is exactly (sigma^2 * P) * I
        rng = np.random.default_rng(13)
        n, p, sigma2 = 5, 8, 0.64
        e = np.zeros((n, p))
        scale = np.sqrt(sigma2 * p)
        e[:, :n] = scale * np.eye(n)
        psi = rng.standard_normal((n, 9))
        phi = rng.standard_normal((3, n))
        lam_base = 0.37
        base = ObjectiveSpec(psi=psi, lam=lam_base, sre=e)
        prop = ObjectiveSpec(psi=psi, lam=lam_base * sigma2 * p)
        assert objective_value(phi, base) == pytest.approx(
            objective_value(phi, prop), rel=1e-13
        )

    def test_orthogonal_right_invariance_of_energy(self):
        rng = np.random.default_rng(14)
        phi = rng.standard_normal((4, 7))
        q, _ = np.linalg.qr(rng.standard_normal((7, 7)))
        assert float(np.sum((phi @ q) ** 2)) == pytest.approx(
            float(np.sum(phi**2)), rel=1e-12
        )
