import numpy as np
import pytest

from csdesign.coherence import mutual_coherence, recoverable_sparsity
from csdesign.recovery import batch_recover, codes_to_matrix, omp, reconstruct, write_codes_csv


class TestOmpBasics:
    def test_orthonormal_picks_coordinate(self):
        code = omp(np.eye(3), np.array([0.0, 2.0, 0.0]), 1)
        np.testing.assert_array_equal(code.values, [0.0, 2.0, 0.0])
        assert code.support == (1,)
        assert code.residual_norm == pytest.approx(0.0, abs=1e-15)

    def test_k_equals_m_zero_residual(self):
        rng = np.random.default_rng(0)
        d = rng.standard_normal((6, 15))
        y = rng.standard_normal(6)
        code = omp(d, y, 6)
        assert code.residual_norm <= 1e-10

    def test_invalid_k(self):
        d = np.eye(4)
        with pytest.raises(ValueError):
            omp(d, np.ones(4), 0)
        with pytest.raises(ValueError):
            omp(d, np.ones(4), 5)

    def test_all_zero_columns_rejected(self):
        with pytest.raises(ValueError):
            omp(np.zeros((3, 4)), np.ones(3), 1)

    def test_zero_signal_early_stop(self):
        code = omp(np.eye(4), np.zeros(4), 2)
        assert code.support == ()
        np.testing.assert_array_equal(code.values, np.zeros(4))


class TestOmpExactRecovery:
    def test_noiseless_within_coherence_bound(self):
        successes = 0
        trials = 200
        for t in range(trials):
            rng = np.random.default_rng(1000 + t)
            d = rng.standard_normal((20, 50))
            k = max(1, recoverable_sparsity(mutual_coherence(d)))
            support = rng.choice(50, size=k, replace=False)
            theta = np.zeros(50)
            theta[support] = rng.standard_normal(k)
            code = omp(d, d @ theta, k)
            if set(code.support) == set(support) and np.max(np.abs(code.values - theta)) <= 1e-10:
                successes += 1
        assert successes == trials


class TestOmpProperties:
    def test_residual_monotone_and_orthogonal(self):
        rng = np.random.default_rng(2)
        d = rng.standard_normal((12, 30))
        y = rng.standard_normal(12)
        # replay the greedy loop to observe intermediate residuals
        norms = np.linalg.norm(d, axis=0)
        d_unit = d / norms
        residuals = [float(np.linalg.norm(y))]
        selected = []
        residual = y.copy()
        for _ in range(6):
            corr = np.abs(d_unit.T @ residual)
            corr[selected] = -1.0
            selected.append(int(np.argmax(corr)))
            coef, *_ = np.linalg.lstsq(d[:, selected], y, rcond=None)
            residual = y - d[:, selected] @ coef
            residuals.append(float(np.linalg.norm(residual)))
            # refitted residual is orthogonal to every selected original atom
            assert np.max(np.abs(d[:, selected].T @ residual)) <= 1e-8
        assert all(a >= b - 1e-12 for a, b in zip(residuals, residuals[1:]))
        code = omp(d, y, 6)
        assert code.residual_norm == pytest.approx(residuals[-1], rel=1e-10)
        assert code.support == tuple(selected)

    def test_selection_scale_invariant(self):
        rng = np.random.default_rng(3)
        d = rng.standard_normal((10, 25))
        y = rng.standard_normal(10)
        base = omp(d, y, 4)
        scaled = d.copy()
        scaled[:, list(base.support)] *= 9.0
        rescaled = omp(scaled, y, 4)
        assert rescaled.support == base.support

    def test_tie_breaks_to_lowest_index(self):
        # two identical atoms: the first one wins
        d = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        code = omp(d, np.array([3.0, 0.0]), 1)
        assert code.support == (0,)

    def test_rank_deficient_flagged(self):
        d = np.array([[1.0, 1.0, 0.3], [0.0, 0.0, 0.9]])
        # after picking both duplicate atoms the subdictionary is rank 1
        y = np.array([1.0, 0.2])
        code = omp(d, y, 2)
        if len(code.support) == 2 and 0 in code.support and 1 in code.support:
            assert code.rank_deficient


class TestReconstruct:
    def test_zero_code(self):
        psi = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(reconstruct(psi, np.zeros(4)), np.zeros(3))

    def test_unit_code_selects_atom(self):
        rng = np.random.default_rng(4)
        psi = rng.standard_normal((5, 7))
        e2 = np.zeros(7)
        e2[2] = 1.0
        np.testing.assert_array_equal(reconstruct(psi, e2), psi[:, 2])

    def test_matches_naive_product(self):
        rng = np.random.default_rng(5)
        psi = rng.standard_normal((4, 6))
        theta = np.zeros(6)
        theta[[1, 4]] = rng.standard_normal(2)
        expected = np.zeros(4)
        for i in range(4):
            for j in range(6):
                expected[i] += psi[i, j] * theta[j]
        np.testing.assert_allclose(reconstruct(psi, theta), expected, rtol=1e-14)

    def test_accepts_sparse_code(self):
        code = omp(np.eye(3), np.array([0.0, 1.5, 0.0]), 1)
        np.testing.assert_allclose(reconstruct(np.eye(3), code), [0.0, 1.5, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            reconstruct(np.eye(3), np.zeros(4))


class TestBatchRecover:
    def test_single_column_equals_single_call(self):
        rng = np.random.default_rng(6)
        d = rng.standard_normal((8, 16))
        y = rng.standard_normal((8, 1))
        batch = batch_recover(d, y, 3)
        single = omp(d, y[:, 0], 3)
        assert batch[0].support == single.support
        np.testing.assert_array_equal(batch[0].values, single.values)

    def test_matches_loop_bitwise(self):
        rng = np.random.default_rng(7)
        d = rng.standard_normal((10, 20))
        y = rng.standard_normal((10, 100))
        batch = batch_recover(d, y, 4)
        for j in range(100):
            single = omp(d, y[:, j], 4)
            assert batch[j].support == single.support
            np.testing.assert_array_equal(batch[j].values, single.values)
            assert batch[j].residual_norm == single.residual_norm

    def test_column_permutation_permutes_results(self):
        rng = np.random.default_rng(8)
        d = rng.standard_normal((6, 12))
        y = rng.standard_normal((6, 9))
        perm = rng.permutation(9)
        base = batch_recover(d, y, 2)
        permuted = batch_recover(d, y[:, perm], 2)
        for out_pos, in_pos in enumerate(perm):
            np.testing.assert_array_equal(permuted[out_pos].values, base[in_pos].values)

    def test_codes_matrix_and_csv(self, tmp_path):
        rng = np.random.default_rng(9)
        d = rng.standard_normal((6, 10))
        y = rng.standard_normal((6, 3))
        codes = batch_recover(d, y, 2)
        mat = codes_to_matrix(codes)
        assert mat.shape == (10, 3)
        path = tmp_path / "codes.csv"
        write_codes_csv(codes, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "signal_index,atom_index,value"
        assert len(lines) == 1 + sum(len(c.support) for c in codes)
