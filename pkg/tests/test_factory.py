import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from hjsvd import (
    ALPHA,
    EPS,
    NumericalSingularityError,
    RankDeficiencyError,
    ShapeError,
    SpectrumSpec,
    bunch_parlett_factor,
    draw_spectrum,
    drive,
    generate_factor_pair,
    generate_symmetric,
    qr_shorten,
)


def reconstruct(pair):
    Jm = np.diag(pair.J.signs.astype(float))
    return pair.G @ Jm @ pair.G.T


class TestSpectrumSpec:
    def test_rejects_small_order(self):
        with pytest.raises(ShapeError):
            SpectrumSpec(1, 20.0, 0)

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            SpectrumSpec(4, 0.0, 0)

    def test_gap_respected(self):
        spec = SpectrumSpec(200, 20.0, 3)
        lam = draw_spectrum(spec, np.random.default_rng(spec.seed))
        mags = np.abs(lam)
        assert np.all(mags >= 20.0 * 1e-5)
        assert np.all(mags <= 20.0)

    def test_pos_count(self):
        spec = SpectrumSpec(10, 5.0, 1, pos_count=3)
        lam = draw_spectrum(spec, np.random.default_rng(spec.seed))
        assert np.count_nonzero(lam > 0) == 3


class TestGenerateSymmetric:
    def test_identity_reflectors(self):
        M, lam = generate_symmetric(SpectrumSpec(2, 20.0, 0),
                                    eigenvalues=[4.0, -1.0], identity_q=True)
        assert_array_equal(M, np.diag([4.0, -1.0]))
        assert_array_equal(lam, [-1.0, 4.0])

    def test_exact_symmetry(self):
        M, _ = generate_symmetric(SpectrumSpec(32, 20.0, 5))
        assert np.linalg.norm(M - M.T, "fro") == 0.0

    def test_deterministic(self):
        M1, l1 = generate_symmetric(SpectrumSpec(16, 20.0, 9))
        M2, l2 = generate_symmetric(SpectrumSpec(16, 20.0, 9))
        assert_array_equal(M1, M2)
        assert_array_equal(l1, l2)

    def test_spectrum_matches_dense_eigensolver(self):
        M, lam = generate_symmetric(SpectrumSpec(48, 20.0, 2))
        assert_allclose(np.linalg.eigvalsh(M), lam, rtol=1e-12, atol=1e-12)


class TestBunchParlettFactor:
    def test_pivot_constant(self):
        assert_allclose(ALPHA, (1.0 + np.sqrt(17.0)) / 8.0, rtol=0)

    def test_diagonal_input(self):
        pair = bunch_parlett_factor(np.diag([4.0, -1.0]))
        assert_array_equal(np.abs(pair.G), np.diag([2.0, 1.0]))
        assert_array_equal(pair.J.signs, [1, -1])

    def test_offdiagonal_2x2_pivot(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        pair = bunch_parlett_factor(M)
        s = 1.0 / np.sqrt(2.0)
        assert_allclose(np.abs(pair.G), [[s, s], [s, s]], rtol=1e-15)
        assert_array_equal(pair.J.signs, [1, -1])
        assert_allclose(reconstruct(pair), M, atol=4 * EPS)

    def test_residual_random(self):
        M, _ = generate_symmetric(SpectrumSpec(64, 20.0, 7))
        pair = bunch_parlett_factor(M)
        resid = np.linalg.norm(reconstruct(pair) - M, "fro")
        assert resid <= 50.0 * 64 * EPS * np.linalg.norm(M, "fro")

    def test_inertia_matches(self):
        M, lam = generate_symmetric(SpectrumSpec(32, 20.0, 11))
        pair = bunch_parlett_factor(M)
        assert pair.J.p == np.count_nonzero(lam > 0)

    def test_perm_is_permutation(self):
        M, _ = generate_symmetric(SpectrumSpec(24, 20.0, 13))
        pair = bunch_parlett_factor(M)
        assert_array_equal(np.sort(pair.perm), np.arange(24))

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            bunch_parlett_factor(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(ShapeError):
            bunch_parlett_factor(np.ones((2, 3)))

    def test_singular_input(self):
        with pytest.raises(NumericalSingularityError):
            bunch_parlett_factor(np.ones((3, 3)))


class TestGenerateFactorPair:
    def test_deterministic(self):
        b1 = generate_factor_pair(SpectrumSpec(16, 20.0, 21))
        b2 = generate_factor_pair(SpectrumSpec(16, 20.0, 21))
        assert_array_equal(b1.factor.G, b2.factor.G)
        assert_array_equal(b1.M, b2.M)

    def test_inertia_and_gap(self):
        b = generate_factor_pair(SpectrumSpec(40, 20.0, 17))
        assert b.factor.J.p == np.count_nonzero(b.lambda_true > 0)
        assert np.all(np.abs(b.lambda_true) >= 20.0 * 1e-5)

    def test_signs_positives_first(self):
        b = generate_factor_pair(SpectrumSpec(20, 20.0, 23))
        p = b.factor.J.p
        assert_array_equal(b.factor.J.signs[:p], 1)
        assert_array_equal(b.factor.J.signs[p:], -1)

    def test_end_to_end_eigenvalues(self):
        b = generate_factor_pair(SpectrumSpec(160, 20.0, 1))
        res = drive(b.factor.G, b.factor.J)
        err = np.max(np.abs(np.sort(res.lam) - b.lambda_true)
                     / np.abs(b.lambda_true))
        assert err <= 1e-12

    def test_definite_instance(self):
        b = generate_factor_pair(SpectrumSpec(16, 20.0, 3, pos_count=0))
        assert b.factor.J.p == 0
        res = drive(b.factor.G, b.factor.J)
        assert np.all(res.lam < 0.0)


class TestQrShorten:
    def test_orthonormal_input(self):
        Q0 = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 3)))[0]
        R, Q = qr_shorten(Q0)
        assert_allclose(R, np.eye(3), atol=1e-14)

    def test_single_column(self):
        R, Q = qr_shorten(np.array([[3.0], [4.0]]))
        assert_allclose(R, [[5.0]], rtol=1e-15)
        assert_allclose(Q, [[0.6], [0.8]], rtol=1e-15)

    def test_residual_and_orthogonality(self):
        rng = np.random.default_rng(4)
        G = rng.standard_normal((40, 12))
        R, Q = qr_shorten(G)
        assert np.linalg.norm(Q @ R - G, "fro") <= \
            20.0 * 40 * EPS * np.linalg.norm(G, "fro")
        assert np.linalg.norm(Q.T @ Q - np.eye(12), "fro") <= 40 * 40 * EPS
        assert np.all(np.diag(R) > 0.0)
        assert_allclose(R, np.triu(R), atol=0)

    def test_rejects_square(self):
        with pytest.raises(ShapeError):
            qr_shorten(np.eye(3))

    def test_rank_deficient(self):
        G = np.zeros((4, 2))
        G[:, 0] = 1.0
        with pytest.raises(RankDeficiencyError):
            qr_shorten(G)
