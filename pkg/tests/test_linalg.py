import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from hjsvd import (
    SignatureVector,
    ShapeError,
    as_factor,
    dot_chunked,
    fused_pair_update,
    orthonormality_distance,
)


class TestDotChunked:
    def test_unit_vector(self):
        e1 = np.zeros(64)
        e1[0] = 1.0
        assert dot_chunked(e1, e1) == 1.0

    def test_ones(self):
        x = np.ones(64)
        assert dot_chunked(x, x, chunk=32) == 64.0

    def test_small_integers(self):
        # exact in integer arithmetic
        x = np.array([1.0, 2.0, 3.0, 4.0])
        y = np.array([4.0, 3.0, 2.0, 1.0])
        assert dot_chunked(x, y, chunk=2) == 20.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            dot_chunked(np.ones(3), np.ones(4))

    def test_bad_chunk(self):
        with pytest.raises(ValueError):
            dot_chunked(np.ones(3), np.ones(3), chunk=0)

    @settings(deadline=None, max_examples=50)
    @given(st.integers(min_value=0, max_value=2**32 - 1),
           st.integers(min_value=1, max_value=200))
    def test_bitwise_deterministic(self, seed, length):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(length)
        y = rng.standard_normal(length)
        a = dot_chunked(x, y, chunk=32)
        b = dot_chunked(x.copy(), y.copy(), chunk=32)
        assert a == b  # bit identical


class TestFusedPairUpdate:
    def test_identity(self):
        x = np.array([1.0, 2.0, 3.0])
        y = np.array([-1.0, 0.5, 2.0])
        x0, y0 = x.copy(), y.copy()
        fused_pair_update(x, y, t=0.0, c=1.0, s=-1)
        assert_array_equal(x, x0)
        assert_array_equal(y, y0)

    def test_trigonometric_quarter_turn(self):
        x = np.array([1.0, 0.0])
        y = np.array([0.0, 1.0])
        c = 1.0 / math.sqrt(2.0)
        fused_pair_update(x, y, t=1.0, c=c, s=-1)
        assert_allclose(x, [c, -c], rtol=0, atol=1e-16)
        assert_allclose(y, [c, c], rtol=0, atol=1e-16)

    def test_hyperbolic_half_tangent(self):
        x = np.array([1.0, 0.0])
        y = np.array([0.0, 1.0])
        c = 2.0 / math.sqrt(3.0)
        fused_pair_update(x, y, t=0.5, c=c, s=1)
        assert_allclose(x, [2.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)],
                        rtol=1e-15)
        assert_allclose(y, [1.0 / math.sqrt(3.0), 2.0 / math.sqrt(3.0)],
                        rtol=1e-15)

    def test_returns_new_squared_norms(self):
        x = np.array([1.0, 0.0])
        y = np.array([0.0, 1.0])
        dx, dy = fused_pair_update(x, y, t=1.0, c=1.0 / math.sqrt(2.0), s=-1)
        assert dx == dot_chunked(x, x)
        assert dy == dot_chunked(y, y)

    def test_invalid_sign(self):
        with pytest.raises(ValueError):
            fused_pair_update(np.ones(2), np.ones(2), 0.1, 1.0, 0)

    def test_nonpositive_c(self):
        with pytest.raises(ValueError):
            fused_pair_update(np.ones(2), np.ones(2), 0.1, 0.0, -1)


class TestOrthonormalityDistance:
    def test_identity(self):
        assert orthonormality_distance(np.eye(4)) == 0.0

    def test_scaled_identity(self):
        assert_allclose(orthonormality_distance(2.0 * np.eye(2)),
                        3.0 * math.sqrt(2.0), rtol=1e-15)

    def test_shear(self):
        U = np.array([[1.0, 1.0], [0.0, 1.0]])
        assert_allclose(orthonormality_distance(U), math.sqrt(3.0), rtol=1e-15)


class TestSignatureVector:
    def test_from_p(self):
        J = SignatureVector.from_p(4, 2)
        assert_array_equal(J.signs, [1, 1, -1, -1])
        assert len(J) == 4

    def test_separation_enforced(self):
        with pytest.raises(ValueError):
            SignatureVector(np.array([1, -1, 1], dtype=np.int8), 2)

    def test_p_mismatch(self):
        with pytest.raises(ValueError):
            SignatureVector(np.array([1, 1, -1], dtype=np.int8), 1)

    def test_non_unit_entries(self):
        with pytest.raises(ValueError):
            SignatureVector(np.array([1, 0, -1], dtype=np.int8), 1)


class TestAsFactor:
    def test_fortran_order(self):
        G = as_factor(np.arange(6.0).reshape(2, 3))
        assert G.flags.f_contiguous

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            as_factor(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_rejects_vector(self):
        with pytest.raises(ShapeError):
            as_factor(np.ones(3))
