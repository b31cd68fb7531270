import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfbm.errors import DimensionMismatch, NotPositiveDefinite
from mfbm.numerics import (
    SeededStream,
    as_symmetric,
    cholesky_factor,
    normal_draw,
    spd_solve,
    symmetric_eigenvalues,
)

from conftest import random_spd


def test_as_symmetric_enforces_exact_symmetry():
    a = np.array([[1.0, 2.0], [2.0 + 1e-9, 3.0]])
    s = as_symmetric(a)
    assert s[0, 1] == s[1, 0]


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), np.zeros(3)])
def test_as_symmetric_rejects_non_square(bad):
    with pytest.raises(DimensionMismatch):
        as_symmetric(bad)


def test_cholesky_identity():
    f = cholesky_factor(np.eye(3))
    np.testing.assert_array_equal(f.lower, np.eye(3))
    assert f.logdet == 0.0


def test_cholesky_logdet_2x2():
    f = cholesky_factor([[0.75, 0.25], [0.25, 0.75]])
    # det = 0.75**2 - 0.25**2
    assert f.logdet == pytest.approx(math.log(0.75**2 - 0.25**2), abs=1e-14)


@pytest.mark.parametrize(
    "matrix",
    [
        [[1.0, 2.0], [2.0, 1.0]],
        [[1.0, 1.0], [1.0, 1.0]],
        [[0.0, 0.0], [0.0, 0.0]],
        [[1.0, 0.0], [0.0, 1e-17]],
    ],
)
def test_cholesky_not_positive_definite(matrix):
    with pytest.raises(NotPositiveDefinite):
        cholesky_factor(matrix)


def test_cholesky_reconstructs():
    rng = np.random.default_rng(3)
    s = random_spd(rng, 20)
    f = cholesky_factor(s)
    err = np.linalg.norm(f.lower @ f.lower.T - s) / np.linalg.norm(s)
    assert err <= 1e-10
    assert np.all(np.diag(f.lower) > 0)


def test_eigenvalues_examples():
    np.testing.assert_allclose(symmetric_eigenvalues(np.eye(4)), [1, 1, 1, 1])
    d = 2.0**-1.6
    o = 0.5 - d
    c2 = [[d, o], [o, d]]
    np.testing.assert_allclose(symmetric_eigenvalues(c2), [d - o, 0.5], rtol=1e-12)
    np.testing.assert_allclose(symmetric_eigenvalues([[0.75, 0.25], [0.25, 0.75]]), [0.5, 1.0], rtol=1e-14)


def test_spd_solve_examples():
    np.testing.assert_allclose(spd_solve(np.eye(2), [3.0, 4.0]), [3.0, 4.0])
    np.testing.assert_allclose(spd_solve([[0.75, 0.25], [0.25, 0.75]], [1.0, 0.0]), [1.5, -0.5], rtol=1e-14)
    np.testing.assert_allclose(spd_solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 4.0]), [1.0, 1.0])


def test_spd_solve_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        spd_solve(np.eye(2), [1.0, 2.0, 3.0])


def test_spd_solve_propagates_not_pd():
    with pytest.raises(NotPositiveDefinite):
        spd_solve([[1.0, 2.0], [2.0, 1.0]], [1.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 64), seed=st.integers(0, 2**32 - 1))
def test_linear_algebra_properties(n, seed):
    rng = np.random.default_rng(seed)
    s = random_spd(rng, n)
    eig = symmetric_eigenvalues(s)
    assert np.all(np.diff(eig) >= 0)
    assert math.isclose(eig.sum(), np.trace(s), rel_tol=1e-10)
    f = cholesky_factor(s)
    assert math.isclose(f.logdet, float(np.sum(np.log(eig))), rel_tol=1e-8, abs_tol=1e-8)
    x = rng.standard_normal(n)
    np.testing.assert_allclose(spd_solve(s, s @ x), x, rtol=1e-8, atol=1e-8 * np.abs(x).max())
    b = s @ x
    assert np.linalg.norm(s @ spd_solve(s, b) - b) <= 1e-9 * np.linalg.norm(b)


def test_normal_draw_is_deterministic():
    s = SeededStream(7, 3)
    assert normal_draw(s, 12345) == normal_draw(SeededStream(7, 3), 12345)
    assert normal_draw(s, 0) != normal_draw(SeededStream(7, 4), 0)
    assert normal_draw(s, 0) != normal_draw(SeededStream(8, 3), 0)


@pytest.mark.parametrize("chunks", [[10], [1, 9], [3, 3, 4], [4, 4, 2], [7, 1, 1, 1]])
def test_chunking_is_bit_identical(chunks):
    s = SeededStream(99, 5)
    whole = s.normals(0, sum(chunks))
    starts = np.cumsum([0] + chunks[:-1])
    parts = np.concatenate([s.normals(int(a), c) for a, c in zip(starts, chunks)])
    np.testing.assert_array_equal(whole, parts)
    np.testing.assert_array_equal(whole[5], normal_draw(s, 5))


def test_reverse_order_evaluation_is_identical():
    s = SeededStream(1, 1)
    forward = [normal_draw(s, i) for i in range(20)]
    backward = [normal_draw(s, i) for i in reversed(range(20))][::-1]
    assert forward == backward


@pytest.mark.parametrize("seed", [0, 1, 42, 2**64 - 1])
def test_normal_stream_moments(seed):
    x = SeededStream(seed).normals(0, 10**6)
    assert abs(x.mean()) <= 4e-3
    assert abs(x.var() - 1.0) <= 1e-2


def test_uniforms_open_interval():
    u = SeededStream(5).uniforms(0, 10**5)
    assert u.min() > 0.0 and u.max() < 1.0


def test_spawn_gives_distinct_streams():
    s = SeededStream(11)
    a, b = s.spawn(1), s.spawn(2)
    assert a.tag != b.tag and a.seed == b.seed == 11
    assert s.spawn(1) == a
    assert not np.array_equal(a.normals(0, 8), b.normals(0, 8))


@pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
def test_stream_rejects_bad_seed(seed):
    with pytest.raises(ValueError):
        SeededStream(seed)
