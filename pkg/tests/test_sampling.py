import numpy as np
import pytest

from lamx.errors import AssumptionError, InputError
from lamx.sampling import check_covariance, draw_xi, make_rng, mvn_sample, sym_sqrt


def test_streams_are_reproducible_and_distinct():
    a = draw_xi(100, 3, 42, 1, 2)
    np.testing.assert_array_equal(a, draw_xi(100, 3, 42, 1, 2))
    assert not np.array_equal(a, draw_xi(100, 3, 42, 1, 3))
    assert not np.array_equal(a, draw_xi(100, 3, 43, 1, 2))
    # a stream does not depend on which other streams were drawn first
    draw_xi(10, 3, 42, 0, 0)
    np.testing.assert_array_equal(a, draw_xi(100, 3, 42, 1, 2))


def test_antithetic_pairs():
    x = draw_xi(10, 2, 0, antithetic=True)
    np.testing.assert_array_equal(x[5:], -x[:5])
    with pytest.raises(InputError):
        draw_xi(9, 2, 0, antithetic=True)


def test_sym_sqrt():
    s = np.array([[2.0, 0.5], [0.5, 4.0]])
    r = sym_sqrt(s)
    np.testing.assert_allclose(r, r.T)
    np.testing.assert_allclose(r @ r, s, atol=1e-12)
    with pytest.raises(AssumptionError, match="Assumption 3"):
        sym_sqrt(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(InputError):
        check_covariance(np.array([[1.0, 0.2], [0.0, 1.0]]))
    with pytest.raises(InputError):
        check_covariance(np.ones((2, 3)))


def test_mvn_moments():
    s = np.array([[2.0, 0.5], [0.5, 4.0]])
    x = mvn_sample([1.0, -1.0], s, 200_000, make_rng(9))
    np.testing.assert_allclose(x.mean(axis=0), [1.0, -1.0], atol=0.02)
    np.testing.assert_allclose(np.cov(x, rowvar=False), s, atol=0.05)
