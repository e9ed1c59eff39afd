import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exnerdg.errors import ConfigurationError
from exnerdg.sbp import LobattoBasis, gauss_rule, lgl_basis, sbp_defect


def test_two_point_rule():
    b = lgl_basis(1)
    np.testing.assert_allclose(b.nodes, [-1.0, 1.0])
    np.testing.assert_allclose(b.weights, [1.0, 1.0])
    assert sbp_defect(b) == 0.0
    np.testing.assert_allclose(b.q_matrix, [[-0.5, 0.5], [-0.5, 0.5]])


def test_three_point_rule():
    b = lgl_basis(2)
    np.testing.assert_allclose(b.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(b.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-14)


@pytest.mark.parametrize("n", range(0, 13))
def test_weights_sum_to_two(n):
    assert lgl_basis(n).weights.sum() == pytest.approx(2.0, abs=1e-14)


def test_degree_zero_is_one_node():
    b = lgl_basis(0)
    assert b.n_nodes == 1
    assert b.weights[0] == 2.0
    assert b.deriv_matrix.shape == (1, 1) and b.deriv_matrix[0, 0] == 0.0


def test_zeroed_derivative_gives_unit_defect():
    b = lgl_basis(3)
    broken = LobattoBasis(b.degree, b.nodes, b.weights, np.zeros_like(b.deriv_matrix))
    assert sbp_defect(broken) == 1.0


@pytest.mark.parametrize("bad", [-1, 21, 2.5])
def test_degree_out_of_range(bad):
    with pytest.raises(ConfigurationError):
        lgl_basis(bad)


def test_gauss_one_and_two_points():
    g1 = gauss_rule(1)
    np.testing.assert_allclose(g1.nodes, [0.5])
    np.testing.assert_allclose(g1.weights, [1.0])
    g2 = gauss_rule(2)
    np.testing.assert_allclose(g2.nodes, [0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)], rtol=1e-14)
    np.testing.assert_allclose(g2.weights, [0.5, 0.5], rtol=1e-14)


@pytest.mark.parametrize("bad", [0, -3])
def test_gauss_out_of_range(bad):
    with pytest.raises(ConfigurationError):
        gauss_rule(bad)


@given(st.integers(1, 10))
def test_gauss_integrates_linear_exactly(n):
    g = gauss_rule(n)
    assert abs(g.weights @ g.nodes - 0.5) < 1e-15


@given(st.integers(1, 10), st.data())
def test_gauss_exact_to_degree_2n_minus_1(n, data):
    g = gauss_rule(n)
    k = data.draw(st.integers(0, 2 * n - 1))
    assert g.weights @ g.nodes**k == pytest.approx(1.0 / (k + 1), rel=1e-13)


@given(st.integers(1, 8), st.data())
def test_derivative_exact_on_polynomials(n, data):
    b = lgl_basis(n)
    coeffs = data.draw(st.lists(st.floats(-5, 5), min_size=n + 1, max_size=n + 1))
    p = np.polynomial.Polynomial(coeffs)
    assert np.abs(b.deriv_matrix @ p(b.nodes) - p.deriv()(b.nodes)).max() <= 1e-12 * max(1.0, np.abs(coeffs).max())
