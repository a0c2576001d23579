import numpy as np
import pytest
from hypothesis import given, strategies as st

from volterra_id.basis import BasisSet, basis_row, chebyshev_eval, mapped_eval
from volterra_id.errors import ConfigError, DomainError
from volterra_id.quadrature import gauss_legendre_rule


@pytest.mark.parametrize("i, u, expected", [(0, 0.37, 1.0), (2, 0.5, -0.5), (3, 0.5, -1.0), (1, -0.2, -0.2)])
def test_chebyshev_eval_examples(i, u, expected):
    assert chebyshev_eval(i, u) == pytest.approx(expected, abs=1e-15)


def test_chebyshev_eval_domain():
    assert chebyshev_eval(4, 1.0 + 5e-13) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        chebyshev_eval(2, 1.0 + 1e-9)
    with pytest.raises(DomainError):
        chebyshev_eval(-1, 0.0)


def test_bounded_by_one():
    u = np.linspace(-1, 1, 200)
    for i in range(13):
        assert max(abs(chebyshev_eval(i, v)) for v in u) <= 1 + 1e-12


def test_matches_trig_identity():
    theta = np.linspace(0, np.pi, 100)
    for i in range(13):
        vals = np.array([chebyshev_eval(i, np.cos(th)) for th in theta])
        assert np.max(np.abs(vals - np.cos(i * theta))) <= 1e-10


@pytest.mark.parametrize("T", [1.0, 2.5])
def test_mapped_eval_endpoints(T):
    b = BasisSet(6, T)
    for i in range(6):
        assert mapped_eval(b, i, 0.0) == pytest.approx((-1) ** i)
        assert mapped_eval(b, i, T) == pytest.approx(1.0)
    assert mapped_eval(b, 1, T / 2) == pytest.approx(0.0, abs=1e-15)


def test_mapped_eval_examples_and_errors():
    b = BasisSet(3, 1.0)
    assert mapped_eval(b, 2, 0.75) == pytest.approx(-0.5)
    with pytest.raises(DomainError):
        mapped_eval(b, 0, 1.1)
    with pytest.raises(DomainError):
        mapped_eval(b, 3, 0.5)


def test_basis_row_examples():
    np.testing.assert_allclose(basis_row(BasisSet(3, 1.0), 0.0), [1, -1, 1])
    np.testing.assert_allclose(basis_row(BasisSet(2, 3.0), 3.0), [1, 1])
    np.testing.assert_allclose(basis_row(BasisSet(4, 1.0), 0.75), [1, 0.5, -0.5, -1], atol=1e-15)


@given(st.integers(1, 12), st.floats(0.1, 10), st.floats(0, 1))
def test_basis_row_same_path_as_mapped_eval(count, T, frac):
    b = BasisSet(count, T)
    t = frac * T
    row = basis_row(b, t)
    assert all(row[i] == mapped_eval(b, i, t) for i in range(count))
    assert np.all(np.abs(row) <= 1 + 1e-12)


def test_discrete_orthogonality():
    # Gauss-Chebyshev: integral of T_i T_j / sqrt(1-u^2) via u = cos(theta), Gauss-Legendre in theta
    nodes, weights = gauss_legendre_rule(40)
    theta = 0.5 * np.pi * (nodes + 1)
    w = 0.5 * np.pi * weights
    for i in range(7):
        for j in range(7):
            if i != j:
                val = sum(wk * chebyshev_eval(i, np.cos(tk)) * chebyshev_eval(j, np.cos(tk))
                          for tk, wk in zip(theta, w))
                assert abs(val) <= 1e-8


@pytest.mark.parametrize("count, T", [(0, 1.0), (2, 0.0), (2, -1.0)])
def test_invalid_basis(count, T):
    with pytest.raises(ConfigError):
        BasisSet(count, T)
