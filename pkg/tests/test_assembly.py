import math

import numpy as np
import pytest

from volterra_id import assembly
from volterra_id.assembly import (GridScheme, assemble, beta_coeff, beta_row, gamma_coeff, uniform_grid)
from volterra_id.basis import BasisSet, basis_matrix
from volterra_id.errors import AssemblyError, ConfigError
from volterra_id.quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_2d_tensor
from volterra_id.signals import SampledSignal, SignalPair, model1_pair, model2_input, model2_pair


@pytest.fixture(scope="module")
def m2():
    return model2_pair()


def test_uniform_grid_schemes():
    g = uniform_grid(5, 1.0)
    np.testing.assert_allclose(g.nodes, [0, 0.25, 0.5, 0.75, 1.0])
    g = uniform_grid(4, 2.0, GridScheme.UNIFORM_EXCLUDING_ZERO)
    np.testing.assert_allclose(g.nodes, [0.5, 1.0, 1.5, 2.0])
    assert len(uniform_grid(1, 1.0)) == 1
    with pytest.raises(ConfigError):
        uniform_grid(0)


def test_beta_examples():
    b = BasisSet(3, 1.0)
    for i in range(3):
        assert beta_coeff(b, np.sin, i, 0.0) == (0.0, 0.0)
    val, err = beta_coeff(b, SignalPair(lambda t: np.sin(20 * t), None, 1.0, 20.0), 0, 1.0)
    assert abs(val - (1 - math.cos(20)) / 20) <= 1e-12
    val, _ = beta_coeff(b, np.ones_like, 1, 1.0)
    assert abs(val) <= 1e-15


def test_beta_row_agrees_with_beta_coeff(m2):
    b = BasisSet(5, 1.0)
    row, err = beta_row(b, m2, 0.63)
    assert err <= DEFAULT_CONFIG.abs_tol
    for i in range(5):
        assert row[i] == pytest.approx(beta_coeff(b, m2, i, 0.63)[0], abs=1e-13)


def test_gamma_examples(m2):
    assert gamma_coeff(0.0, 3.7) == 0.0
    assert gamma_coeff(-0.4, -0.4) == pytest.approx(0.16)
    b = BasisSet(2, 1.0)
    t = 0.5
    b0, _ = beta_coeff(b, m2, 0, t)
    b1, _ = beta_coeff(b, m2, 1, t)
    full, _ = integrate_2d_tensor(
        lambda s1, s2: basis_matrix(b, s1)[0] * basis_matrix(b, s2)[1] * model2_input(t - s1) * model2_input(t - s2),
        t, omega=10.0)
    assert abs(gamma_coeff(b0, b1) - full) <= 10 * DEFAULT_CONFIG.abs_tol


def test_assemble_shape_and_structure(m2):
    grid = uniform_grid(12, 1.0)
    sys_ = assemble((3, 3, 3), grid, m2)
    assert sys_.matrix.shape == (12, 12)
    assert np.all(sys_.matrix[0] == 0.0)
    assert sys_.rhs[0] == 0.0
    labels = sys_.column_labels()
    assert labels[:4] == ["A0", "A1", "A2", "C0_0"]
    assert labels[-1] == "C2_2"
    for i in range(3):
        for j in range(3):
            if i != j:
                ci, cj = labels.index(f"C{i}_{j}"), labels.index(f"C{j}_{i}")
                np.testing.assert_array_equal(sys_.matrix[:, ci], sys_.matrix[:, cj])
    np.testing.assert_allclose(sys_.rhs, m2.y_at(grid.nodes))


def test_assemble_rectangular_sizes(m2):
    sys_ = assemble((2, 3, 1), uniform_grid(9, 1.0), m2)
    assert sys_.matrix.shape == (9, 5)
    assert sys_.column_labels() == ["A0", "A1", "C0_0", "C1_0", "C2_0"]
    np.testing.assert_array_equal(sys_.matrix[:, 2], sys_.matrix[:, 0] ** 2)


def test_factorization_oracle_small_instance(m2):
    b = BasisSet(2, 1.0)
    for t in uniform_grid(5, 1.0).nodes:
        betas = [beta_coeff(b, m2, i, t)[0] for i in range(2)]
        for i in range(2):
            for j in range(2):
                full, _ = integrate_2d_tensor(
                    lambda s1, s2: basis_matrix(b, s1)[i] * basis_matrix(b, s2)[j]
                    * model2_input(t - s1) * model2_input(t - s2), t, omega=10.0)
                assert abs(betas[i] * betas[j] - full) <= 1e-10


def test_each_beta_computed_once(monkeypatch, m2):
    calls = []
    real = assembly.beta_row

    def counting(basis, signal, t, cfg=DEFAULT_CONFIG):
        row, err = real(basis, signal, t, cfg)
        calls.append(len(row))
        return row, err

    monkeypatch.setattr(assembly, "beta_row", counting)
    grid = uniform_grid(7, 1.0)
    assemble((3, 3, 3), grid, m2)
    assert len(calls) == len(grid)
    assert sum(calls) == 3 * len(grid)


def test_zero_row_for_any_grid_with_origin():
    pair = model1_pair()
    for n in (2, 5, 13):
        sys_ = assemble((2, 2, 2), uniform_grid(n, 1.0), pair)
        assert np.all(sys_.matrix[0] == 0.0)
    excl = assemble((2, 2, 2), uniform_grid(5, 1.0, GridScheme.UNIFORM_EXCLUDING_ZERO), pair)
    assert np.all(np.any(excl.matrix != 0.0, axis=1))


def test_sampled_input_integrated_exactly():
    # x(t) = t sampled on a coarse grid is reproduced exactly by the interpolant, so
    # beta_0(t) = t^2 / 2 and beta_1(t) = integral of (2s - 1)(t - s) = t^3/3 - t^2/2 for T = 1.
    grid = np.linspace(0, 1, 33)
    x = SampledSignal(grid, grid)
    pair = SignalPair(x, None, 1.0, 0.0, "ramp", knots=grid)
    b = BasisSet(2, 1.0)
    for t in (0.1, 0.537, 1.0):
        row, err = beta_row(b, pair, t)
        np.testing.assert_allclose(row, [t**2 / 2, t**3 / 3 - t**2 / 2], atol=1e-15)
        assert err <= 1e-13


def test_sampled_input_with_kinks_close_to_smooth(m2):
    grid = np.linspace(0, 1, 2048)
    x = SampledSignal(grid, model2_input(grid))
    noisy = m2.with_input(x, knots=grid)
    b = BasisSet(3, 1.0)
    smooth, _ = beta_row(b, m2, 0.8)
    kinked, err = beta_row(b, noisy, 0.8)
    assert err <= 1e-13
    np.testing.assert_allclose(kinked, smooth, atol=1e-5)


def test_assembly_error_names_entry():
    rough = SignalPair(lambda t: np.abs(t - 0.37) ** 0.5, lambda t: 0 * t, 1.0)
    cfg = QuadratureConfig(points_per_panel=2, max_refinements=1)
    with pytest.raises(AssemblyError) as exc:
        assemble((2, 2, 2), uniform_grid(3, 1.0), rough, cfg)
    assert exc.value.node == 1
    assert "i=" in str(exc.value) and "k=1" in str(exc.value)


def test_assemble_validation(m2):
    with pytest.raises(ConfigError):
        assemble((0, 1, 1), uniform_grid(3), m2)
    with pytest.raises(ConfigError):
        assemble((1, 1, 1), uniform_grid(3, 2.0), m2)
