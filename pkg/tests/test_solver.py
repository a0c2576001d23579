import json

import numpy as np
import pytest

from volterra_id.assembly import GridScheme, assemble, uniform_grid
from volterra_id.basis import BasisSet, basis_matrix
from volterra_id.errors import ConfigError, NumericalError
from volterra_id.signals import (CachedResponse, GroundTruthKernels, NoiseSpec, SignalPair, model1_pair,
                                 model2_pair)
from volterra_id.solver import (KernelExpansion, Method, identify_collocation, identify_lsm, min_norm_lstsq,
                                predict, predict_many, residual_max, solve_min_norm, stability_experiment,
                                stability_residuals)


@pytest.fixture(scope="module")
def m2():
    return model2_pair()


@pytest.fixture(scope="module")
def fit3(m2):
    return identify_collocation(m2, 3, 3, 3)


def in_span_pair():
    """Output of kernels inside the degree-1 Chebyshev span: K1 = B0 + B1, K2 = B0 x B0."""
    b = BasisSet(2, 1.0)
    kernels = GroundTruthKernels(
        k1=lambda s: basis_matrix(b, s)[0] + basis_matrix(b, s)[1],
        k2=lambda s1, s2: basis_matrix(b, s1)[0] * basis_matrix(b, s2)[0],
    )
    x = lambda t: np.cos(3.0 * t) + 0.5 * t
    return SignalPair(x, CachedResponse("in-span", kernels, x, omega=3.0), 1.0, 3.0, "in-span")


def test_min_norm_examples():
    coef, rank = min_norm_lstsq(np.eye(3), [1.0, -2.0, 0.5])
    np.testing.assert_allclose(coef, [1.0, -2.0, 0.5])
    assert rank == 3
    coef, rank = min_norm_lstsq([[1.0, 1.0], [1.0, 1.0]], [2.0, 2.0])
    np.testing.assert_allclose(coef, [1.0, 1.0])
    assert rank == 1


def test_min_norm_errors():
    with pytest.raises(NumericalError):
        min_norm_lstsq([[1.0, np.nan]], [1.0])
    with pytest.raises(NumericalError):
        min_norm_lstsq(np.zeros((0, 0)), [])
    with pytest.raises(ConfigError):
        min_norm_lstsq(np.eye(2), [1, 1], rcond=0.0)


def test_rank_of_collocation_system(m2):
    sys_ = assemble((3, 3, 3), uniform_grid(12), m2)
    _, rank = solve_min_norm(sys_)
    # counting oracle: nonzero rows vs. distinct columns (C_ij and C_ji coincide)
    nonzero_rows = int(np.sum(np.any(sys_.matrix != 0, axis=1)))
    distinct_cols = len({tuple(col) for col in sys_.matrix.T})
    assert (nonzero_rows, distinct_cols) == (11, 9)
    assert rank == min(nonzero_rows, distinct_cols) == 9


def test_expansion_from_vector_and_kernels():
    e = KernelExpansion.from_vector(np.arange(1.0, 8.0), 3, 2, 2)
    np.testing.assert_array_equal(e.a, [1, 2, 3])
    np.testing.assert_array_equal(e.c, [[4, 5], [6, 7]])
    assert e.sizes == (3, 2, 2)
    # B0 = 1, B1 = 2s - 1, B2 = 2(2s-1)^2 - 1 on [0, 1]
    s = 0.8
    u = 2 * s - 1
    assert e.k1(s) == pytest.approx(1 + 2 * u + 3 * (2 * u * u - 1))
    assert e.k2(0.0, 1.0) == pytest.approx(4 + 5.5 * (1 - 1) + 7 * -1)
    assert e.k2(0.0, 1.0, symmetric=False) == pytest.approx(4 + 5 - 6 - 7)
    with pytest.raises(ConfigError):
        KernelExpansion.from_vector(np.ones(5), 3, 2, 2)


def test_predict_trivial_cases(m2):
    zero = KernelExpansion.from_vector(np.zeros(12), 3, 3, 3)
    assert predict(zero, m2, 0.4) == 0.0
    e = KernelExpansion.from_vector(np.linspace(-1, 1, 12), 3, 3, 3)
    assert predict(e, m2, 0.0) == 0.0
    assert residual_max(zero, m2) == pytest.approx(np.max(np.abs(m2.y_at(np.linspace(0, 1, 1001)))))


def test_predict_at_nodes_matches_data(m2, fit3):
    for t in fit3.grid.nodes[1:]:
        assert abs(predict(fit3.expansion, m2, t) - m2.y(t)) <= fit3.node_residual_max + 1e-12
    many = predict_many(fit3.expansion, m2, fit3.grid.nodes)
    assert np.max(np.abs(many - m2.y_at(fit3.grid.nodes))) == pytest.approx(fit3.node_residual_max, abs=1e-14)


def test_only_symmetric_part_matters(m2, fit3):
    e = fit3.expansion
    sym = KernelExpansion(e.a, e.symmetric_c(), e.basis)
    assert residual_max(sym, m2) == pytest.approx(fit3.residual_max, rel=1e-9, abs=1e-15)


def test_null_space_direction(m2, fit3):
    e = fit3.expansion
    t = np.linspace(0, 1, 201)
    base = predict_many(e, m2, t)
    c = e.c.copy()
    c[0, 1] += 0.1
    c[1, 0] -= 0.1
    moved = KernelExpansion(e.a, c, e.basis)
    assert np.max(np.abs(predict_many(moved, m2, t) - base)) <= 1e-12
    assert np.linalg.norm(moved.vector()) > np.linalg.norm(e.vector())


def test_lsm_objective_is_minimal(m2):
    rep = identify_lsm(m2, 2, 2, 2, node_count=30)
    sys_ = assemble((2, 2, 2), rep.grid, m2)
    coef = rep.expansion.vector()
    best = np.sum((sys_.matrix @ coef - sys_.rhs) ** 2)
    rng = np.random.default_rng(1)
    for _ in range(50):
        trial = coef + rng.uniform(-1e-3, 1e-3, coef.shape)
        assert best <= np.sum((sys_.matrix @ trial - sys_.rhs) ** 2)


def test_round_trip_in_span():
    pair = in_span_pair()
    rep = identify_collocation(pair, 2, 2, 2)
    assert rep.node_residual_max <= 1e-10
    assert rep.residual_max <= 1e-8
    # kernels recovered up to the null space of the symmetric part
    np.testing.assert_allclose(rep.expansion.a, [1.0, 1.0], atol=1e-7)
    np.testing.assert_allclose(rep.expansion.symmetric_c(), [[1.0, 0.0], [0.0, 0.0]], atol=1e-6)


def test_residual_decays_with_m(m2):
    eps = [identify_collocation(m2, m, m, m).residual_max for m in (3, 4, 5)]
    assert eps[1] < eps[0] and eps[2] < eps[1]


def test_lsm_requires_overdetermination(m2):
    with pytest.raises(ConfigError) as exc:
        identify_lsm(m2, 3, 3, 3, node_count=11)
    assert exc.value.field == "node_count"
    rep = identify_lsm(m2, 3, 3, 3, node_count=12)
    assert rep.method is Method.LEAST_SQUARES and len(rep.grid) == 12


def test_identify_validation(m2):
    with pytest.raises(ConfigError):
        identify_collocation(m2, 0, 3, 3)
    with pytest.raises(ConfigError):
        identify_collocation(m2, 3, 3, 3, T=2.0)


def test_excluding_zero_scheme_runs(m2):
    rep = identify_collocation(m2, 3, 3, 3, scheme=GridScheme.UNIFORM_EXCLUDING_ZERO)
    assert rep.grid.nodes[0] > 0
    assert rep.residual_max < 1e-4


def test_stability_zero_noise_equals_clean(m2, fit3):
    mean = stability_experiment(m2, (3, 3, 3), Method.COLLOCATION, NoiseSpec(0.0, 3, 0))
    assert mean == fit3.residual_max


def test_stability_is_seeded(m2):
    spec = NoiseSpec(1e-3, 2, 42)
    a = stability_residuals(m2, (3, 3, 3), "collocation", spec)
    b = stability_residuals(m2, (3, 3, 3), "collocation", spec)
    np.testing.assert_array_equal(a, b)
    c = stability_residuals(m2, (3, 3, 3), "collocation", NoiseSpec(1e-3, 2, 43))
    assert not np.array_equal(a, c)


def test_report_serialization(fit3):
    d = json.loads(fit3.to_json())
    assert d["method"] == "collocation"
    assert d["sizes"] == {"m": 3, "m1": 3, "m2": 3}
    assert d["numerical_rank"] == 9
    assert d["grid"]["node_count"] == 12
    c = np.array(d["coefficients"]["c"])
    np.testing.assert_allclose(d["coefficients"]["c_symmetric"], 0.5 * (c + c.T))
    assert len(d["config_digest"]) == 16


def test_model1_printed_floor():
    # the printed output is nonzero at t = 0 where every model prediction vanishes
    rep = identify_collocation(model1_pair("printed"), 4, 4, 4)
    assert rep.residual_max >= 100 / 40501 - 1e-15
