"""Linear system for the expansion coefficients.

Row ``k`` of the design matrix holds ``beta_ik`` (first-order columns) followed
by ``gamma_ijk = beta_ik * beta_jk`` in row-major ``(i, j)`` order. The
second-order integrand factorizes over ``s1`` and ``s2``, so only the 1-D
integrals are ever computed; the 2-D tensor rule is kept as a test oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisSet, basis_matrix, mapped_eval
from .errors import AssemblyError, ConfigError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_1d
from .signals import SignalPair


class GridScheme(enum.Enum):
    UNIFORM_INCLUDING_ZERO = "uniform_including_zero"
    UNIFORM_EXCLUDING_ZERO = "uniform_excluding_zero"


@dataclass(frozen=True)
class NodeGrid:
    nodes: np.ndarray
    scheme: GridScheme

    def __len__(self):
        return len(self.nodes)


def uniform_grid(count: int, T: float = 1.0,
                 scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO) -> NodeGrid:
    """``count`` equally spaced nodes on ``[0, T]``.

    Including zero: ``t_k = k T / (count - 1)``. Excluding zero:
    ``t_k = (k + 1) T / count``.
    """
    scheme = GridScheme(scheme)
    if count < 1:
        raise ConfigError("a grid needs at least one node", "node_count")
    if scheme is GridScheme.UNIFORM_INCLUDING_ZERO:
        nodes = np.linspace(0.0, T, count) if count > 1 else np.array([0.0])
    else:
        nodes = (np.arange(count) + 1.0) * T / count
    nodes.flags.writeable = False
    return NodeGrid(nodes, scheme)


@dataclass(frozen=True)
class AssembledSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    column_map: tuple
    grid: NodeGrid
    sizes: tuple[int, int, int]

    def column_labels(self) -> list[str]:
        return [f"A{c[1]}" if c[0] == "A" else f"C{c[1]}_{c[2]}" for c in self.column_map]


def column_map(m: int, m1: int, m2: int) -> tuple:
    return tuple([("A", i) for i in range(m)] + [("C", i, j) for i in range(m1) for j in range(m2)])


def _input_parts(signal):
    if isinstance(signal, SignalPair):
        return signal.x, signal.oscillation_hint, signal.knots
    return signal, 0.0, None


def _integration_setup(count, t_k, cfg, omega, knots):
    if knots is None:
        return cfg, omega, None
    # piecewise-polynomial integrand of degree `count`: one exact panel per linear piece
    order = max(2, math.ceil((count + 1) / 2))
    return replace(cfg, points_per_panel=order, min_panels_per_unit=1), 0.0, t_k - np.asarray(knots)


def beta_coeff(basis: BasisSet, signal, i: int, t_k: float,
               cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """``beta_ik``: integral over ``[0, t_k]`` of ``B_i(s) x(t_k - s)``.

    ``signal`` is a :class:`SignalPair` or a bare input callable. Returns
    ``(value, error_estimate)``.
    """
    mapped_eval(basis, i, t_k)  # domain and index checks
    x, omega, knots = _input_parts(signal)
    if t_k == 0.0:
        return 0.0, 0.0
    qcfg, omega, bps = _integration_setup(i + 1, t_k, cfg, omega, knots)
    return integrate_1d(lambda s: basis_matrix(basis, s)[i] * x(t_k - s), 0.0, t_k, qcfg, omega, bps)


def beta_row(basis: BasisSet, signal, t_k: float,
             cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, float]:
    """All ``beta_ik`` for ``i < basis.count`` at one node, sharing one panel layout."""
    x, omega, knots = _input_parts(signal)
    if t_k == 0.0:
        return np.zeros(basis.count), 0.0
    qcfg, omega, bps = _integration_setup(basis.count, t_k, cfg, omega, knots)
    value, err = integrate_1d(lambda s: basis_matrix(basis, s) * x(t_k - s), 0.0, t_k, qcfg, omega, bps)
    return np.atleast_1d(np.asarray(value, dtype=float)), err


def gamma_coeff(beta_ik: float, beta_jk: float) -> float:
    return beta_ik * beta_jk


def design_rows(betas: np.ndarray, m: int, m1: int, m2: int) -> np.ndarray:
    """Design-matrix rows from a ``(nodes, count)`` array of beta values."""
    betas = np.atleast_2d(betas)
    gam = gamma_coeff(betas[:, :m1, None], betas[:, None, :m2]).reshape(len(betas), m1 * m2)
    return np.hstack([betas[:, :m], gam])


def beta_table(basis: BasisSet, signal, times, cfg: QuadratureConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Beta values at every time, shape ``(len(times), basis.count)``.

    Raises :class:`AssemblyError` naming the first ``(i, k)`` whose integral
    misses ``cfg.abs_tol``.
    """
    out = np.empty((len(times), basis.count))
    for k, t_k in enumerate(times):
        row, err = beta_row(basis, signal, float(t_k), cfg)
        if err > cfg.abs_tol:
            bad = next((i for i in range(basis.count)
                        if beta_coeff(basis, signal, i, float(t_k), cfg)[1] > cfg.abs_tol), 0)
            raise AssemblyError(
                f"beta integral (i={bad}, k={k}) at t={t_k:g} missed tolerance: {err:.2e}", bad, k)
        out[k] = row
    return out


def assemble(sizes, grid: NodeGrid, pair: SignalPair,
             cfg: QuadratureConfig = DEFAULT_CONFIG) -> AssembledSystem:
    m, m1, m2 = (int(v) for v in sizes)
    if min(m, m1, m2) < 1:
        raise ConfigError(f"expansion sizes must be positive, got {(m, m1, m2)}", "sizes")
    if len(grid) == 0:
        raise ConfigError("grid is empty", "grid")
    if grid.nodes.min() < 0 or grid.nodes.max() > pair.T * (1 + 1e-12):
        raise ConfigError(f"grid nodes must lie in [0, {pair.T}]", "grid")
    basis = BasisSet(max(m, m1, m2), pair.T)
    betas = beta_table(basis, pair, grid.nodes, cfg)
    matrix = design_rows(betas, m, m1, m2)
    rhs = pair.y_at(grid.nodes)
    matrix.flags.writeable = False
    rhs.flags.writeable = False
    return AssembledSystem(matrix, rhs, column_map(m, m1, m2), grid, (m, m1, m2))
