"""Kernel identification by collocation or least squares, and residual evaluation."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .assembly import (AssembledSystem, GridScheme, NodeGrid, assemble, beta_row, beta_table,
                       design_rows, uniform_grid)
from .basis import BasisSet, basis_matrix
from .errors import ConfigError, NumericalError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .signals import NoiseSpec, SignalPair, noisy_input, perturb

DEFAULT_RCOND = 1e-12
DEFAULT_EVAL_POINTS = 1001


class Method(enum.Enum):
    COLLOCATION = "collocation"
    LEAST_SQUARES = "lsm"


@dataclass(frozen=True)
class KernelExpansion:
    """First-order coefficients ``a`` (length m) and second-order ``c`` (m1 x m2)."""

    a: np.ndarray
    c: np.ndarray
    basis: BasisSet

    @classmethod
    def from_vector(cls, coef, m, m1, m2, T=1.0):
        coef = np.asarray(coef, dtype=float)
        if coef.shape != (m + m1 * m2,):
            raise ConfigError(f"expected {m + m1 * m2} coefficients, got {coef.shape}", "coefficients")
        return cls(coef[:m].copy(), coef[m:].reshape(m1, m2).copy(), BasisSet(max(m, m1, m2), T))

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.a), self.c.shape[0], self.c.shape[1]

    def vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.c.ravel()])

    def symmetric_c(self) -> np.ndarray:
        """Observable part of ``c``; only defined for square ``c``."""
        if self.c.shape[0] != self.c.shape[1]:
            return self.c.copy()
        return 0.5 * (self.c + self.c.T)

    def k1(self, s) -> np.ndarray:
        return np.tensordot(self.a, basis_matrix(self.basis, s)[: len(self.a)], axes=1)

    def k2(self, s1, s2, symmetric=True) -> np.ndarray:
        m1, m2 = self.c.shape
        c = self.symmetric_c() if symmetric else self.c
        b1 = basis_matrix(self.basis, s1)[:m1]
        b2 = basis_matrix(self.basis, s2)[:m2]
        return np.einsum("i...,ij,j...->...", b1, c, b2)


@dataclass(frozen=True)
class IdentificationReport:
    expansion: KernelExpansion
    method: Method
    residual_max: float
    node_residual_max: float
    numerical_rank: int
    truncation_threshold: float
    grid: NodeGrid
    config_digest: str
    label: str = ""
    eval_points: int = DEFAULT_EVAL_POINTS
    quadrature: QuadratureConfig = DEFAULT_CONFIG
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        e = self.expansion
        m, m1, m2 = e.sizes
        return {
            "label": self.label,
            "method": self.method.value,
            "sizes": {"m": m, "m1": m1, "m2": m2},
            "T": e.basis.T,
            "basis": e.basis.kind.value,
            "grid": {"scheme": self.grid.scheme.value, "node_count": len(self.grid)},
            "residual_max": float(self.residual_max),
            "node_residual_max": float(self.node_residual_max),
            "numerical_rank": int(self.numerical_rank),
            "truncation_threshold": float(self.truncation_threshold),
            "eval_points": int(self.eval_points),
            "quadrature": asdict(self.quadrature),
            "config_digest": self.config_digest,
            "coefficients": {
                "a": [float(v) for v in e.a],
                "c": [[float(v) for v in row] for row in e.c],
                "c_symmetric": [[float(v) for v in row] for row in e.symmetric_c()],
            },
            **self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def config_digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# Solving ----------------------------------------------------------------------

def min_norm_lstsq(matrix, rhs, rcond: float = DEFAULT_RCOND) -> tuple[np.ndarray, int]:
    """Minimum-norm least-squares solution by truncated SVD.

    Singular values below ``rcond * sigma_max`` are discarded. Returns the
    coefficients and the numerical rank.
    """
    matrix = np.asarray(matrix, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if matrix.size == 0:
        raise NumericalError("empty system matrix")
    if not 0 < rcond < 1:
        raise ConfigError(f"must lie in (0, 1), got {rcond}", "rcond")
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        raise NumericalError("system contains non-finite entries")
    try:
        coef, _, rank, _ = np.linalg.lstsq(matrix, rhs, rcond=rcond)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    return coef, int(rank)


def solve_min_norm(system: AssembledSystem, rcond: float = DEFAULT_RCOND) -> tuple[np.ndarray, int]:
    return min_norm_lstsq(system.matrix, system.rhs, rcond)


# Prediction and residuals -------------------------------------------------------

def predict(expansion: KernelExpansion, x, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Model output at one time; the beta vector is computed once and shared by both terms."""
    m, m1, _ = expansion.sizes
    b, _ = beta_row(expansion.basis, x, float(t), cfg)
    return float(expansion.a @ b[:m] + b[:m1] @ expansion.c @ b[: expansion.c.shape[1]])


def _dense_betas(expansion, pair, times, cfg):
    if not isinstance(pair, SignalPair) or pair.knots is not None:
        return beta_table(expansion.basis, pair, times, cfg)
    cache = pair.__dict__.setdefault("_beta_cache", {})
    key = (expansion.basis.count, expansion.basis.T, len(times), float(times[-1]), cfg.digest())
    if key not in cache:
        cache[key] = beta_table(expansion.basis, pair, times, cfg)
    return cache[key]


def predict_many(expansion: KernelExpansion, signal, times, cfg: QuadratureConfig = DEFAULT_CONFIG):
    times = np.asarray(times, dtype=float)
    betas = _dense_betas(expansion, signal, times, cfg)
    return design_rows(betas, *expansion.sizes) @ expansion.vector()


def residual_curve(expansion: KernelExpansion, pair: SignalPair, eval_points: int = DEFAULT_EVAL_POINTS,
                   cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``(t, y, y_hat)`` on ``eval_points`` uniform points covering ``[0, T]``."""
    if eval_points < 2:
        raise ConfigError("need at least two evaluation points", "eval_points")
    t = np.linspace(0.0, pair.T, eval_points)
    return t, pair.y_at(t), predict_many(expansion, pair, t, cfg)


def residual_max(expansion: KernelExpansion, pair: SignalPair, eval_points: int = DEFAULT_EVAL_POINTS,
                 cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Largest absolute output mismatch over a dense uniform grid on ``[0, T]``."""
    _, y, y_hat = residual_curve(expansion, pair, eval_points, cfg)
    return float(np.max(np.abs(y - y_hat)))


# Identification -----------------------------------------------------------------

def _check_sizes(m, m1, m2):
    for name, v in (("m", m), ("m1", m1), ("m2", m2)):
        if int(v) != v or v < 1:
            raise ConfigError(f"must be a positive integer, got {v!r}", name)


def _check_T(pair, T):
    if T is not None and float(T) != pair.T:
        raise ConfigError(f"T={T} does not match the signal interval [0, {pair.T}]", "T")


def _identify(pair, sizes, grid, method, cfg, rcond, eval_points, rhs_override=None, reference=None):
    system = assemble(sizes, grid, pair, cfg)
    if rhs_override is not None:
        system = replace(system, rhs=np.asarray(rhs_override, dtype=float))
    coef, rank = solve_min_norm(system, rcond)
    expansion = KernelExpansion.from_vector(coef, *sizes, T=pair.T)
    node_res = float(np.max(np.abs(system.matrix @ coef - system.rhs)))
    ref = pair if reference is None else reference
    eps = residual_max(expansion, ref, eval_points, cfg)
    digest = config_digest({
        "label": pair.label, "method": method.value, "sizes": list(sizes), "T": pair.T,
        "grid": grid.scheme.value, "nodes": len(grid), "rcond": rcond,
        "eval_points": eval_points, "quadrature": asdict(cfg),
    })
    return IdentificationReport(expansion, method, eps, node_res, rank, rcond, grid, digest,
                                pair.label, eval_points, cfg)


def identify_collocation(pair: SignalPair, m: int, m1: int, m2: int, T: float | None = None,
                         cfg: QuadratureConfig = DEFAULT_CONFIG,
                         scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO,
                         rcond: float = DEFAULT_RCOND,
                         eval_points: int = DEFAULT_EVAL_POINTS) -> IdentificationReport:
    """Square system: as many nodes as unknowns, ``m + m1 * m2``."""
    _check_sizes(m, m1, m2)
    _check_T(pair, T)
    grid = uniform_grid(m + m1 * m2, pair.T, scheme)
    return _identify(pair, (m, m1, m2), grid, Method.COLLOCATION, cfg, rcond, eval_points)


def identify_lsm(pair: SignalPair, m: int, m1: int, m2: int, T: float | None = None,
                 node_count: int | None = None, cfg: QuadratureConfig = DEFAULT_CONFIG,
                 scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO,
                 rcond: float = DEFAULT_RCOND,
                 eval_points: int = DEFAULT_EVAL_POINTS) -> IdentificationReport:
    """Overdetermined system on ``node_count`` uniform nodes, solved in the least-squares sense."""
    _check_sizes(m, m1, m2)
    _check_T(pair, T)
    unknowns = m + m1 * m2
    if node_count is None or node_count <= unknowns - 1:
        raise ConfigError(f"least squares needs more than {unknowns - 1} nodes, got {node_count}",
                          "node_count")
    grid = uniform_grid(int(node_count), pair.T, scheme)
    return _identify(pair, (m, m1, m2), grid, Method.LEAST_SQUARES, cfg, rcond, eval_points)


def _node_count(method, sizes, node_count):
    m, m1, m2 = sizes
    if Method(method) is Method.COLLOCATION:
        return m + m1 * m2
    if node_count is None or node_count <= m + m1 * m2 - 1:
        raise ConfigError(f"least squares needs more than {m + m1 * m2 - 1} nodes", "node_count")
    return int(node_count)


def noisy_identification(pair: SignalPair, sizes, method, noise: NoiseSpec, trial: int,
                         node_count: int | None = None, cfg: QuadratureConfig = DEFAULT_CONFIG,
                         scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO,
                         rcond: float = DEFAULT_RCOND,
                         eval_points: int = DEFAULT_EVAL_POINTS) -> IdentificationReport:
    """Identify from perturbed input and output samples; score against the clean pair.

    The perturbed input is a linear interpolant of noisy samples. The node
    values of ``y`` receive independent noise from the same trial.
    """
    method = Method(method)
    sizes = tuple(int(v) for v in sizes)
    _check_sizes(*sizes)
    grid = uniform_grid(_node_count(method, sizes, node_count), pair.T, scheme)
    if noise.delta == 0:
        return _identify(pair, sizes, grid, method, cfg, rcond, eval_points)
    xn = noisy_input(pair, noise, trial)
    noisy = pair.with_input(xn, knots=xn.t, label=f"{pair.label}+noise")
    rhs = perturb(pair.y_at(grid.nodes), noise, trial, stream=1)
    return _identify(noisy, sizes, grid, method, cfg, rcond, eval_points, rhs_override=rhs, reference=pair)


def stability_residuals(pair: SignalPair, sizes, method, noise: NoiseSpec, node_count: int | None = None,
                        cfg: QuadratureConfig = DEFAULT_CONFIG,
                        scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO,
                        rcond: float = DEFAULT_RCOND,
                        eval_points: int = DEFAULT_EVAL_POINTS) -> np.ndarray:
    """Clean-output residual of each noisy trial."""
    return np.array([
        noisy_identification(pair, sizes, method, noise, trial, node_count, cfg, scheme, rcond,
                             eval_points).residual_max
        for trial in range(noise.trials)
    ])


def stability_experiment(pair: SignalPair, sizes, method, noise: NoiseSpec, node_count: int | None = None,
                         cfg: QuadratureConfig = DEFAULT_CONFIG,
                         scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO,
                         rcond: float = DEFAULT_RCOND,
                         eval_points: int = DEFAULT_EVAL_POINTS) -> float:
    """Mean clean-output residual over ``noise.trials`` seeded perturbations."""
    return float(np.mean(stability_residuals(pair, sizes, method, noise, node_count, cfg, scheme,
                                             rcond, eval_points)))
