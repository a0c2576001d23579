"""Composite Gauss-Legendre quadrature on uniform panels with uniform refinement.

Integrands are called with a 1-D array of abscissae and may return either an
array of the same length or a stacked array ``(..., n)`` for vector-valued
integrals; all components share one panel layout and the refinement loop stops
when every component has settled.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, IntegrandError

MAX_RULE_ORDER = 64


@dataclass(frozen=True)
class QuadratureConfig:
    points_per_panel: int = 16
    min_panels_per_unit: int = 1
    refine_factor: int = 2
    abs_tol: float = 1e-13
    max_refinements: int = 10

    def __post_init__(self):
        if not 2 <= self.points_per_panel <= MAX_RULE_ORDER:
            raise ConfigError(f"must lie in 2..{MAX_RULE_ORDER}", "points_per_panel")
        if self.min_panels_per_unit < 1:
            raise ConfigError("must be at least 1", "min_panels_per_unit")
        if self.refine_factor < 2:
            raise ConfigError("must be at least 2", "refine_factor")
        if not self.abs_tol > 0:
            raise ConfigError("must be positive", "abs_tol")
        if self.max_refinements < 1:
            raise ConfigError("must be at least 1", "max_refinements")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


DEFAULT_CONFIG = QuadratureConfig()


@functools.lru_cache(maxsize=None)
def _rule(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    if int(n) != n or not 1 <= n <= MAX_RULE_ORDER:
        raise ConfigError(f"rule order must lie in 1..{MAX_RULE_ORDER}, got {n!r}", "n")
    nodes, weights = _rule(int(n))
    return nodes.copy(), weights.copy()


def panels_per_unit(cfg: QuadratureConfig, omega: float = 0.0) -> int:
    """Panel density giving at most half an oscillation period per panel."""
    return max(cfg.min_panels_per_unit, math.ceil(abs(omega) / math.pi))


def _base_edges(a, b, cfg, omega, breakpoints):
    n = max(1, math.ceil(panels_per_unit(cfg, omega) * (b - a) - 1e-9))
    edges = np.linspace(a, b, n + 1)
    if breakpoints is not None:
        bp = np.asarray(breakpoints, dtype=float)
        bp = bp[(bp > a) & (bp < b)]
        edges = np.unique(np.concatenate([edges, bp]))
        # merge slivers left by breakpoints landing next to a uniform edge
        keep = np.concatenate([[True], np.diff(edges) > 1e-14 * max(1.0, b - a)])
        edges = edges[keep]
        edges[-1] = b
    return edges


def _split(edges, pieces):
    if pieces == 1:
        return edges
    frac = np.arange(pieces) / pieces
    left = edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * frac
    return np.append(left.ravel(), edges[-1])


def composite_nodes(edges, order):
    """Abscissae and weights of the composite rule over the given panel edges."""
    g, w = _rule(order)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * g).ravel()
    ws = (half[:, None] * w).ravel()
    return s, ws


def _checked(values):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise IntegrandError("integrand produced a non-finite sample")
    return values


def _refine(estimate, edges, cfg):
    prev = estimate(edges)
    err = math.inf
    for level in range(1, cfg.max_refinements + 1):
        cur = estimate(_split(edges, cfg.refine_factor**level))
        err = float(np.max(np.abs(cur - prev)))
        prev = cur
        if err <= cfg.abs_tol:
            break
    if np.ndim(prev) == 0:
        prev = float(prev)
    return prev, err


def integrate_1d(f, a, b, cfg: QuadratureConfig = DEFAULT_CONFIG, omega=0.0, breakpoints=None):
    """Integrate ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)`` where the estimate is the last difference
    between successive refinements. An estimate above ``cfg.abs_tol`` means the
    refinement budget ran out; the caller decides whether that is fatal.

    ``breakpoints`` are extra panel edges, used for integrands with kinks
    (piecewise-linear sampled signals) so each panel sees a smooth piece.
    """
    a = float(a)
    b = float(b)
    if b < a:
        raise ConfigError(f"need a <= b, got [{a}, {b}]", "interval")
    if a == b:
        return 0.0, 0.0

    def estimate(edges):
        s, ws = composite_nodes(edges, cfg.points_per_panel)
        return _checked(f(s)) @ ws

    return _refine(estimate, _base_edges(a, b, cfg, omega, breakpoints), cfg)


def integrate_2d_tensor(f, t, cfg: QuadratureConfig = DEFAULT_CONFIG, omega=0.0):
    """Integrate ``f(s1, s2)`` over the square ``[0, t]^2`` with a tensor-product rule.

    ``f`` receives two broadcastable arrays (a column and a row of abscissae).
    """
    t = float(t)
    if t < 0:
        raise ConfigError(f"square side must be nonnegative, got {t}", "t")
    if t == 0:
        return 0.0, 0.0

    def estimate(edges):
        s, ws = composite_nodes(edges, cfg.points_per_panel)
        vals = _checked(f(s[:, None], s[None, :]))
        return ws @ vals @ ws

    return _refine(estimate, _base_edges(0.0, t, cfg, omega, None), cfg)
