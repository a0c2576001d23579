"""Chebyshev polynomials of the first kind, pulled back to a working interval [0, T]."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

#: Slack allowed on interval endpoints; quadrature nodes can overshoot by round-off.
DOMAIN_TOL = 1e-12


class BasisKind(enum.Enum):
    CHEBYSHEV_FIRST_KIND = "chebyshev1"


@dataclass(frozen=True)
class BasisSet:
    """A family of ``count`` basis functions on ``[0, T]``.

    ``B_i(t) = T_i(2t/T - 1)``, so every member is bounded by 1 in magnitude
    on the working interval.
    """

    count: int
    T: float = 1.0
    kind: BasisKind = BasisKind.CHEBYSHEV_FIRST_KIND

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 1:
            raise ConfigError(f"basis count must be a positive integer, got {self.count!r}", "count")
        if not np.isfinite(self.T) or self.T <= 0:
            raise ConfigError(f"interval length must be positive, got {self.T!r}", "T")

    def to_unit(self, t):
        """Map time ``t`` in ``[0, T]`` to ``u`` in ``[-1, 1]``, clipping boundary round-off."""
        t = np.asarray(t, dtype=float)
        if np.any(t < -DOMAIN_TOL) or np.any(t > self.T + DOMAIN_TOL):
            raise DomainError(f"time outside [0, {self.T}]")
        u = 2.0 * t / self.T - 1.0
        return np.clip(u, -1.0, 1.0)


def _recurrence(u, count):
    """Stack ``T_0(u) .. T_{count-1}(u)`` along a new leading axis."""
    u = np.asarray(u, dtype=float)
    out = np.empty((count,) + u.shape)
    out[0] = 1.0
    if count > 1:
        out[1] = u
    for i in range(1, count - 1):
        out[i + 1] = 2.0 * u * out[i] - out[i - 1]
    return out


def _check_unit(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < -1.0 - DOMAIN_TOL) or np.any(u > 1.0 + DOMAIN_TOL):
        raise DomainError("argument outside [-1, 1]")
    return np.clip(u, -1.0, 1.0)


def chebyshev_eval(i: int, u: float) -> float:
    """``T_i(u)`` by the three-term recurrence."""
    if i < 0:
        raise DomainError(f"polynomial index must be nonnegative, got {i}")
    u = _check_unit(u)
    return float(_recurrence(u, i + 1)[i])


def mapped_eval(basis: BasisSet, i: int, t: float) -> float:
    if not 0 <= i < basis.count:
        raise DomainError(f"basis index {i} outside 0..{basis.count - 1}")
    return float(_recurrence(basis.to_unit(t), basis.count)[i])


def basis_row(basis: BasisSet, t: float) -> np.ndarray:
    """All ``count`` basis values at a single time, in one recurrence pass."""
    return _recurrence(basis.to_unit(t), basis.count)


def basis_matrix(basis: BasisSet, t) -> np.ndarray:
    """Basis values for an array of times; shape ``(count,) + t.shape``."""
    return _recurrence(basis.to_unit(t), basis.count)
