"""Input/output signal pairs, ground-truth kernels and measurement noise.

Two model problems are provided. Model 1 drives the system with ``sin(20t)``
and has a closed-form response; Model 2 drives it with ``exp(-3t) sin(10t)``
and its response is produced by the forward quadrature oracle.
"""

from __future__ import annotations

import csv
import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_1d, integrate_2d_tensor

log = logging.getLogger(__name__)

#: Resolution of the piecewise-linear interpolant standing in for a measured input.
NOISY_INPUT_GRID_POINTS = 2048

#: Offset of the printed Model 1 output at t = 0; equals 100/40501.
MODEL1_PRINTED_OFFSET = 100.0 / 40501.0


@dataclass(frozen=True)
class GroundTruthKernels:
    k1: Callable
    k2: Callable


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform noise bounded by ``delta``, repeated over ``trials`` seeded runs."""

    delta: float
    trials: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ConfigError(f"must be a finite nonnegative number, got {self.delta!r}", "delta")
        if self.trials < 1:
            raise ConfigError("must be at least 1", "trials")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("must be an unsigned 64-bit integer", "seed")


@dataclass
class SignalPair:
    """An input ``x`` and output ``y`` on ``[0, T]``.

    Both callables accept numpy arrays. ``knots`` lists the kink locations of a
    piecewise-linear input so integrators can align panels with them.
    """

    x: Callable
    y: Callable
    T: float = 1.0
    oscillation_hint: float = 0.0
    label: str = ""
    knots: np.ndarray | None = field(default=None, repr=False)

    def y_at(self, t) -> np.ndarray:
        return np.asarray(self.y(np.asarray(t, dtype=float)), dtype=float)

    def with_input(self, x, knots=None, label=None) -> "SignalPair":
        return SignalPair(x, self.y, self.T, self.oscillation_hint, label or self.label, knots)


# Model 1 --------------------------------------------------------------------

def model1_input(t):
    return np.sin(20.0 * t)


def model1_output_printed(t):
    """Model 1 output exactly as the closed form is usually quoted.

    Not a true response of the quadratic Volterra model: it is nonzero at t = 0.
    """
    s20, c20 = np.sin(20.0 * t), np.cos(20.0 * t)
    e1, e2, e3 = np.exp(-t), np.exp(-2.0 * t), np.exp(-3.0 * t)
    first = (199.0 * c20**2 - 15.0 * np.sin(40.0 * t) - 200.0 * c20 * e2 + 1.0
             + 10.0 * s20 * e2 + 20.0 * s20 * e1) / 81002.0
    second = (3.0 * s20 - 20.0 * c20 + 850920.0 / 40501.0 * e3) / 409.0
    return first + second


def model1_output_corrected(t):
    """Exact response to ``sin(20t)`` of ``K1(s) = exp(-3s)``, ``K2(s1, s2) = exp(-s1 - 2 s2)``."""
    return model1_output_printed(t) - MODEL1_PRINTED_OFFSET * np.cos(20.0 * t) * np.exp(-t)


MODEL1_KERNELS = GroundTruthKernels(
    k1=lambda s: np.exp(-3.0 * s),
    k2=lambda s1, s2: np.exp(-s1 - 2.0 * s2),
)


# Model 2 --------------------------------------------------------------------

def model2_input(t):
    return np.exp(-3.0 * t) * np.sin(10.0 * t)


MODEL2_KERNELS = GroundTruthKernels(
    k1=lambda s: np.cos(0.5 * s),
    k2=lambda s1, s2: np.sin(s1 + 2.0 * s2),
)


# Forward model --------------------------------------------------------------

def forward_response(kernels: GroundTruthKernels, x, t, cfg: QuadratureConfig = DEFAULT_CONFIG,
                     omega: float = 0.0) -> float:
    """Output of the quadratic Volterra model at time ``t``.

    The second-order term is integrated over the full square, so ``k2`` need
    not be separable or symmetric.
    """
    t = float(t)
    if t == 0.0:
        return 0.0
    lin, err1 = integrate_1d(lambda s: kernels.k1(s) * x(t - s), 0.0, t, cfg, omega)
    quad, err2 = integrate_2d_tensor(
        lambda s1, s2: kernels.k2(s1, s2) * x(t - s1) * x(t - s2), t, cfg, omega)
    if max(err1, err2) > cfg.abs_tol:
        log.warning("forward response at t=%g missed tolerance (%.2e, %.2e)", t, err1, err2)
    return lin + quad


_response_cache: dict = {}
_response_lock = threading.Lock()


class CachedResponse:
    """``y(t)`` from the forward oracle, memoized per (label, t, quadrature digest)."""

    def __init__(self, label, kernels, x, cfg=DEFAULT_CONFIG, omega=0.0):
        self.label = label
        self.kernels = kernels
        self.x = x
        self.cfg = cfg
        self.omega = omega
        self._digest = cfg.digest()

    def _one(self, t):
        key = (self.label, t, self._digest)
        with _response_lock:
            hit = _response_cache.get(key)
        if hit is None:
            hit = forward_response(self.kernels, self.x, t, self.cfg, self.omega)
            with _response_lock:
                _response_cache[key] = hit
        return hit

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.array([self._one(float(v)) for v in t.ravel()])
        return out.reshape(t.shape) if t.ndim else float(out[0])


def model1_pair(variant: str = "corrected", T: float = 1.0) -> SignalPair:
    outputs = {"corrected": model1_output_corrected, "printed": model1_output_printed}
    if variant not in outputs:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {sorted(outputs)}", "model1_variant")
    return SignalPair(model1_input, outputs[variant], float(T), 20.0, f"model1-{variant}")


def model2_pair(cfg: QuadratureConfig = DEFAULT_CONFIG, T: float = 1.0) -> SignalPair:
    y = CachedResponse("model2", MODEL2_KERNELS, model2_input, cfg, omega=10.0)
    return SignalPair(model2_input, y, float(T), 10.0, "model2")


# Sampled signals and noise --------------------------------------------------

class SampledSignal:
    """Piecewise-linear interpolant through ``(t, values)``."""

    def __init__(self, t, values):
        self.t = np.asarray(t, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.t.ndim != 1 or self.t.shape != self.values.shape or self.t.size < 2:
            raise ConfigError("need matching 1-D sample arrays with at least two points", "samples")
        if np.any(np.diff(self.t) <= 0):
            raise ConfigError("sample times must be strictly increasing", "samples")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("sample values must be finite", "samples")

    def __call__(self, t):
        out = np.interp(t, self.t, self.values)
        return float(out) if np.ndim(out) == 0 else out


def _rng(spec: NoiseSpec, trial: int, stream: int):
    return np.random.default_rng(np.random.SeedSequence([spec.seed, trial, stream]))


def perturb(samples, spec: NoiseSpec, trial: int, stream: int = 0) -> np.ndarray:
    """Add i.i.d. uniform noise on ``[-delta, delta]``.

    The draw depends only on ``(spec.seed, trial, stream)``; use distinct
    streams for the input and output of the same trial.
    """
    if not 0 <= trial < spec.trials:
        raise ConfigError(f"trial {trial} outside 0..{spec.trials - 1}", "trial")
    samples = np.asarray(samples, dtype=float)
    if spec.delta == 0:
        return samples.copy()
    return samples + _rng(spec, trial, stream).uniform(-spec.delta, spec.delta, samples.shape)


def noisy_input(pair: SignalPair, spec: NoiseSpec, trial: int,
                points: int = NOISY_INPUT_GRID_POINTS) -> SampledSignal:
    """Perturbed samples of ``pair.x`` on a uniform grid, as a linear interpolant."""
    grid = np.linspace(0.0, pair.T, points)
    return SampledSignal(grid, perturb(pair.x(grid), spec, trial, stream=0))


def read_signal_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``t,value`` CSV with a header row. Lines starting with ``#`` are skipped."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.lstrip().startswith("#")) if r]
    if len(rows) < 3:
        raise ConfigError(f"{path}: need a header row and at least two samples", "csv")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise ConfigError(f"{path}: expected two numeric columns ({exc})", "csv") from None
    return data[:, 0], data[:, 1]


def sampled_pair(x_path, y_path, oscillation_hint: float = 0.0) -> SignalPair:
    """Build a pair from user CSV files sharing one sample grid that starts at t = 0."""
    tx, xv = read_signal_csv(x_path)
    ty, yv = read_signal_csv(y_path)
    if tx.shape != ty.shape or not np.array_equal(tx, ty):
        raise ConfigError("input and output CSV files must share the same sample times", "output_csv")
    if tx[0] != 0.0:
        raise ConfigError("sample times must start at 0", "input_csv")
    x = SampledSignal(tx, xv)
    return SignalPair(x, SampledSignal(ty, yv), float(tx[-1]), oscillation_hint, "user-csv", knots=tx)
