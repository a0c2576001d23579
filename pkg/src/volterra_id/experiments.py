"""Published residual tables and the sweeps that recompute them."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .assembly import GridScheme
from .errors import VolterraError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .signals import NoiseSpec, model1_pair, model2_pair
from .solver import (DEFAULT_EVAL_POINTS, DEFAULT_RCOND, Method, config_digest, identify_collocation,
                     identify_lsm, stability_experiment)

STABILITY_DELTAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
STABILITY_TRIALS = 10
STABILITY_M = 3
STABILITY_LSM_MULTIPLIER = 5

# Reported residuals, keyed by m, (m, multiplier) or delta.
PAPER_VALUES = {
    "T1": {3: 1.41e-2, 4: 1.14e-6, 5: 4.72e-9, 6: 1.77e-12, 7: 1.83e-14, 8: 1.53e-18, 10: 2.84e-26},
    "T2": {(3, 2): 8.07e-4, (5, 2): 4.92e-10, (7, 2): 2.50e-16,
           (3, 5): 8.07e-4, (5, 5): 3.90e-10, (7, 5): 1.50e-16,
           (3, 10): 8.07e-4, (5, 10): 4.90e-10, (7, 10): 2.87e-15},
    "T3": {3: 3.16e-5, 4: 9.85e-9, 5: 8.58e-12, 6: 2.17e-16, 7: 5.37e-20},
    "T4": {1e-2: 0.01729, 1e-3: 2.71e-3, 1e-4: 2.56e-4, 1e-5: 7.54e-5, 1e-6: 1.66e-5},
    "T5": {(3, 2): 2.38e-6, (5, 2): 7.77e-14, (7, 2): 2.93e-16,
           (3, 5): 2.63e-6, (5, 5): 7.46e-14, (7, 5): 3.05e-16,
           (3, 10): 3.48e-6, (5, 10): 7.41e-14, (7, 10): 3.80e-16},
    "T6": {1e-2: 0.00628, 1e-3: 5.11e-4, 1e-4: 6.02e-5, 1e-5: 5.36e-6, 1e-6: 2.64e-6},
}

TABLES = {
    "T1": ("model1", Method.COLLOCATION),
    "T2": ("model1", Method.LEAST_SQUARES),
    "T3": ("model2", Method.COLLOCATION),
    "T4": ("model2", Method.COLLOCATION),
    "T5": ("model2", Method.LEAST_SQUARES),
    "T6": ("model2", Method.LEAST_SQUARES),
}

TABLE_HEADER = ["table", "model", "method", "m", "multiplier", "node_count", "delta", "trials",
                "paper", "computed", "numerical_rank", "status"]


@dataclass(frozen=True)
class RowSpec:
    table: str
    model: str
    method: Method
    m: int
    multiplier: int | None = None
    delta: float | None = None
    trials: int | None = None
    seed: int = 0
    scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO
    cfg: QuadratureConfig = DEFAULT_CONFIG
    rcond: float = DEFAULT_RCOND
    eval_points: int = DEFAULT_EVAL_POINTS

    @property
    def node_count(self) -> int:
        base = self.m + self.m * self.m
        return base if self.multiplier is None else base * self.multiplier

    @property
    def paper(self) -> float:
        values = PAPER_VALUES[self.table]
        if self.delta is not None:
            return values[self.delta]
        return values[self.m if self.multiplier is None else (self.m, self.multiplier)]


@dataclass(frozen=True)
class TableRow:
    spec: RowSpec
    computed: float
    numerical_rank: int | None
    status: str = "ok"

    def cells(self) -> list:
        s = self.spec
        return [s.table, s.model, s.method.value, s.m, s.multiplier, s.node_count, s.delta, s.trials,
                s.paper, self.computed, self.numerical_rank, self.status]


def table_specs(table_id: str, model1_variant: str = "corrected", seed: int = 0,
                scheme: GridScheme = GridScheme.UNIFORM_INCLUDING_ZERO,
                cfg: QuadratureConfig = DEFAULT_CONFIG, rcond: float = DEFAULT_RCOND,
                eval_points: int = DEFAULT_EVAL_POINTS) -> list[RowSpec]:
    if table_id not in TABLES:
        raise VolterraError(f"unknown table {table_id!r}; expected one of {sorted(TABLES)}")
    model, method = TABLES[table_id]
    if model == "model1":
        model = f"model1-{model1_variant}"
    common = dict(table=table_id, model=model, method=method, seed=seed, scheme=GridScheme(scheme),
                  cfg=cfg, rcond=rcond, eval_points=eval_points)
    if table_id in ("T4", "T6"):
        mult = STABILITY_LSM_MULTIPLIER if method is Method.LEAST_SQUARES else None
        return [RowSpec(m=STABILITY_M, multiplier=mult, delta=d, trials=STABILITY_TRIALS, **common)
                for d in STABILITY_DELTAS]
    if method is Method.LEAST_SQUARES:
        return [RowSpec(m=m, multiplier=k, **common) for k in (2, 5, 10) for m in (3, 5, 7)]
    return [RowSpec(m=m, **common) for m in sorted(PAPER_VALUES[table_id])]


def make_pair(model: str, cfg: QuadratureConfig = DEFAULT_CONFIG, T: float = 1.0):
    if model == "model2":
        return model2_pair(cfg, T)
    if model.startswith("model1-"):
        return model1_pair(model.split("-", 1)[1], T)
    raise VolterraError(f"unknown model {model!r}")


def run_row(spec: RowSpec, pair=None) -> TableRow:
    pair = pair or make_pair(spec.model, spec.cfg)
    sizes = (spec.m, spec.m, spec.m)
    nodes = spec.node_count if spec.multiplier is not None else None
    try:
        if spec.delta is not None:
            noise = NoiseSpec(spec.delta, spec.trials, spec.seed)
            value = stability_experiment(pair, sizes, spec.method, noise, nodes, spec.cfg, spec.scheme,
                                         spec.rcond, spec.eval_points)
            return TableRow(spec, value, None)
        if spec.method is Method.COLLOCATION:
            rep = identify_collocation(pair, *sizes, cfg=spec.cfg, scheme=spec.scheme, rcond=spec.rcond,
                                       eval_points=spec.eval_points)
        else:
            rep = identify_lsm(pair, *sizes, node_count=nodes, cfg=spec.cfg, scheme=spec.scheme,
                               rcond=spec.rcond, eval_points=spec.eval_points)
        return TableRow(spec, rep.residual_max, rep.numerical_rank)
    except (VolterraError, ArithmeticError) as exc:
        return TableRow(spec, math.nan, None, f"error: {exc}")


def run_table(specs: list[RowSpec], jobs: int = 1) -> list[TableRow]:
    """Evaluate rows in order; ``jobs > 1`` spreads them over worker processes."""
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_row, specs))
    pairs = {}
    rows = []
    for spec in specs:
        if spec.model not in pairs:
            pairs[spec.model] = make_pair(spec.model, spec.cfg)
        rows.append(run_row(spec, pairs[spec.model]))
    return rows


def table_digest(table_id, model1_variant, seed, scheme, cfg, rcond, eval_points) -> str:
    return config_digest({"table": table_id, "model1_variant": model1_variant, "seed": seed,
                          "scheme": GridScheme(scheme).value, "quadrature": asdict(cfg),
                          "rcond": rcond, "eval_points": eval_points})
