"""Command-line entry point ``volterra-id``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import export
from .assembly import GridScheme, assemble, uniform_grid
from .errors import AssemblyError, ConfigError, IntegrandError, NumericalError
from .experiments import TABLE_HEADER, TABLES, run_table, table_digest, table_specs
from .quadrature import QuadratureConfig
from .signals import NoiseSpec, model1_pair, model2_pair, sampled_pair
from .solver import (DEFAULT_EVAL_POINTS, DEFAULT_RCOND, Method, config_digest, identify_collocation,
                     identify_lsm, noisy_identification, residual_curve, stability_residuals)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
SEED_ENV = "VOLTERRA_ID_SEED"

MODELS = ("model1_corrected", "model1_printed", "model2", "user_csv")

log = logging.getLogger("volterra_id")


def _env_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}", "seed") from None
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{SEED_ENV} must be an unsigned 64-bit integer", "seed")
    return seed


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    method: str
    m: int
    m1: int
    m2: int
    lsm_multiplier: int | None = None
    T: float | None = None
    noise: dict | None = None
    quadrature: dict = field(default_factory=dict)
    seed: int = 0
    grid_scheme: str = GridScheme.UNIFORM_INCLUDING_ZERO.value
    rcond: float = DEFAULT_RCOND
    eval_points: int = DEFAULT_EVAL_POINTS
    input_csv: str | None = None
    output_csv: str | None = None

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object", "config")
        known = set(cls.__dataclass_fields__)
        for key in raw:
            if key not in known:
                raise ConfigError("unknown configuration key", key)
        for key in ("model", "method", "m"):
            if key not in raw:
                raise ConfigError("required", key)
        data = dict(raw)
        data.setdefault("m1", data["m"])
        data.setdefault("m2", data["m"])
        for key in ("input_csv", "output_csv"):
            if data.get(key) and base_dir is not None and not Path(data[key]).is_absolute():
                data[key] = str(base_dir / data[key])
        env = _env_seed()
        if env is not None:
            data["seed"] = env
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"expected one of {list(MODELS)}, got {self.model!r}", "model")
        try:
            method = Method(self.method)
        except ValueError:
            raise ConfigError(f"expected 'collocation' or 'lsm', got {self.method!r}", "method") from None
        for key in ("m", "m1", "m2"):
            v = getattr(self, key)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"must be a positive integer, got {v!r}", key)
        if method is Method.COLLOCATION and self.lsm_multiplier is not None:
            raise ConfigError("only valid with method 'lsm'", "lsm_multiplier")
        if method is Method.LEAST_SQUARES:
            k = self.lsm_multiplier
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ConfigError("required positive integer for method 'lsm'", "lsm_multiplier")
        if self.T is not None and not (isinstance(self.T, (int, float)) and self.T > 0):
            raise ConfigError(f"must be a positive number, got {self.T!r}", "T")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("must be an unsigned 64-bit integer", "seed")
        try:
            GridScheme(self.grid_scheme)
        except ValueError:
            raise ConfigError(f"expected one of {[s.value for s in GridScheme]}", "grid_scheme") from None
        if not (isinstance(self.rcond, float) and 0 < self.rcond < 1):
            raise ConfigError("must be a float in (0, 1)", "rcond")
        if not isinstance(self.eval_points, int) or self.eval_points < 2:
            raise ConfigError("must be an integer >= 2", "eval_points")
        self.quadrature_config()
        self.noise_spec()
        if self.model == "user_csv":
            for key in ("input_csv", "output_csv"):
                if not getattr(self, key):
                    raise ConfigError("required for model 'user_csv'", key)
        else:
            for key in ("input_csv", "output_csv"):
                if getattr(self, key):
                    raise ConfigError("only valid for model 'user_csv'", key)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.m, self.m1, self.m2

    @property
    def node_count(self) -> int:
        base = self.m + self.m1 * self.m2
        return base if self.lsm_multiplier is None else base * self.lsm_multiplier

    def quadrature_config(self) -> QuadratureConfig:
        if not isinstance(self.quadrature, dict):
            raise ConfigError("must be an object", "quadrature")
        known = set(QuadratureConfig.__dataclass_fields__)
        for key in self.quadrature:
            if key not in known:
                raise ConfigError("unknown quadrature option", f"quadrature.{key}")
        return QuadratureConfig(**self.quadrature)

    def noise_spec(self) -> NoiseSpec | None:
        if self.noise is None:
            return None
        if not isinstance(self.noise, dict) or "delta" not in self.noise:
            raise ConfigError("must be an object with at least 'delta'", "noise")
        extra = set(self.noise) - {"delta", "trials"}
        if extra:
            raise ConfigError("unknown noise option", f"noise.{sorted(extra)[0]}")
        return NoiseSpec(float(self.noise["delta"]), int(self.noise.get("trials", 10)), self.seed)

    def digest(self) -> str:
        return config_digest(asdict(self))

    def build_pair(self):
        qcfg = self.quadrature_config()
        T = 1.0 if self.T is None else float(self.T)
        if self.model == "model2":
            return model2_pair(qcfg, T)
        if self.model.startswith("model1_"):
            return model1_pair(self.model.split("_", 1)[1], T)
        pair = sampled_pair(self.input_csv, self.output_csv)
        if self.T is not None and float(self.T) != pair.T:
            raise ConfigError(f"does not match the CSV sample span [0, {pair.T}]", "T")
        return pair


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}", "config") from None
    return ExperimentConfig.from_dict(raw, path.parent)


# Subcommands --------------------------------------------------------------------

def cmd_reproduce(args) -> int:
    seed = _env_seed()
    seed = args.seed if seed is None else seed
    scheme = GridScheme(args.grid_scheme)
    qcfg = QuadratureConfig()
    specs = table_specs(args.table, args.model1_variant, seed, scheme, qcfg, args.rcond)
    digest = table_digest(args.table, args.model1_variant, seed, scheme, qcfg, args.rcond,
                          DEFAULT_EVAL_POINTS)
    rows = run_table(specs, args.jobs)
    path = Path(args.out) / f"table_{args.table}.csv"
    export.write_csv(path, TABLE_HEADER, [r.cells() for r in rows], digest,
                     [f"table={args.table} model1_variant={args.model1_variant} seed={seed} "
                      f"grid={scheme.value}"])
    for r in rows:
        print(f"{r.spec.table} m={r.spec.m} mult={r.spec.multiplier} delta={r.spec.delta} "
              f"paper={r.spec.paper:.3g} computed={r.computed:.3e} {r.status}")
    print(f"wrote {path}")
    return EXIT_NUMERICAL if any(r.status != "ok" for r in rows) else EXIT_OK


def _identify(cfg: ExperimentConfig, pair):
    qcfg = cfg.quadrature_config()
    scheme = GridScheme(cfg.grid_scheme)
    noise = cfg.noise_spec()
    if noise is not None:
        report = noisy_identification(pair, cfg.sizes, cfg.method, noise, 0, cfg.node_count, qcfg, scheme,
                                      cfg.rcond, cfg.eval_points)
        trials = stability_residuals(pair, cfg.sizes, cfg.method, noise, cfg.node_count, qcfg, scheme,
                                     cfg.rcond, cfg.eval_points)
        report.extras["noise"] = {"delta": noise.delta, "trials": noise.trials, "seed": noise.seed,
                                  "trial_residuals": [float(v) for v in trials],
                                  "mean_residual": float(trials.mean())}
        return report
    if Method(cfg.method) is Method.COLLOCATION:
        return identify_collocation(pair, *cfg.sizes, cfg=qcfg, scheme=scheme, rcond=cfg.rcond,
                                    eval_points=cfg.eval_points)
    return identify_lsm(pair, *cfg.sizes, node_count=cfg.node_count, cfg=qcfg, scheme=scheme,
                        rcond=cfg.rcond, eval_points=cfg.eval_points)


def cmd_identify(args) -> int:
    cfg = load_config(args.config)
    pair = cfg.build_pair()
    report = _identify(cfg, pair)
    digest = cfg.digest()
    report.extras["experiment"] = {"config": asdict(cfg), "config_digest": digest}
    out = Path(args.out)
    export.write_atomic(out / "report.json", report.to_json())
    export.write_kernels(out, report.expansion, digest)
    t, y, y_hat = residual_curve(report.expansion, pair, cfg.eval_points, cfg.quadrature_config())
    export.write_residual_curve(out / "residual_curve.csv", t, y, y_hat, digest)
    print(f"{report.method.value} m={cfg.m} m1={cfg.m1} m2={cfg.m2}: residual_max={report.residual_max:.3e} "
          f"rank={report.numerical_rank}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_export_system(args) -> int:
    cfg = load_config(args.config)
    pair = cfg.build_pair()
    grid = uniform_grid(cfg.node_count, pair.T, GridScheme(cfg.grid_scheme))
    system = assemble(cfg.sizes, grid, pair, cfg.quadrature_config())
    paths = export.write_system(args.out, system, cfg.digest())
    print("wrote " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="volterra-id",
                                description="Identify quadratic Volterra kernels with a Chebyshev basis.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    rp = sub.add_parser("reproduce", help="recompute one of the published residual tables")
    rp.add_argument("--table", required=True, choices=sorted(TABLES))
    rp.add_argument("--model1-variant", choices=("printed", "corrected"), default="corrected")
    rp.add_argument("--out", required=True, help="output directory")
    rp.add_argument("--seed", type=int, default=0, help=f"noise seed (overridden by ${SEED_ENV})")
    rp.add_argument("--grid-scheme", choices=[s.value for s in GridScheme],
                    default=GridScheme.UNIFORM_INCLUDING_ZERO.value)
    rp.add_argument("--rcond", type=float, default=DEFAULT_RCOND)
    rp.add_argument("--jobs", type=int, default=1, help="worker processes for table rows")
    rp.set_defaults(func=cmd_reproduce)

    ip = sub.add_parser("identify", help="run one identification job from a JSON config")
    ip.add_argument("--config", required=True)
    ip.add_argument("--out", required=True)
    ip.set_defaults(func=cmd_identify)

    ep = sub.add_parser("export-system", help="write the assembled matrix and right-hand side")
    ep.add_argument("--config", required=True)
    ep.add_argument("--out", required=True)
    ep.set_defaults(func=cmd_export_system)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, AssemblyError, IntegrandError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
