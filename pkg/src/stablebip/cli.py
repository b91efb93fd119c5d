"""Command-line front end.

One subcommand per experiment, each reading a single JSON config::

    stablebip mcmc --config configs/canonical_deconvolution.json --out runs/x

Exit codes: 0 success, 2 config parse error, 3 validation failure,
4 numerical failure. Every run writes CSV tables plus ``manifest.json`` with
the resolved config, the seed and sha256 checksums of all other files.
"""

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .deconvolution import (deconvolution_operator, make_deconvolution_family, observation_points,
                            synthetic_data)
from .errors import (DegenerateWeightsError, FactorizationError, IterationLimitError,
                     ParameterDomainError, StableBIPError)
from .inference import (ChainConfig, Regulariser, chain_seeds, chain_summary, map_estimate,
                        mh_sample, pool_chains)
from .posterior_core import build_posterior, gaussian_potential, weighted_mean, zero_potential
from .prob_metrics import hellinger, total_variation
from .series_prior import ExpansionSpec, _gate, sample_prior
from .stable_dist import StableParams, sample_stable
from .wellposedness import (_surrogate_start, discretisation_invariance_study,
                            hellinger_lipschitz_scan, relative_l2)

log = logging.getLogger(__name__)

EXPERIMENTS = ("sample-stable", "sample-prior", "posterior", "hellinger",
               "lipschitz-scan", "invariance", "map", "mcmc")
EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4
NUMERIC_ERRORS = (FactorizationError, DegenerateWeightsError, IterationLimitError,
                  FloatingPointError, np.linalg.LinAlgError)


class ConfigError(Exception):
    """Malformed config: bad JSON, unknown or mistyped field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# ---------------------------------------------------------------- config ----

def _coerce(value, typ, where):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(where, f"expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(where, f"expected true/false, got {value!r}")
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(where, f"expected a string, got {value!r}")
        return value
    if typ == list[float]:
        if not isinstance(value, list):
            raise ConfigError(where, f"expected a list of numbers, got {value!r}")
        return [_coerce(v, float, f"{where}[{i}]") for i, v in enumerate(value)]
    if typ == list[int]:
        if not isinstance(value, list):
            raise ConfigError(where, f"expected a list of integers, got {value!r}")
        return [_coerce(v, int, f"{where}[{i}]") for i, v in enumerate(value)]
    if typ is dict:
        if not isinstance(value, dict):
            raise ConfigError(where, f"expected an object, got {value!r}")
        return value
    if typ == Optional[list[float]]:
        return None if value is None else _coerce(value, list[float], where)
    if typ == Optional[float]:
        return None if value is None else _coerce(value, float, where)
    if dataclasses.is_dataclass(typ):
        return _section(typ, value, where)
    raise TypeError(f"unsupported config type {typ!r}")


def _section(cls, obj, where):
    if not isinstance(obj, dict):
        raise ConfigError(where, f"expected an object, got {obj!r}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    extra = sorted(set(obj) - set(known))
    if extra:
        raise ConfigError(f"{where}.{extra[0]}", "unknown field")
    kwargs = {}
    for name, f in known.items():
        if name in obj:
            kwargs[name] = _coerce(obj[name], f.type, f"{where}.{name}")
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(f"{where}.{name}", "missing required field")
    return cls(**kwargs)


@dataclass
class StableSection:
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 1.0
    delta: float = 0.0
    count: int = 10_000


@dataclass
class ModelSection:
    kind: str = "deconvolution"  # or "zero" for Phi = 0
    observations: int = 16
    kernel_width: float = 3.0 / 64.0
    noise_scale: float = 0.01


@dataclass
class DataSection:
    truth: str = "step"
    seed: int = 0
    values: Optional[list[float]] = None  # explicit data overrides the synthetic truth


@dataclass
class SamplingSection:
    draws: int = 10_000


@dataclass
class MetricSection:
    direction: Optional[list[float]] = None  # default: normalised ones
    perturbation: float = 0.05
    steps: list[float] = field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])
    radius: Optional[float] = None


@dataclass
class ChainSection:
    steps: int = 100_000
    burn_in: int = 20_000
    proposal: str = "coefficient_rw"
    rw_scale: float = 1.0
    thin: int = 10
    chains: int = 1
    start: str = "surrogate"
    quantiles: list[float] = field(default_factory=lambda: [0.05, 0.5, 0.95])


@dataclass
class MapSection:
    regulariser: str = "none"
    weight: float = 0.0
    tol: float = 1e-10
    max_sweeps: int = 10_000
    init: str = "surrogate"


@dataclass
class InvarianceSection:
    sizes: list[int] = field(default_factory=lambda: [16, 32, 64, 128])
    summary: str = "median_mcmc"
    eval_points: int = 16
    alpha: float = 1.0
    level_scale: float = 1.0
    increment_scale: float = 1.0
    scaling: str = "physical"


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    output_dir: str = "out"
    override_gate: bool = False
    prior: dict = field(default_factory=dict)
    stable: StableSection = field(default_factory=StableSection)
    model: ModelSection = field(default_factory=ModelSection)
    data: DataSection = field(default_factory=DataSection)
    sampling: SamplingSection = field(default_factory=SamplingSection)
    metric: MetricSection = field(default_factory=MetricSection)
    chain: ChainSection = field(default_factory=ChainSection)
    map: MapSection = field(default_factory=MapSection)
    invariance: InvarianceSection = field(default_factory=InvarianceSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    cfg = _section(ExperimentConfig, obj, "config")
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("config.experiment", f"unknown experiment {cfg.experiment!r}")
    return cfg


# ------------------------------------------------------------ validation ----

@dataclass
class Resolved:
    """Validated objects built from a config before any computation."""

    cfg: ExperimentConfig
    spec: Optional[ExpansionSpec] = None
    model: object = None
    noise: object = None
    potential: object = None
    y: Optional[np.ndarray] = None


def _check(cond, invariant):
    if not cond:
        raise ParameterDomainError(invariant)


def _data(cfg, model):
    if cfg.model.kind == "zero":
        return np.zeros(0)
    if cfg.data.values is not None:
        y = np.array(cfg.data.values, dtype=float)
        _check(y.size == model.n_obs,
               f"data has {y.size} entries but the model makes {model.n_obs} observations")
        return y
    _check(cfg.data.truth == "step", f"unknown truth {cfg.data.truth!r}")
    m = cfg.model
    return synthetic_data(m.observations, m.kernel_width, m.noise_scale, cfg.data.seed)


def resolve(cfg: ExperimentConfig) -> Resolved:
    """Validate every referenced section; raises StableBIPError subclasses."""
    res = Resolved(cfg)
    ex = cfg.experiment
    if ex == "sample-stable":
        s = cfg.stable
        StableParams(s.alpha, s.beta, s.gamma, s.delta)
        _check(s.count >= 1, "stable.count must be >= 1")
        return res
    if ex == "invariance":
        inv = cfg.invariance
        _check(len(inv.sizes) >= 2, "invariance.sizes needs at least two grid sizes")
        _check(inv.summary in ("median_mcmc", "median_is", "conjugate"),
               f"unknown invariance summary {inv.summary!r}")
        _check(inv.eval_points >= 1, "invariance.eval_points must be >= 1")
        _check(cfg.model.kind == "deconvolution", "invariance needs a deconvolution model")
        for n in inv.sizes:
            spec, model, _ = _family(cfg)(n)
            if inv.summary != "conjugate":
                _gate(spec, cfg.override_gate)
        res.y = _data(cfg, model)
        _chain_config(cfg)
        return res

    try:
        spec = ExpansionSpec.from_dict(cfg.prior)
    except KeyError as exc:
        raise ConfigError(f"config.prior.{exc.args[0]}", "missing required field") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, StableBIPError):
            raise
        raise ConfigError("config.prior", str(exc)) from exc
    _gate(spec, cfg.override_gate)
    res.spec = spec
    cfg.prior = spec.to_dict()
    if cfg.model.kind == "zero":
        res.potential = zero_potential()
    elif cfg.model.kind == "deconvolution":
        m = cfg.model
        res.model, res.noise = deconvolution_operator(spec.basis.grid_size, m.observations,
                                                      m.kernel_width, m.noise_scale)
        res.potential = gaussian_potential(res.model, res.noise)
    else:
        raise ParameterDomainError(f"unknown model kind {cfg.model.kind!r}")
    res.y = _data(cfg, res.model)
    _check(cfg.sampling.draws >= 2, "sampling.draws must be >= 2")
    if ex == "hellinger":
        _direction(cfg, res.y)
    if ex == "lipschitz-scan":
        _direction(cfg, res.y)
        _check(len(cfg.metric.steps) > 0, "metric.steps must not be empty")
    if ex == "mcmc":
        _chain_config(cfg)
        _check(all(0.0 < q < 1.0 for q in cfg.chain.quantiles), "chain.quantiles must lie in (0, 1)")
    if ex == "map":
        Regulariser(cfg.map.regulariser, cfg.map.weight)
        _check(cfg.map.tol > 0.0, "map.tol must be > 0")
        _check(cfg.map.init in ("zero", "surrogate"), f"unknown map init {cfg.map.init!r}")
        _check(res.model is not None or cfg.map.init == "zero", "surrogate init needs a model")
    return res


def _family(cfg):
    m, inv = cfg.model, cfg.invariance

    def family(n):
        return make_deconvolution_family(n, m.observations, m.kernel_width, m.noise_scale,
                                         alpha=inv.alpha, level_scale=inv.level_scale,
                                         increment_scale=inv.increment_scale,
                                         scaling=inv.scaling)
    return family


def _chain_config(cfg, seed=None) -> ChainConfig:
    c = cfg.chain
    _check(c.chains >= 1, "chain.chains must be >= 1")
    _check(c.start in ("prior", "surrogate"), f"unknown chain start {c.start!r}")
    return ChainConfig(c.steps, c.burn_in, c.proposal, c.rw_scale,
                       cfg.seed if seed is None else seed, c.thin)


def _direction(cfg, y):
    _check(y.size > 0, "data perturbations need a non-empty data vector")
    d = (np.ones(y.size) / np.sqrt(y.size) if cfg.metric.direction is None
         else np.array(cfg.metric.direction, dtype=float))
    _check(d.size == y.size, f"metric.direction has {d.size} entries, data has {y.size}")
    _check(np.linalg.norm(d) > 0.0, "metric.direction must be non-zero")
    return d


# ----------------------------------------------------------------- output ----

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v) + 0.0:.17g}"  # + 0.0 folds -0 into 0


def write_table(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, cfg: ExperimentConfig, files):
    manifest = {
        "package_version": __version__,
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "artifacts": {name: _sha256(out / name) for name in sorted(files)},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# ------------------------------------------------------------ experiments ----

def _run_sample_stable(res, out):
    s, cfg = res.cfg.stable, res.cfg
    x = sample_stable(StableParams(s.alpha, s.beta, s.gamma, s.delta), cfg.seed, s.count)
    write_table(out / "samples.csv", ["index", "value"], zip(range(x.size), x))
    return ["samples.csv"]


def _run_sample_prior(res, out):
    draws = sample_prior(res.spec, res.cfg.seed, res.cfg.sampling.draws,
                         override=res.cfg.override_gate)
    grid = res.spec.basis.grid
    write_table(out / "draws.csv", ["draw", "x", "value"],
                ((i, x, v) for i, d in enumerate(draws) for x, v in zip(grid, d.grid_values)))
    return ["draws.csv"]


def _posterior(res, y):
    draws = sample_prior(res.spec, res.cfg.seed, res.cfg.sampling.draws,
                         override=res.cfg.override_gate)
    return draws, build_posterior(draws, res.potential, y)


def _run_posterior(res, out):
    _, post = _posterior(res, res.y)
    write_table(out / "weights.csv", ["draw", "log_weight", "weight"],
                zip(range(post.weights.size), post.log_weights, post.weights))
    mean, se = weighted_mean(post, post.grid_values)
    write_table(out / "summary.csv", ["x", "mean", "std_error"],
                zip(res.spec.basis.grid, mean, se))
    _named_rows(out / "evidence.csv", ["quantity", "value"],
                [(k, getattr(post, k)) for k in ("z_estimate", "z_std_error", "log_z", "ess")])
    return ["weights.csv", "summary.csv", "evidence.csv"]


def _named_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for name, *vals in rows:
            w.writerow([name] + [_fmt(v) for v in vals])


def _run_hellinger(res, out):
    direction = _direction(res.cfg, res.y)
    draws, mu = _posterior(res, res.y)
    nu = build_posterior(draws, res.potential, res.y + res.cfg.metric.perturbation * direction)
    h, tv = hellinger(mu, nu), total_variation(mu, nu)
    _named_rows(out / "metrics.csv", ["metric", "value", "std_error", "sample_count"],
                [("hellinger", h.value, h.std_error, h.sample_count),
                 ("total_variation", tv.value, tv.std_error, tv.sample_count)])
    return ["metrics.csv"]


def _run_lipschitz(res, out):
    cfg = res.cfg
    direction = _direction(cfg, res.y)
    steps = cfg.metric.steps
    r = cfg.metric.radius
    if r is None:
        r = 1.0 + float(np.linalg.norm(res.y)) + max(abs(h) for h in steps) * float(np.linalg.norm(direction))
    draws = sample_prior(res.spec, cfg.seed, cfg.sampling.draws, override=cfg.override_gate)
    scan = hellinger_lipschitz_scan((draws, res.potential), res.y, [direction], steps, r)
    scan.write_csv(out / "scan.csv")
    return ["scan.csv"]


def _run_invariance(res, out):
    cfg, inv = res.cfg, res.cfg.invariance
    points = observation_points(inv.eval_points)
    rows = discretisation_invariance_study(
        _family(cfg), inv.sizes, res.y, inv.summary, cfg.seed, eval_points=points,
        chain=_chain_config(cfg), draws=cfg.sampling.draws, override=cfg.override_gate,
        start=cfg.chain.start, chains=cfg.chain.chains)
    write_table(out / "invariance.csv", ["n", "x", "median"],
                ((r.n, x, v) for r in rows for x, v in zip(points, r.summary)))
    write_table(out / "drift.csv", ["n_coarse", "n_fine", "relative_l2"],
                ((a.n, b.n, relative_l2(a.summary, b.summary)) for a, b in zip(rows, rows[1:])))
    return ["invariance.csv", "drift.csv"]


def _start(res):
    if res.model is None:
        return np.zeros(res.spec.truncation)
    return _surrogate_start(res.spec, res.model, res.noise, res.y)


def _run_map(res, out):
    m = res.cfg.map
    init = np.zeros(res.spec.truncation) if m.init == "zero" else _start(res)
    v = map_estimate(res.potential, Regulariser(m.regulariser, m.weight), res.y, init,
                     res.spec.basis, m.tol, max_sweeps=m.max_sweeps)
    psi = res.spec.basis.matrix[:, : res.spec.truncation]
    write_table(out / "map.csv", ["x", "value"], zip(res.spec.basis.grid, psi @ v))
    write_table(out / "coefficients.csv", ["index", "value"], zip(range(v.size), v))
    return ["map.csv", "coefficients.csv"]


def _run_mcmc(res, out):
    cfg, c = res.cfg, res.cfg.chain
    init = _start(res) if c.start == "surrogate" else None
    seeds = [cfg.seed] if c.chains == 1 else chain_seeds(cfg.seed, c.chains)
    result = pool_chains(mh_sample(res.spec, res.potential, res.y, _chain_config(cfg, s),
                                   override=cfg.override_gate, init=init) for s in seeds)
    k = result.states.shape[1]
    write_table(out / "chain.csv", ["state"] + [f"c{j}" for j in range(k)],
                ([i, *row] for i, row in enumerate(result.states)))
    qs = chain_summary(result, res.spec.basis, c.quantiles)
    write_table(out / "quantiles.csv", ["x"] + [f"q{q:g}" for q in c.quantiles],
                zip(res.spec.basis.grid, *qs))
    _named_rows(out / "diagnostics.csv", ["quantity", "value"],
                [("acceptance_rate", result.acceptance_rate), ("accepted", result.accepted),
                 ("kept_states", result.states.shape[0]),
                 ("min_ess", float(np.min(result.ess_per_coordinate)))])
    return ["chain.csv", "quantiles.csv", "diagnostics.csv"]


RUNNERS = {
    "sample-stable": _run_sample_stable,
    "sample-prior": _run_sample_prior,
    "posterior": _run_posterior,
    "hellinger": _run_hellinger,
    "lipschitz-scan": _run_lipschitz,
    "invariance": _run_invariance,
    "map": _run_map,
    "mcmc": _run_mcmc,
}


def run(cfg: ExperimentConfig) -> int:
    """Validate, compute and write artifacts. Returns the process exit code."""
    try:
        res = resolve(cfg)
    except ConfigError as exc:
        log.error("config error at %s", exc)
        return EXIT_PARSE
    except NUMERIC_ERRORS as exc:
        log.error("numerical failure during setup: %s", exc)
        return EXIT_NUMERIC
    except StableBIPError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_INVALID
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            files = RUNNERS[cfg.experiment](res, out)
    except NUMERIC_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except StableBIPError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_INVALID
    write_manifest(out, cfg, files)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablebip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text, args.config)
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_PARSE
    except ConfigError as exc:
        log.error("config error at %s", exc)
        return EXIT_PARSE
    if cfg.experiment != args.experiment:
        log.error("config error at config.experiment: file says %r, command is %r",
                  cfg.experiment, args.experiment)
        return EXIT_PARSE
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
