"""Monte Carlo experiments: observe, reconstruct, march backward, score.

Sample ``s`` of an experiment draws its noise from seed ``base_seed + s``, so
results do not depend on execution order or on the number of workers.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
import json
import logging
import math
import os
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import problems
from .params import predicted_rate, select_params
from .regops import OperatorVariant, StabilizedOperator
from .solver import DivergenceError, SchemeConfig, solve_backward, pick_time_index
from .spectral import Grid1D, project
from .statdata import NoiseModel, observe, reconstruct

log = logging.getLogger(__name__)

SEED_ENV = "QRBACKWARD_BASE_SEED"
MAX_EXCLUDED_FRACTION = 0.10
CSV_COLUMNS = ["case", "epsilon", "n", "t_eps", "k", "sample_index", "err_u", "err_v"]


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path
        self.message = message


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    case: str = "test1"
    M: int = 15
    K: int = 100
    T: float = 1.0
    epsilons: tuple = (1e-3, 1e-4, 1e-5)
    theta: float = 0.3
    p: float = 1.0
    samples: int = 100
    base_seed: int = 0
    operator: str = "truncation"
    ell_floor: float = None
    workers: int = 1
    output_dir: str = "results"
    plots: bool = False

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))

    @classmethod
    def from_dict(cls, data):
        validate_config(data)
        output = data.get("output", {})
        kwargs = {k: v for k, v in data.items() if k != "output"}
        if "output" in data:
            kwargs["output_dir"] = output.get("directory", cls.output_dir)
            kwargs["plots"] = output.get("plots", cls.plots)
        cfg = cls(**kwargs)
        if os.environ.get(SEED_ENV):
            try:
                cfg = replace(cfg, base_seed=int(os.environ[SEED_ENV]))
            except ValueError:
                raise ConfigError(SEED_ENV, "must be an integer") from None
        return cfg

    def to_dict(self):
        return asdict(self)


@lru_cache(maxsize=1)
def _schema():
    return json.loads(resources.files(__package__).joinpath("config_schema.json").read_text())


def validate_config(data):
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError("/".join(str(p) for p in err.absolute_path), err.message)


def load_config(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from None
    return ExperimentConfig.from_dict(data)


@dataclass(frozen=True)
class SampleResult:
    sample_index: int
    err_u: float
    err_v: float
    k: int
    error: str = None

    @property
    def excluded(self):
        return self.error is not None


@dataclass
class EpsilonResult:
    epsilon: float
    params: dict
    k: int
    t_k: float
    err_u: np.ndarray
    err_v: np.ndarray
    excluded: list = field(default_factory=list)

    def _included(self, errs):
        return [float(e) for i, e in enumerate(errs) if i not in self.excluded]

    @property
    def mean_u(self):
        vals = self._included(self.err_u)
        return math.fsum(vals) / len(vals) if vals else math.nan

    @property
    def mean_v(self):
        vals = self._included(self.err_v)
        return math.fsum(vals) / len(vals) if vals else math.nan

    def _stderr(self, errs):
        vals = self._included(errs)
        return float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0

    @property
    def stderr_u(self):
        return self._stderr(self.err_u)

    @property
    def stderr_v(self):
        return self._stderr(self.err_v)

    def summary(self):
        return {
            "epsilon": self.epsilon,
            "params": self.params,
            "k": self.k,
            "t_k": self.t_k,
            "mean_err_u": self.mean_u,
            "mean_err_v": self.mean_v,
            "stderr_u": self.stderr_u,
            "stderr_v": self.stderr_v,
            "predicted_rate": self.params.get("predicted_rate"),
            "samples": len(self.err_u),
            "excluded": list(self.excluded),
        }


@dataclass
class ErrorReport:
    config: ExperimentConfig
    results: list

    def to_dict(self):
        return {"config": self.config.to_dict(), "results": [r.summary() for r in self.results]}


@dataclass(frozen=True)
class _Context:
    case: object
    grid: Grid1D
    scheme: SchemeConfig
    params: object
    variant: OperatorVariant
    u_coeffs: np.ndarray
    v_coeffs: np.ndarray
    k: int


def _true_coefficients(f, grid, n):
    # refine so the quadrature grid keeps >= 20 points per period of mode n
    refine = max(10, math.ceil(20 * n / grid.M))
    return project(f, np.arange(1, n + 1), grid, refine=refine)


@lru_cache(maxsize=32)
def _context(cfg, epsilon):
    case = problems.get_case(cfg.case)
    grid = Grid1D(case.interval, cfg.M)
    scheme = SchemeConfig(grid, cfg.K, cfg.T)
    floor = case.ell_floor if cfg.ell_floor is None else cfg.ell_floor
    params = select_params(epsilon, cfg.theta, cfg.p, cfg.T, C1=case.Mbar, ell_floor=floor)
    return _Context(
        case=case,
        grid=grid,
        scheme=scheme,
        params=params,
        variant=OperatorVariant(cfg.operator, case.Mbar),
        u_coeffs=_true_coefficients(case.u_f, grid, params.n),
        v_coeffs=_true_coefficients(case.v_f, grid, params.n),
        k=pick_time_index(params.t_eps, scheme),
    )


def error_metric(traj, k, case, grid):
    """``(1/M) sum_{m=1}^{M} |w_{m,k} - w_exact(x_m, 0)|^2`` for ``w = u, v``."""
    if not 0 <= k < len(traj):
        raise ValueError(f"level {k} outside trajectory of length {len(traj)}")
    x = grid.x[1:]
    du = traj.u[k, 1:] - case.u_exact(x, 0.0)
    dv = traj.v[k, 1:] - case.v_exact(x, 0.0)
    return math.fsum(du * du) / grid.M, math.fsum(dv * dv) / grid.M


def run_sample(cfg, epsilon, sample_index, exact_terminal=False):
    """Errors ``(E_u, E_v)`` of one Monte Carlo sample at the level nearest ``t_eps``.

    With ``exact_terminal`` the noisy reconstruction is replaced by the true
    terminal samples (no noise, no truncation). Divergence is reported in
    ``SampleResult.error`` rather than raised.
    """
    ctx = _context(cfg, float(epsilon))
    grid = ctx.grid
    if exact_terminal:
        u_T, v_T = ctx.case.u_f(grid.x), ctx.case.v_f(grid.x)
        u_T[[0, -1]] = 0.0
        v_T[[0, -1]] = 0.0
    else:
        noise = NoiseModel(float(epsilon), cfg.base_seed + sample_index)
        obs = observe(ctx.u_coeffs, ctx.v_coeffs, noise, ctx.params.n)
        u_T, v_T = reconstruct(obs, grid)
    try:
        traj = solve_backward((u_T, v_T), ctx.case, ctx.params, ctx.scheme, ctx.variant)
    except DivergenceError as e:
        return SampleResult(sample_index, math.nan, math.nan, ctx.k, error=str(e))
    err_u, err_v = error_metric(traj, ctx.k, ctx.case, grid)
    return SampleResult(sample_index, err_u, err_v, ctx.k)


def _run_batch(args):
    cfg, epsilon, indices = args
    return [run_sample(cfg, epsilon, i) for i in indices]


def run_epsilon(cfg, epsilon, executor=None):
    ctx = _context(cfg, float(epsilon))
    if executor is None:
        results = [run_sample(cfg, epsilon, i) for i in range(cfg.samples)]
    else:
        chunks = [list(range(i, cfg.samples, cfg.workers)) for i in range(cfg.workers)]
        results = [r for batch in executor.map(_run_batch, [(cfg, epsilon, c) for c in chunks]) for r in batch]
    results.sort(key=lambda r: r.sample_index)
    excluded = [r.sample_index for r in results if r.excluded]
    for r in results:
        if r.excluded:
            log.warning("eps=%g sample %d excluded: %s", epsilon, r.sample_index, r.error)
    if len(excluded) > MAX_EXCLUDED_FRACTION * cfg.samples:
        raise ExperimentError(
            f"eps={epsilon}: {len(excluded)} of {cfg.samples} samples diverged (limit 10%)"
        )
    params = ctx.params.as_dict()
    t_k = ctx.scheme.time(ctx.k)
    params["predicted_rate"] = predicted_rate(t_k, ctx.params)
    return EpsilonResult(
        epsilon=float(epsilon),
        params=params,
        k=ctx.k,
        t_k=t_k,
        err_u=np.array([r.err_u for r in results]),
        err_v=np.array([r.err_v for r in results]),
        excluded=excluded,
    )


def run_experiment(cfg):
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = [run_epsilon(cfg, eps, ex) for eps in cfg.epsilons]
    else:
        results = [run_epsilon(cfg, eps) for eps in cfg.epsilons]
    return ErrorReport(cfg, results)


def _open(path, mode="w"):
    try:
        return open(path, mode, newline="")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e


def emit(report, directory=None, plots=None):
    """Write ``errors.csv``, ``summary.json`` and (optionally) SVG plots; return the paths."""
    directory = Path(report.config.output_dir if directory is None else directory)
    plots = report.config.plots if plots is None else plots
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create {directory}: {e.strerror}") from e
    csv_path = directory / "errors.csv"
    with _open(csv_path) as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for res in report.results:
            for i, (eu, ev) in enumerate(zip(res.err_u, res.err_v)):
                writer.writerow([
                    report.config.case, repr(res.epsilon), res.params["n"], repr(res.params["t_eps"]),
                    res.k, i, repr(float(eu)), repr(float(ev)),
                ])
    json_path = directory / "summary.json"
    with _open(json_path) as fh:
        json.dump(report.to_dict(), fh, indent=2)
    paths = [csv_path, json_path]
    if plots and report.results:
        from .plots import plot_report

        paths.extend(plot_report(report, directory))
    return paths
