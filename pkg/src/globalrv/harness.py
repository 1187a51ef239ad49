"""Monte Carlo experiments over the estimator registry.

An experiment simulates ``trials`` paths from one model, evaluates a list of
estimator labels on each, and summarises error ratios.  A sweep repeats this
over a grid of model and estimator parameters; grid cells that only differ
in estimator parameters share the simulated paths (same seeds, so the
result is the same as simulating again).

Estimator labels::

    rv, bv, mrv, trv[rho]
    grv[a]                        GRV on raw increments (unit spot variance)
    grv.lgrv[a], grv.mrv[a]       GRV normalised by LGRV / local minRV
    wgrv.lgrv[a], wgrv.mrv[a]     Winsorized counterparts
    grv.lgrv.mov, wgrv.lgrv.mov   moving threshold, LGRV normalisation

``[a]`` may be omitted, in which case ``params.alpha`` is used.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Iterable, Sequence

import numpy as np

from . import estimators as est
from .numcore import norm_quantile
from .pathdata import SampledPath, TruncationConfig
from .simulate import (DiffusionSpec, JumpSpec, root_quadratic_model, simulate_batch,
                       sine_squared_model, trial_seed)
from .spotvol import SpotVolSeries, WindowConfig, spot_series

__all__ = [
    "ConfigError",
    "EstimatorParams",
    "ExperimentConfig",
    "ExperimentResult",
    "LabelSpec",
    "SummaryRow",
    "TrialRecord",
    "config_from_dict",
    "estimate_by_label",
    "parse_label",
    "qq_data",
    "run_experiment",
    "run_sweep",
    "summarize",
]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Bad estimator label or experiment configuration."""


# -- labels ------------------------------------------------------------------

@dataclass(frozen=True)
class LabelSpec:
    method: str                 # rv | bv | mrv | trv | grv | wgrv
    spot: str = "unit"          # unit | lgrv | local-minrv
    param: float | None = None  # rho for trv, alpha for fixed-ratio filters
    moving: bool = False


_LABEL_RE = re.compile(
    r"^(?P<method>rv|bv|mrv|trv|grv|wgrv)"
    r"(?:\.(?P<spot>lgrv|mrv))?"
    r"(?P<mov>\.mov)?"
    r"(?:\[(?P<param>[0-9.eE+-]+)\])?$"
)


def parse_label(label: str) -> LabelSpec:
    m = _LABEL_RE.match(label.strip())
    if m is None:
        raise ConfigError(f"unknown estimator label {label!r}")
    method, spot, mov, param = m["method"], m["spot"], m["mov"], m["param"]
    value = None
    if param is not None:
        try:
            value = float(param)
        except ValueError:
            raise ConfigError(f"bad parameter in label {label!r}") from None
    if method in ("rv", "bv", "mrv"):
        if spot or mov or param is not None:
            raise ConfigError(f"label {label!r} takes no modifiers")
        return LabelSpec(method)
    if method == "trv":
        if spot or mov or value is None:
            raise ConfigError(f"label {label!r} must look like trv[rho]")
        return LabelSpec("trv", param=value)
    if mov:
        if spot != "lgrv" or param is not None:
            raise ConfigError(f"moving-threshold label {label!r} must be {method}.lgrv.mov")
        return LabelSpec(method, "lgrv", None, True)
    if method == "wgrv" and spot is None:
        raise ConfigError(f"Winsorized label {label!r} needs a spot estimator (.lgrv or .mrv)")
    return LabelSpec(method, {"lgrv": "lgrv", "mrv": "local-minrv", None: "unit"}[spot], value)


@dataclass(frozen=True)
class EstimatorParams:
    """Tuning constants shared by the estimator registry.

    ``alpha0`` (the LGRV cut-off) defaults to the label's ``alpha`` for the
    fixed-ratio filters and to ``alpha`` for the moving-threshold ones.
    ``kappa`` overrides the rule ``floor(kappa_B * n**kappa_c)``.
    """

    alpha: float = 0.2
    alpha0: float | None = None
    kappa: int | None = None
    kappa_B: float = 10.0
    kappa_c: float = 0.45
    B: float = 10.0
    delta1: float = 0.45
    qn: float | None = None
    cK: float = 1.0
    B0: float = 5.0
    delta0: float = 0.1
    truncate: bool = True

    @property
    def trunc(self) -> TruncationConfig:
        return TruncationConfig(self.cK, self.B0, self.delta0, self.truncate)

    def window(self, n: int) -> WindowConfig:
        if self.kappa is not None:
            return WindowConfig(int(self.kappa))
        return WindowConfig.from_rule(n, self.kappa_B, self.kappa_c)


_PARAM_FIELDS = {f for f in EstimatorParams.__dataclass_fields__}


def _spot(path: SampledPath, method: str, alpha0: float, params: EstimatorParams,
          cache: dict | None) -> SpotVolSeries:
    if method == "unit":
        return SpotVolSeries.unit(path.n)
    win = params.window(path.n)
    key = (method, alpha0 if method == "lgrv" else None, win.kappa, params.trunc)
    if cache is not None and key in cache:
        return cache[key]
    s = spot_series(path, method, alpha0, win, params.trunc)
    if cache is not None:
        cache[key] = s
    return s


def estimate_by_label(label: str, path: SampledPath, params: EstimatorParams | None = None,
                      cache: dict | None = None) -> est.Estimate:
    """Evaluate one registry label on ``path``.

    ``cache`` (any dict, one per path) lets several labels share spot series.
    """
    params = params or EstimatorParams()
    spec = parse_label(label)
    if spec.method == "rv":
        return est.rv(path)
    if spec.method == "bv":
        return est.bv(path)
    if spec.method == "mrv":
        return est.minrv(path)
    if spec.method == "trv":
        e = est.trv(path, spec.param)
        return replace(e, label=label)
    trunc = params.trunc
    if spec.moving:
        alpha0 = params.alpha0 if params.alpha0 is not None else params.alpha
        spot = _spot(path, spec.spot, alpha0, params, cache)
        cfg = est.MovingThresholdConfig(spot, params.B, params.delta1, params.qn, trunc)
        fn = est.grv_moving if spec.method == "grv" else est.wgrv_moving
        return fn(path, cfg, label=label)
    alpha = spec.param if spec.param is not None else params.alpha
    alpha0 = params.alpha0 if params.alpha0 is not None else alpha
    spot = _spot(path, spec.spot, alpha0, params, cache)
    cfg = est.FixedAlphaConfig(alpha, spot, trunc)
    fn = est.grv_fixed if spec.method == "grv" else est.wgrv_fixed
    return fn(path, cfg, label=label)


# -- configuration -----------------------------------------------------------

_MODEL_FAMILIES = {"root-quadratic": root_quadratic_model, "sine-squared": sine_squared_model}
_MODEL_KEYS = {"theta", "sigma", "eta", "x0"}
_JUMP_KEYS = {"kind", "lambda", "mu", "nu", "lambda0", "lambda_c", "mean_disp", "nu_j", "feedback"}
# sweepable names that change the simulated paths
_MODEL_SWEEP = {"theta", "sigma", "eta", "x0", "lambda", "mu", "nu", "lambda0", "lambda_c",
                "nu_j", "n"}


@dataclass(frozen=True)
class ModelConfig:
    family: str = "root-quadratic"
    theta: float = 0.2
    sigma: float = 1.0
    eta: float = 3.0
    x0: float = 1.0

    def build(self) -> DiffusionSpec:
        return _MODEL_FAMILIES[self.family](self.theta, self.sigma, self.eta, self.x0)


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig = ModelConfig()
    jumps: JumpSpec = JumpSpec()
    n: int = 2000
    T: float = 1.0
    trials: int = 500
    seed: int = 0
    substeps: int = 20
    estimators: tuple = ("bv", "mrv", "grv.lgrv[0.20]")
    params: EstimatorParams = EstimatorParams()
    sweep: tuple = ()           # ((name, (v1, v2, ...)), ...)
    batch_size: int = 100

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if not self.estimators:
            raise ConfigError("no estimators configured")
        for label in self.estimators:
            parse_label(label)
        for name, values in self.sweep:
            if name not in _MODEL_SWEEP and name not in _PARAM_FIELDS:
                raise ConfigError(f"cannot sweep over unknown parameter {name!r}")
            if not values:
                raise ConfigError(f"sweep over {name!r} has no values")

    def to_dict(self) -> dict:
        d = {
            "model": {"family": self.model.family, "theta": self.model.theta,
                      "sigma": self.model.sigma, "eta": self.model.eta, "x0": self.model.x0},
            "jumps": _jumps_to_dict(self.jumps),
            "n": self.n, "T": self.T, "trials": self.trials, "seed": self.seed,
            "substeps": self.substeps, "estimators": list(self.estimators),
            "params": asdict(self.params),
        }
        if self.sweep:
            d["sweep"] = {name: list(values) for name, values in self.sweep}
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def with_values(self, values: dict) -> "ExperimentConfig":
        """Copy with model/jump/estimator parameters overridden by name."""
        model, jumps, params, n = self.model, self.jumps, self.params, self.n
        for name, v in values.items():
            if name in _MODEL_KEYS:
                model = replace(model, **{name: float(v)})
            elif name in ("lambda", "mu", "nu", "lambda0", "lambda_c", "nu_j"):
                key = {"lambda": "lam", "lambda0": "lam0", "lambda_c": "lam_c"}.get(name, name)
                jumps = replace(jumps, **{key: float(v)})
            elif name == "n":
                n = int(v)
            elif name in _PARAM_FIELDS:
                params = replace(params, **{name: v})
            else:
                raise ConfigError(f"unknown parameter {name!r}")
        return replace(self, model=model, jumps=jumps, params=params, n=n, sweep=())


def _jumps_to_dict(j: JumpSpec) -> dict:
    if j.kind == "compound-poisson":
        return {"kind": j.kind, "lambda": j.lam, "mu": j.mu, "nu": j.nu, "feedback": j.feeds_state}
    if j.kind == "neyman-scott":
        return {"kind": j.kind, "lambda0": j.lam0, "lambda_c": j.lam_c,
                "mean_disp": j.mean_disp, "nu_j": j.nu_j, "feedback": j.feeds_state}
    return {"kind": "none"}


def _check_keys(section: str, d: dict, allowed: set) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(extra)}")


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from the JSON document layout."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys("config", doc, {"model", "jumps", "n", "T", "trials", "seed", "substeps",
                                "estimators", "params", "sweep", "batch_size", "comment"})
    try:
        m = dict(doc.get("model", {}))
        family = m.pop("family", "root-quadratic")
        if family not in _MODEL_FAMILIES:
            raise ConfigError(f"unknown model family {family!r}; "
                              f"expected one of {sorted(_MODEL_FAMILIES)}")
        _check_keys("model", m, _MODEL_KEYS)
        model = ModelConfig(family, **{k: float(v) for k, v in m.items()})

        j = dict(doc.get("jumps", {"kind": "none"}))
        _check_keys("jumps", j, _JUMP_KEYS)
        jumps = JumpSpec(
            kind=j.get("kind", "none"), lam=float(j.get("lambda", 0.0)),
            mu=float(j.get("mu", 0.0)), nu=float(j.get("nu", 0.0)),
            lam0=float(j.get("lambda0", 0.0)), lam_c=float(j.get("lambda_c", 0.0)),
            mean_disp=None if j.get("mean_disp") is None else float(j["mean_disp"]),
            nu_j=float(j.get("nu_j", 0.0)), feedback=j.get("feedback"))

        p = dict(doc.get("params", {}))
        _check_keys("params", p, _PARAM_FIELDS)
        params = EstimatorParams(**p)
        sweep = tuple((name, tuple(values)) for name, values in doc.get("sweep", {}).items())
        return ExperimentConfig(
            model=model, jumps=jumps, n=int(doc.get("n", 2000)), T=float(doc.get("T", 1.0)),
            trials=int(doc.get("trials", 500)), seed=int(doc.get("seed", 0)),
            substeps=int(doc.get("substeps", 20)),
            estimators=tuple(doc.get("estimators", ExperimentConfig.estimators)),
            params=params, sweep=sweep, batch_size=int(doc.get("batch_size", 100)))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# -- results -----------------------------------------------------------------

@dataclass
class TrialRecord:
    """Everything needed to reproduce and audit one trial."""

    master_seed: int
    trial: int
    theta: float
    gamma: float
    n_jumps: int
    estimates: dict = field(default_factory=dict)
    kept: dict = field(default_factory=dict)

    def error_ratio(self, label: str) -> float:
        return est.error_ratio(self.estimates[label], self.theta)

    def studentized(self, label: str, n: int) -> float:
        return est.studentize(self.estimates[label], self.theta, self.gamma, n)


@dataclass(frozen=True)
class SummaryRow:
    label: str
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float
    count: int


def summarize(label: str, values: Sequence[float]) -> SummaryRow:
    """Five-number summary plus mean.

    Quartiles are lower empirical quantiles ``sorted[ceil(p m) - 1]``; the
    median averages the two central values when ``m`` is even.
    """
    v = np.sort(np.asarray(values, dtype=float))
    m = v.size
    if m == 0:
        raise ValueError(f"no values to summarise for {label!r}")

    def lower(p):
        return float(v[max(math.ceil(p * m) - 1, 0)])

    med = float(v[m // 2]) if m % 2 else 0.5 * float(v[m // 2 - 1] + v[m // 2])
    return SummaryRow(label, float(v[0]), lower(0.25), med, lower(0.75), float(v[-1]),
                      float(np.mean(v)), m)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    failures: list = field(default_factory=list)   # (trial, time)

    @property
    def labels(self):
        return self.config.estimators

    def error_ratios(self, label: str) -> np.ndarray:
        return np.array([r.error_ratio(label) for r in self.records])

    def estimates(self, label: str) -> np.ndarray:
        return np.array([r.estimates[label] for r in self.records])

    def studentized(self, label: str) -> np.ndarray:
        return np.array([r.studentized(label, self.config.n) for r in self.records])

    def summary(self, kind: str = "error") -> list:
        get = self.error_ratios if kind == "error" else self.estimates
        return [summarize(label, get(label)) for label in self.labels]

    def mean_error(self, label: str) -> float:
        return float(np.mean(self.error_ratios(label)))


def qq_data(values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Normal QQ pairs: ``Phi^-1((i - 0.5) / m)`` against the sorted values."""
    v = np.sort(np.asarray(values, dtype=float))
    m = v.size
    if m < 2:
        raise ValueError("need at least two values for a QQ plot")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    theo = np.array([norm_quantile((i - 0.5) / m) for i in range(1, m + 1)])
    return theo, v


# -- execution ---------------------------------------------------------------

def _model_key(cfg: ExperimentConfig):
    return (cfg.model, cfg.jumps, cfg.n, cfg.T, cfg.substeps, cfg.seed)


def _run_chunk(cells: list, trials: Sequence[int]):
    """Simulate ``trials`` once and evaluate every cell's estimators on them."""
    base = cells[0]
    res = simulate_batch(base.model.build(), base.jumps, base.n, base.T,
                         [trial_seed(base.seed, t) for t in trials], base.substeps)
    out = [[] for _ in cells]
    failures = []
    for pos, t in enumerate(trials):
        if pos in res.failed:
            failures.append((t, res.failed[pos]))
            continue
        path = SampledPath(res.values[pos], base.T)
        cache: dict = {}
        for c, cell in enumerate(cells):
            rec = TrialRecord(base.seed, t, float(res.theta[pos]), float(res.gamma[pos]),
                              int(res.jumps[pos][0].size))
            for label in cell.estimators:
                e = estimate_by_label(label, path, cell.params, cache)
                rec.estimates[label] = e.value
                rec.kept[label] = e.kept_count
            out[c].append(rec)
    return out, failures


def _run_cells(cells: list, jobs: int = 1) -> list:
    """Run several configs that share the simulated paths (same model key)."""
    base = cells[0]
    chunks = [list(range(s, min(s + base.batch_size, base.trials)))
              for s in range(0, base.trials, base.batch_size)]
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, [cells] * len(chunks), chunks))
    else:
        parts = [_run_chunk(cells, ch) for ch in chunks]
    results = []
    failures = sorted(f for _, fl in parts for f in fl)
    if failures:
        log.warning("%d trial(s) blew up and were excluded: %s", len(failures),
                    ", ".join(f"trial {t} at t={tm:g}" for t, tm in failures))
    for c, cell in enumerate(cells):
        records = sorted((r for recs, _ in parts for r in recs[c]), key=lambda r: r.trial)
        results.append(ExperimentResult(cell, records, list(failures)))
    return results


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Simulate ``cfg.trials`` paths and evaluate every configured estimator.

    Deterministic given ``cfg.seed``; the result does not depend on
    ``jobs`` or ``batch_size``.  Trials whose simulation blows up are
    excluded and listed in ``result.failures``.
    """
    return _run_cells([replace(cfg, sweep=())], jobs)[0]


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list:
    """One experiment per grid cell; returns ``[(cell_values, result), ...]``.

    Cells are in ``itertools.product`` order of ``cfg.sweep``.
    """
    if not cfg.sweep:
        return [({}, run_experiment(cfg, jobs))]
    names = [name for name, _ in cfg.sweep]
    grid = [dict(zip(names, combo))
            for combo in itertools.product(*(values for _, values in cfg.sweep))]
    cells = [cfg.with_values(values) for values in grid]
    groups: dict = {}
    for i, cell in enumerate(cells):
        groups.setdefault(_model_key(cell), []).append(i)
    results: list = [None] * len(cells)
    for idx in groups.values():
        for i, r in zip(idx, _run_cells([cells[i] for i in idx], jobs)):
            results[i] = r
    return list(zip(grid, results))


# -- CSV output --------------------------------------------------------------

def _header(dest: IO[str], text: str) -> None:
    for line in text.splitlines():
        dest.write(f"# {line}\n")


def write_summary_csv(result: ExperimentResult, dest: IO[str], kind: str = "error") -> None:
    what = "error ratios [%]" if kind == "error" else "estimated values"
    _header(dest, f"summary of {what}; lower empirical quartiles, median of two middles "
                  f"for even counts\ncolumns: label,min,q1,median,q3,max,mean,trials,failed\n"
                  f"config {result.config.fingerprint()} seed {result.config.seed}")
    fmt = "{:.2f}" if kind == "error" else "{:.6g}"
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["label", "min", "q1", "median", "q3", "max", "mean", "trials", "failed"])
    for row in result.summary(kind):
        w.writerow([row.label] + [fmt.format(getattr(row, k))
                                  for k in ("min", "q1", "median", "q3", "max", "mean")]
                   + [row.count, len(result.failures)])


def write_records_csv(result: ExperimentResult, dest: IO[str]) -> None:
    _header(dest, "per-trial records; (master_seed, trial) re-simulates a trial in isolation\n"
                  "columns: master_seed,trial,theta,gamma,n_jumps,label,estimate,"
                  "error_ratio,studentized,kept")
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["master_seed", "trial", "theta", "gamma", "n_jumps", "label", "estimate",
                "error_ratio", "studentized", "kept"])
    n = result.config.n
    for r in result.records:
        for label in result.labels:
            w.writerow([r.master_seed, r.trial, f"{r.theta:.6g}", f"{r.gamma:.6g}", r.n_jumps,
                        label, f"{r.estimates[label]:.6g}", f"{r.error_ratio(label):.2f}",
                        f"{r.studentized(label, n):.6f}", r.kept[label]])


def write_qq_csv(result: ExperimentResult, dest: IO[str], labels: Iterable[str] | None = None) -> None:
    _header(dest, "normal QQ pairs of Studentized errors sqrt(n)(estimate - theta)/sqrt(gamma)\n"
                  "columns: label,theoretical,empirical")
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["label", "theoretical", "empirical"])
    for label in labels or result.labels:
        theo, emp = qq_data(result.studentized(label))
        for a, b in zip(theo, emp):
            w.writerow([label, f"{a:.6f}", f"{b:.6f}"])


def write_sweep_csv(cells: list, dest: IO[str]) -> None:
    if not cells:
        return
    names = list(cells[0][0])
    _header(dest, "mean error ratios [%] per sweep cell\n"
                  f"columns: {','.join(names + ['label', 'mean_error', 'median_error', 'trials'])}")
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(names + ["label", "mean_error", "median_error", "trials"])
    for values, result in cells:
        for row in result.summary("error"):
            w.writerow([values[k] for k in names]
                       + [row.label, f"{row.mean:.2f}", f"{row.median:.2f}", row.count])
