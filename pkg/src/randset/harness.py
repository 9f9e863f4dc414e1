"""Repeated-trial experiments: sample, simulate, bound, compare, persist.

One trial draws a dataset, runs R independent noise replicates of the
configured dynamics on it, estimates the posterior expectations (worst gap
along the trajectory, divergence statistic, Rademacher complexity) as
replicate means with standard errors, assembles the selected bound reports
from those ingredients, and records everything. Coverage statistics are then
exact functions of the records.

Seed discipline: trial t uses dataset seed mix64(master_seed, t); replicate
r of that trial uses dynamics seed mix64(dataset_seed, DYNAMICS_STREAM + r)
and sign-vector seed mix64(dataset_seed, SIGN_STREAM + r). Results are
therefore independent of execution order and worker count; the
RANDSET_THREADS environment variable only changes how trials are scheduled.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds as bd
from . import complexity as cx
from . import dynamics as dyn
from . import problem as pb
from .errors import ConfigError, DivergenceError, DomainError, ParseError
from .seeds import mix64

__all__ = [
    "BoundSelection",
    "ExperimentConfig",
    "TrialRecord",
    "SummaryReport",
    "build_distribution",
    "build_loss",
    "run_trials",
    "summarize",
    "write_records",
    "read_records",
    "emit_plot_data",
    "CONFIG_KEYS",
]

DYNAMICS_STREAM = 1
SIGN_STREAM = 1_000_003

_PIPELINES = ("sgld", "cld", "fractal")
_FORMULAS = (
    "sgld-trajectory",
    "cld-brownian",
    "rademacher-upper",
    "rademacher-upper-closed",
    "rademacher-lower",
    "baseline-rademacher",
    "baseline-kl",
    "fractal-dimension",
)
_RAD_FORMULAS = {
    "cld-brownian",
    "rademacher-upper",
    "rademacher-upper-closed",
    "rademacher-lower",
    "baseline-rademacher",
}

CONFIG_KEYS = [
    ("schema", "str", "v1", "config schema version"),
    ("pipeline", "str", "sgld", "experiment pipeline: sgld | cld | fractal"),
    ("master_seed", "int", "(required)", "root of every random stream"),
    ("trials", "int", "1", "number of independent datasets M"),
    ("replicates", "int", "64", "noise replicates R per dataset"),
    ("rademacher_draws", "int", "256", "sign vectors per Rademacher estimate"),
    ("n", "int", "(required)", "sample size per dataset"),
    ("workers", "int", "1", "worker processes (RANDSET_THREADS overrides)"),
    ("output", "str", "none", "default records path for the CLI"),
    ("distribution.kind", "str", "(required)",
     "finite-support | gaussian-mixture-classification | linear-regression"),
    ("distribution.atoms", "list[list[float]]", "-", "finite-support atoms"),
    ("distribution.probabilities", "list[float]", "-", "finite-support weights"),
    ("distribution.means", "list[list[float]]", "-", "mixture class means (2 x d)"),
    ("distribution.covariance_scale", "float", "-", "mixture noise scale"),
    ("distribution.class_priors", "list[float]", "[0.5, 0.5]", "mixture priors"),
    ("distribution.true_weight", "list[float]", "-", "regression ground truth"),
    ("distribution.input_scale", "float", "1.0", "regression input variance"),
    ("distribution.noise_std", "float", "0.0", "regression label noise"),
    ("distribution.atomize.num_atoms", "int", "-",
     "freeze a parametric kind into this many equiprobable atoms"),
    ("distribution.atomize.seed", "int", "-", "seed of the frozen atom draw"),
    ("loss.kind", "str", "(required)", "clipped-quadratic | clipped-logistic | table"),
    ("loss.dimension", "int", "(required)", "weight-space dimension d"),
    ("loss.B", "float", "1.0", "loss upper bound"),
    ("loss.clip_margin", "float", "0.25", "half-width of the smooth clip ramp"),
    ("loss.feature_cap", "float", "1.0", "logistic feature-norm cap"),
    ("dynamics.iterations", "int", "(required)", "trajectory length T"),
    ("dynamics.eta", "float | list[float]", "(required)", "step size schedule"),
    ("dynamics.beta", "float", "(required)", "inverse temperature"),
    ("dynamics.batch_size", 'int | "full"', "full", "minibatch size"),
    ("dynamics.w0", 'list[float] | "zeros"', "zeros", "initial weights"),
    ("dynamics.noise_free", "bool", "false", "sigma = 0 limit (no Gaussian noise)"),
    ("bounds[].formula", "str", "-", " | ".join(_FORMULAS)),
    ("bounds[].zeta", "float", "0.05", "confidence parameter"),
    ("bounds[].lambda", 'float | "optimize"', "optimize", "trade-off parameter"),
    ("bounds[].gamma", "float", "0.0", "extra confidence debit (fractal forms)"),
    ("bounds[].eps", "float", "0.1", "dimension slack (fractal forms)"),
    ("bounds[].metric", "str", "euclidean", "fractal form: euclidean | data-dependent"),
    ("covering.scales", "list[float]", "-", "decreasing scales (fractal pipeline)"),
    ("covering.metric", "str", "euclidean", "euclidean | data-dependent"),
]


@dataclass(frozen=True)
class BoundSelection:
    formula: str
    zeta: float = 0.05
    lam: float | str = "optimize"
    gamma: float = 0.0
    eps: float = 0.1
    metric: str = "euclidean"

    def __post_init__(self):
        if self.formula not in _FORMULAS:
            raise ConfigError(
                f"unknown bound formula {self.formula!r}; choose from {_FORMULAS}"
            )
        if not 0 < self.zeta < 1:
            raise ConfigError("bound zeta must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "formula": self.formula,
            "zeta": self.zeta,
            "lambda": self.lam,
            "gamma": self.gamma,
            "eps": self.eps,
            "metric": self.metric,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundSelection":
        data = dict(data)
        lam = data.pop("lambda", "optimize")
        known = {"formula", "zeta", "gamma", "eps", "metric"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown bound selection keys: {sorted(unknown)}")
        try:
            return cls(lam=lam, **data)
        except TypeError as exc:
            raise ConfigError(f"invalid bound selection: {exc}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; round-trips through plain dicts."""

    pipeline: str
    distribution: dict
    loss: dict
    n: int
    dynamics: dict
    bounds: tuple[BoundSelection, ...]
    trials: int
    replicates: int
    rademacher_draws: int
    master_seed: int
    workers: int = 1
    output: str | None = None
    covering: dict | None = None

    def __post_init__(self):
        if self.pipeline not in _PIPELINES:
            raise ConfigError(f"pipeline must be one of {_PIPELINES}")
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative")
        if self.replicates < 1 or self.rademacher_draws < 1:
            raise ConfigError("replicates and rademacher_draws must be at least 1")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.pipeline == "fractal" and not (self.covering or {}).get("scales"):
            raise ConfigError("the fractal pipeline needs covering.scales")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        schema = data.pop("schema", "v1")
        if schema != "v1":
            raise ConfigError(f"unsupported config schema {schema!r}")
        if "master_seed" not in data:
            raise ConfigError(
                "master_seed is required; wall-clock seeding is refused"
            )
        known = {
            "pipeline", "distribution", "loss", "n", "dynamics", "bounds",
            "trials", "replicates", "rademacher_draws", "master_seed",
            "workers", "output", "covering",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        raw_bounds = data.pop("bounds", [])
        selections = tuple(BoundSelection.from_dict(b) for b in raw_bounds)
        defaults = {
            "pipeline": "sgld",
            "trials": 1,
            "replicates": 64,
            "rademacher_draws": 256,
            "workers": 1,
            "output": None,
            "covering": None,
        }
        merged = {**defaults, **data}
        try:
            return cls(bounds=selections, **merged)
        except TypeError as exc:
            raise ConfigError(f"invalid config: {exc}") from None

    def to_dict(self) -> dict:
        return {
            "schema": "v1",
            "pipeline": self.pipeline,
            "distribution": self.distribution,
            "loss": self.loss,
            "n": self.n,
            "dynamics": self.dynamics,
            "bounds": [b.to_dict() for b in self.bounds],
            "trials": self.trials,
            "replicates": self.replicates,
            "rademacher_draws": self.rademacher_draws,
            "master_seed": self.master_seed,
            "workers": self.workers,
            "output": self.output,
            "covering": self.covering,
        }

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def build_distribution(spec: dict):
    """Resolve a distribution spec dict into a distribution object."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    atomize_spec = spec.pop("atomize", None)
    if kind == "finite-support":
        dist = pb.FiniteSupport(
            atoms=np.asarray(spec.pop("atoms"), dtype=float),
            probabilities=np.asarray(spec.pop("probabilities"), dtype=float),
            dimension=spec.pop("dimension", 0),
        )
    elif kind == "gaussian-mixture-classification":
        dist = pb.GaussianMixtureClassification(
            means=np.asarray(spec.pop("means"), dtype=float),
            covariance_scale=float(spec.pop("covariance_scale")),
            class_priors=tuple(spec.pop("class_priors", (0.5, 0.5))),
        )
    elif kind == "linear-regression":
        dist = pb.LinearRegressionDistribution(
            true_weight=np.asarray(spec.pop("true_weight"), dtype=float),
            input_scale=float(spec.pop("input_scale", 1.0)),
            noise_std=float(spec.pop("noise_std", 0.0)),
        )
    else:
        raise ConfigError(f"unknown distribution kind {kind!r}")
    if spec:
        raise ConfigError(f"unknown distribution keys: {sorted(spec)}")
    if atomize_spec is not None:
        dist = pb.atomize(
            dist,
            num_atoms=int(atomize_spec["num_atoms"]),
            seed=int(atomize_spec["seed"]),
        )
    return dist


def build_loss(spec: dict):
    """Resolve a loss spec dict into a loss model."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "clipped-quadratic":
        return pb.ClippedQuadraticLoss(
            dimension=int(spec.pop("dimension")),
            B=float(spec.pop("B", 1.0)),
            clip_margin=float(spec.pop("clip_margin", 0.25)),
        )
    if kind == "clipped-logistic":
        return pb.ClippedLogisticLoss(
            dimension=int(spec.pop("dimension")),
            B=float(spec.pop("B", 1.0)),
            clip_margin=float(spec.pop("clip_margin", 0.25)),
            feature_cap=float(spec.pop("feature_cap", 1.0)),
        )
    if kind == "table":
        return pb.TableLoss(
            w_points=np.asarray(spec.pop("w_points"), dtype=float),
            z_points=np.asarray(spec.pop("z_points"), dtype=float),
            values=np.asarray(spec.pop("values"), dtype=float),
            B=float(spec.pop("B", 1.0)),
        )
    raise ConfigError(f"unknown loss kind {kind!r}")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    dataset_seed: int
    replicate_gaps: tuple
    replicate_abs_gaps: tuple
    gap_mean: float
    gap_se: float
    abs_gap_mean: float
    abs_gap_se: float
    kl_mean: float
    kl_se: float
    rad_mean: float | None
    rad_se: float | None
    reports: tuple
    dims: dict | None
    curve: dict | None
    max_step_size: float
    flagged: bool
    diverged_replicates: int
    wall_time: float
    config_digest: str

    def to_dict(self) -> dict:
        out = asdict(self)
        out["replicate_gaps"] = list(self.replicate_gaps)
        out["replicate_abs_gaps"] = list(self.replicate_abs_gaps)
        out["reports"] = [dict(r) for r in self.reports]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrialRecord":
        data = dict(data)
        data["replicate_gaps"] = tuple(data["replicate_gaps"])
        data["replicate_abs_gaps"] = tuple(data["replicate_abs_gaps"])
        data["reports"] = tuple(data["reports"])
        return cls(**data)


def _mean_se(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return float("nan"), float("nan")
    se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), se


def _assemble_report(sel: BoundSelection, ingredients: dict, model, n: int) -> bd.BoundReport:
    B = model.B
    f = sel.formula
    if f == "sgld-trajectory":
        return bd.sgld_upper(
            ingredients["kl"], ingredients["T"], B, n, sel.zeta, sel.lam
        )
    if f == "cld-brownian":
        return bd.cld_upper_brownian(
            ingredients["rad"], ingredients["kl"], B, n, sel.zeta, sel.lam
        )
    if f == "rademacher-upper":
        return bd.pacbayes_rademacher_upper(
            ingredients["rad"], ingredients["kl"], B, n, sel.zeta, sel.lam
        )
    if f == "rademacher-upper-closed":
        return bd.pacbayes_rademacher_upper_closed(
            ingredients["rad"], ingredients["kl"], B, n, sel.zeta
        )
    if f == "rademacher-lower":
        return bd.lower_bound(
            ingredients["rad"], B, n, ingredients["kl"], sel.zeta, sel.lam
        )
    if f == "baseline-rademacher":
        return bd.baseline_bounds("rademacher", ingredients["rad"], B, n, sel.zeta)
    if f == "baseline-kl":
        return bd.baseline_bounds("kl", ingredients["kl"], B, n, sel.zeta)
    if f == "fractal-dimension":
        dims = ingredients.get("dims") or {}
        if sel.metric not in dims:
            raise ConfigError(
                f"fractal bound for metric {sel.metric!r} needs the fractal "
                "pipeline with a matching covering metric"
            )
        return bd.fractal_upper(
            dims[sel.metric], sel.eps, n, B, ingredients["it_disintegrated"],
            sel.zeta, sel.lam, metric=sel.metric,
            L=getattr(model, "L", None), gamma=sel.gamma,
        )
    raise ConfigError(f"unknown bound formula {f!r}")


def _run_trial(config: ExperimentConfig, t: int) -> TrialRecord:
    started = time.perf_counter()
    dist = build_distribution(config.distribution)
    model = build_loss(config.loss)

    dyn_spec = dict(config.dynamics)
    T = int(dyn_spec.pop("iterations"))
    eta = dyn_spec.pop("eta")
    beta = float(dyn_spec.pop("beta"))
    batch_size = dyn_spec.pop("batch_size", "full")
    w0_spec = dyn_spec.pop("w0", "zeros")
    noise_free = bool(dyn_spec.pop("noise_free", False))
    if dyn_spec:
        raise ConfigError(f"unknown dynamics keys: {sorted(dyn_spec)}")
    w0 = np.zeros(model.dimension) if w0_spec == "zeros" else np.asarray(w0_spec, float)

    need_rad = any(s.formula in _RAD_FORMULAS for s in config.bounds)
    fractal = config.pipeline == "fractal"
    start_index = 0 if config.pipeline in ("cld", "fractal") else 1

    dataset_seed = mix64(config.master_seed, t)
    dataset = pb.sample_dataset(dist, config.n, dataset_seed)

    gaps, abs_gaps, kls, rads = [], [], [], []
    dims: dict | None = None
    curve_dict: dict | None = None
    it_disintegrated = None
    diverged = 0
    for r in range(config.replicates):
        cfg = dyn.SgldConfig(
            iterations=T, etas=eta, beta=beta, w0=w0,
            seed=mix64(dataset_seed, DYNAMICS_STREAM + r),
            batch_size=batch_size, noise_free=noise_free,
        )
        runner = dyn.run_cld_euler if config.pipeline == "cld" else dyn.run_sgld
        try:
            traj = runner(cfg, model, dataset)
        except DivergenceError:
            diverged += 1
            continue
        weights = traj.weights[start_index:]
        emp = pb.empirical_risk(model, weights, dataset)
        pop = pb.population_risk(model, weights, dist)
        diff = pop - emp
        gaps.append(float(diff.max()))
        abs_gaps.append(float(np.abs(diff).max()))
        kls.append(dyn.kl_sgld(traj))
        if need_rad:
            lm = cx.LossMatrix(pb.loss_table(model, weights, dataset), model.B)
            est = cx.rademacher_mc(
                lm, config.rademacher_draws, mix64(dataset_seed, SIGN_STREAM + r)
            )
            rads.append(est.mean)
        if fractal and dims is None:
            cov = config.covering or {}
            metric = cov.get("metric", "euclidean")
            scales = np.asarray(cov["scales"], dtype=float)
            if metric == "data-dependent":
                lm = cx.LossMatrix(pb.loss_table(model, weights, dataset), model.B)
                data = cx.pseudometric_matrix(lm)
            else:
                data = weights
            curve = cx.covering_curve(data, scales, metric=metric)
            fit = cx.fit_box_dimension(curve)
            dims = {metric: fit.dimension}
            curve_dict = {
                "metric": metric,
                "scales": [float(s) for s in curve.scales],
                "cover_sizes": [int(c) for c in curve.cover_sizes],
                "pack_sizes": [int(p) for p in curve.pack_sizes],
                "dimension": fit.dimension,
                "rms_residual": fit.rms_residual,
            }
            it_disintegrated = (
                -dyn.log_radon_nikodym_sgld(traj) if not noise_free else 0.0
            )

    flagged = diverged > config.replicates // 2 or not gaps
    gap_mean, gap_se = _mean_se(gaps)
    abs_mean, abs_se = _mean_se(abs_gaps)
    kl_mean, kl_se = _mean_se(kls)
    rad_mean, rad_se = _mean_se(rads) if rads else (None, None)

    reports = ()
    if not flagged:
        ingredients = {
            "kl": kl_mean,
            "rad": rad_mean,
            "T": T,
            "dims": dims,
            "it_disintegrated": it_disintegrated,
        }
        reports = tuple(
            _assemble_report(sel, ingredients, model, config.n).to_flat_dict()
            for sel in config.bounds
        )

    etas_arr = np.asarray(eta, dtype=float)
    return TrialRecord(
        trial=t,
        dataset_seed=dataset_seed,
        replicate_gaps=tuple(gaps),
        replicate_abs_gaps=tuple(abs_gaps),
        gap_mean=gap_mean,
        gap_se=gap_se,
        abs_gap_mean=abs_mean,
        abs_gap_se=abs_se,
        kl_mean=kl_mean,
        kl_se=kl_se,
        rad_mean=rad_mean,
        rad_se=rad_se,
        reports=reports,
        dims=dims,
        curve=curve_dict,
        max_step_size=float(np.max(etas_arr)),
        flagged=flagged,
        diverged_replicates=diverged,
        wall_time=time.perf_counter() - started,
        config_digest=config.digest(),
    )


def _worker(args) -> dict:
    config_dict, t = args
    return _run_trial(ExperimentConfig.from_dict(config_dict), t).to_dict()


def _worker_count(config: ExperimentConfig) -> int:
    env = os.environ.get("RANDSET_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"RANDSET_THREADS must be an integer, got {env!r}")
    return config.workers


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    """Run all trials; records come back ordered by trial index."""
    workers = _worker_count(config)
    indices = range(config.trials)
    if workers == 1 or config.trials <= 1:
        return [_run_trial(config, t) for t in indices]
    payload = config.to_dict()
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        dicts = list(pool.map(_worker, [(payload, t) for t in indices], chunksize=1))
    records = [TrialRecord.from_dict(d) for d in dicts]
    records.sort(key=lambda r: r.trial)
    return records


@dataclass(frozen=True)
class SummaryReport:
    total: int
    included: int
    flagged: int
    zeta: float
    coverage: dict
    covered_counts: dict
    sandwich_rate: float | None
    stats: dict
    term_stats: dict
    binomial_tolerance: float
    coverage_threshold: float
    config_digest: str | None

    def lines(self) -> list[str]:
        out = [
            f"trials: {self.total} total, {self.included} included, "
            f"{self.flagged} flagged",
            f"coverage threshold (1 - zeta) - 3*sqrt(zeta(1-zeta)/M) = "
            f"{self.coverage_threshold:.4f}",
        ]
        for fid in sorted(self.coverage):
            out.append(
                f"coverage[{fid}] = {self.coverage[fid]:.4f} "
                f"({self.covered_counts[fid]}/{self.included})"
            )
        if self.sandwich_rate is not None:
            out.append(f"sandwich rate = {self.sandwich_rate:.4f}")
        for name in sorted(self.stats):
            s = self.stats[name]
            if s is None:
                continue
            out.append(
                f"{name}: mean={s['mean']:.6g} median={s['median']:.6g} "
                f"se={s['se']:.3g}"
            )
        return out


def _stat(values) -> dict | None:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return None
    with np.errstate(invalid="ignore"):
        se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        return {
            "mean": float(arr.mean()), "median": float(np.median(arr)), "se": se,
        }


def summarize(records: list[TrialRecord], zeta: float) -> SummaryReport:
    """Coverage per bound formula over unflagged trials, plus term statistics."""
    total = len(records)
    included = [r for r in records if not r.flagged]
    flagged = total - len(included)
    if not included:
        raise DomainError("no usable records: every trial is flagged or absent")

    covered: dict[str, int] = {}
    seen: dict[str, int] = {}
    term_values: dict[str, list] = {}
    sandwich_hits = 0
    sandwich_applicable = 0
    for rec in included:
        uppers_ok, lowers_ok, has_upper, has_lower = True, True, False, False
        for rep in rec.reports:
            fid = rep["formula_id"]
            seen[fid] = seen.get(fid, 0) + 1
            if rep["side"] == "upper":
                has_upper = True
                ok = rep["value"] >= rec.gap_mean
                uppers_ok &= ok
            else:
                has_lower = True
                ok = rep["value"] <= rec.abs_gap_mean
                lowers_ok &= ok
            covered[fid] = covered.get(fid, 0) + int(ok)
            for key, val in rep.items():
                if isinstance(val, (int, float)) and key not in (
                    "zeta", "lambda", "lambda_value",
                ):
                    term_values.setdefault(f"{fid}.{key}", []).append(val)
        if has_upper and has_lower:
            sandwich_applicable += 1
            sandwich_hits += int(uppers_ok and lowers_ok)

    m = len(included)
    coverage = {fid: covered[fid] / seen[fid] for fid in seen}
    tol = float(3.0 * np.sqrt(zeta * (1.0 - zeta) / m))
    stats = {
        "gap_mean": _stat([r.gap_mean for r in included]),
        "abs_gap_mean": _stat([r.abs_gap_mean for r in included]),
        "kl_mean": _stat([r.kl_mean for r in included]),
        "rad_mean": _stat([r.rad_mean for r in included]),
        "wall_time": _stat([r.wall_time for r in included]),
    }
    return SummaryReport(
        total=total,
        included=m,
        flagged=flagged,
        zeta=zeta,
        coverage=coverage,
        covered_counts=covered,
        sandwich_rate=(sandwich_hits / sandwich_applicable)
        if sandwich_applicable else None,
        stats=stats,
        term_stats={k: _stat(v) for k, v in term_values.items()},
        binomial_tolerance=tol,
        coverage_threshold=(1.0 - zeta) - tol,
        config_digest=included[0].config_digest if included else None,
    )


# ---------------------------------------------------------------------------
# Persistence: JSON lines, one record per line
# ---------------------------------------------------------------------------


def write_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict()) + "\n")


def read_records(path) -> list[TrialRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(TrialRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"malformed record line {lineno}: {exc}", lineno)
    return records


# ---------------------------------------------------------------------------
# Delimited plot data
# ---------------------------------------------------------------------------

_PLOT_KINDS = ("bound-vs-gap", "dim-fit", "term-breakdown")


def emit_plot_data(records, kind: str, path) -> None:
    """Write one CSV per kind; values are verbatim record fields."""
    if not records:
        raise DomainError("no records to plot")
    if kind == "bound-vs-gap":
        fids = sorted({rep["formula_id"] for r in records for rep in r.reports})
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("trial,flagged,empirical_gap,empirical_abs_gap")
            fh.write("".join(f",{fid}" for fid in fids) + "\n")
            for r in records:
                by_fid = {rep["formula_id"]: rep["value"] for rep in r.reports}
                row = [str(r.trial), str(int(r.flagged)), repr(r.gap_mean),
                       repr(r.abs_gap_mean)]
                row += [repr(by_fid[f]) if f in by_fid else "" for f in fids]
                fh.write(",".join(row) + "\n")
        return
    if kind == "dim-fit":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("trial,metric,log_inv_scale,log_cover_size,log_pack_size\n")
            for r in records:
                if not r.curve:
                    continue
                c = r.curve
                for s, cov, pack in zip(
                    c["scales"], c["cover_sizes"], c["pack_sizes"]
                ):
                    fh.write(
                        f"{r.trial},{c['metric']},{float(np.log(1.0 / s))!r},"
                        f"{float(np.log(cov))!r},{float(np.log(pack))!r}\n"
                    )
        return
    if kind == "term-breakdown":
        skip = ("formula_id", "side", "zeta", "lambda", "lambda_value", "value",
                "gamma", "claimed_confidence", "mcdiarmid_constant",
                "universal_constant", "metric", "assumption_conditional",
                "holds_with_probability")
        names = sorted({
            key
            for r in records
            for rep in r.reports
            for key in rep
            if key not in skip
        })
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("trial,formula_id,value")
            fh.write("".join(f",{name}" for name in names) + "\n")
            for r in records:
                for rep in r.reports:
                    row = [str(r.trial), rep["formula_id"], repr(rep["value"])]
                    row += [repr(float(rep.get(nm, 0.0))) for nm in names]
                    fh.write(",".join(row) + "\n")
        return
    raise ConfigError(
        f"unknown plot kind {kind!r}; choose from {_PLOT_KINDS}"
    )
