"""Noisy gradient dynamics and their path-measure divergence statistics.

The simulated recursion is

    W_{k+1} = W_k - eta_{k+1} * g_{k+1} + sigma_{k+1} * eps_{k+1},

with sigma_k = sqrt(2 * eta_k / beta), g_k an unbiased minibatch estimate of
the empirical-risk gradient at W_{k-1}, and eps_k standard normal. Full-batch
runs are the Euler-Maruyama discretization of the corresponding diffusion.
Everything needed to evaluate likelihood ratios between the simulated path
and drift-free or alternative-drift reference dynamics is recorded on the
trajectory: iterates, per-step gradients, noise draws, step sizes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, DomainError, MisuseError, ParseError
from .problem import Dataset, grad_on_points, grad_population
from .seeds import rng_from

__all__ = [
    "SgldConfig",
    "Trajectory",
    "run_sgld",
    "run_cld_euler",
    "kl_sgld",
    "kl_brownian_prior",
    "kl_expected_prior",
    "kl_general_prior",
    "kl_expected_prior_bound",
    "log_radon_nikodym_sgld",
    "dump_trajectory",
    "load_trajectory_dump",
]


@dataclass(frozen=True)
class SgldConfig:
    """Configuration of one run; `etas` may be a scalar or a length-T schedule."""

    iterations: int
    etas: np.ndarray
    beta: float
    w0: np.ndarray
    seed: int
    batch_size: int | str = "full"
    noise_free: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        etas = np.array(self.etas, dtype=float)
        if etas.ndim == 0:
            etas = np.full(self.iterations, float(etas))
        if etas.shape != (self.iterations,):
            raise ConfigError("step-size schedule length must equal iterations")
        if np.any(etas <= 0):
            raise ConfigError("step sizes must be strictly positive")
        if not self.beta > 0:
            raise ConfigError("beta must be strictly positive")
        w0 = np.atleast_1d(np.array(self.w0, dtype=float))
        if w0.ndim != 1:
            raise ConfigError("w0 must be a vector")
        if self.batch_size != "full" and (
            not isinstance(self.batch_size, int) or self.batch_size < 1
        ):
            raise ConfigError('batch_size must be a positive integer or "full"')
        etas.setflags(write=False)
        w0.setflags(write=False)
        object.__setattr__(self, "etas", etas)
        object.__setattr__(self, "w0", w0)


@dataclass(frozen=True)
class Trajectory:
    """Immutable record of one run: iterates W_0..W_T plus per-step fields."""

    weights: np.ndarray  # (T+1, d)
    grads: np.ndarray  # (T, d)
    noises: np.ndarray  # (T, d)
    etas: np.ndarray  # (T,)
    beta: float
    full_batch: bool = True
    noise_free: bool = False
    batch_size: int | str = "full"

    def __post_init__(self):
        for name in ("weights", "grads", "noises", "etas"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        T = self.etas.shape[0]
        d = self.weights.shape[1]
        if self.weights.shape != (T + 1, d) or self.grads.shape != (T, d) \
                or self.noises.shape != (T, d):
            raise ConfigError("inconsistent trajectory field shapes")

    @property
    def iterations(self) -> int:
        return self.etas.shape[0]

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def sigmas(self) -> np.ndarray:
        if self.noise_free:
            return np.zeros_like(self.etas)
        return np.sqrt(2.0 * self.etas / self.beta)

    def reconstruction_error(self) -> float:
        """Max deviation of W_{k+1} from the recursion on the stored fields."""
        steps = (
            self.weights[:-1]
            - self.etas[:, None] * self.grads
            + self.sigmas()[:, None] * self.noises
        )
        return float(np.max(np.abs(steps - self.weights[1:])))


def _resolve_batch(batch_size, n: int) -> int | None:
    """None means full batch."""
    if batch_size == "full":
        return None
    if batch_size > n:
        raise ConfigError(f"batch_size {batch_size} exceeds the sample size {n}")
    return int(batch_size)


def run_sgld(config: SgldConfig, model, dataset: Dataset) -> Trajectory:
    """Simulate the recursion; deterministic given the config seed.

    Minibatch indices are drawn uniformly with replacement, then the Gaussian
    noise, in that order on a single generator stream. A non-finite iterate
    aborts with a DivergenceError carrying the last finite step index.
    """
    rng = rng_from(config.seed)
    T = config.iterations
    d = config.w0.shape[0]
    b = _resolve_batch(config.batch_size, dataset.n)
    with np.errstate(over="ignore"):
        sigmas = (
            np.zeros(T) if config.noise_free
            else np.sqrt(2.0 * config.etas / config.beta)
        )

    weights = np.empty((T + 1, d))
    grads = np.empty((T, d))
    noises = np.zeros((T, d))
    weights[0] = config.w0
    points = dataset.points
    w = config.w0.copy()
    for k in range(T):
        batch = points if b is None else points[rng.integers(0, dataset.n, size=b)]
        with np.errstate(over="ignore", invalid="ignore"):
            g = grad_on_points(model, w, batch)
            if config.noise_free:
                w = w - config.etas[k] * g
            else:
                eps = rng.standard_normal(d)
                noises[k] = eps
                w = w - config.etas[k] * g + sigmas[k] * eps
        if not np.all(np.isfinite(w)):
            raise DivergenceError(
                f"iterate became non-finite at step {k + 1}", last_finite_step=k
            )
        grads[k] = g
        weights[k + 1] = w
    return Trajectory(
        weights=weights,
        grads=grads,
        noises=noises,
        etas=config.etas,
        beta=config.beta,
        full_batch=b is None,
        noise_free=config.noise_free,
        batch_size=config.batch_size,
    )


def run_cld_euler(config: SgldConfig, model, dataset: Dataset) -> Trajectory:
    """Full-batch run under a self-describing name for diffusion experiments."""
    if config.batch_size != "full":
        config = dataclasses.replace(config, batch_size="full")
    return run_sgld(config, model, dataset)


def kl_sgld(traj: Trajectory) -> float:
    """Single-path divergence statistic (beta/4) * sum_k eta_k ||g_k||^2.

    Averaging this over independent runs estimates the divergence between the
    path law of the recursion and the drift-free Gaussian walk.
    """
    sq = np.einsum("kd,kd->k", traj.grads, traj.grads)
    return float(0.25 * traj.beta * np.dot(traj.etas, sq))


def kl_brownian_prior(traj: Trajectory) -> float:
    """Riemann discretization (1/(2 sigma^2)) * sum_k eta_k ||grad_k||^2.

    Algebraically identical to :func:`kl_sgld` on full-batch trajectories,
    where the stored per-step gradients are the exact empirical gradients.
    """
    if not traj.full_batch:
        raise MisuseError("kl_brownian_prior applies to full-batch trajectories only")
    sigma2 = 2.0 / traj.beta
    sq = np.einsum("kd,kd->k", traj.grads, traj.grads)
    return float(np.dot(traj.etas, sq) / (2.0 * sigma2))


def kl_expected_prior(traj: Trajectory, model, dist) -> float:
    """(beta/4) * sum_k eta_k ||grad_emp(W_k) - grad_pop(W_k)||^2.

    Zero when `dist` is the empirical distribution of the training sample.
    """
    if not traj.full_batch:
        raise MisuseError("kl_expected_prior applies to full-batch trajectories only")
    total = 0.0
    for k in range(traj.iterations):
        diff = traj.grads[k] - grad_population(model, traj.weights[k], dist)
        total += traj.etas[k] * float(diff @ diff)
    return 0.25 * traj.beta * total


def kl_general_prior(traj: Trajectory, grad_field) -> float:
    """(beta/4) * sum_k eta_k ||grad_emp(W_k) - grad_field(W_k)||^2.

    `grad_field` plays the role of the reference drift: the zero field
    reproduces :func:`kl_brownian_prior`, the population gradient reproduces
    :func:`kl_expected_prior`.
    """
    if not traj.full_batch:
        raise MisuseError("kl_general_prior applies to full-batch trajectories only")
    total = 0.0
    for k in range(traj.iterations):
        f = np.asarray(grad_field(traj.weights[k]), dtype=float)
        if not np.all(np.isfinite(f)):
            raise DomainError(f"gradient field is non-finite at step {k}")
        diff = traj.grads[k] - f
        total += traj.etas[k] * float(diff @ diff)
    return 0.25 * traj.beta * total


def kl_expected_prior_bound(L: float, beta: float, T_time: float, n: int, zeta: float) -> float:
    """Closed-form high-probability bound on the expected-drift divergence:

        log(1/zeta) + L^2 beta T / n + 2 beta^2 T^2 L^4 / n,

    valid with probability at least 1 - zeta over the sample.
    """
    if L < 0 or beta <= 0 or T_time <= 0 or n < 1:
        raise ConfigError("parameters must be positive (L may be zero)")
    if not 0 < zeta < 1:
        raise ConfigError("zeta must lie in (0, 1)")
    return float(
        np.log(1.0 / zeta)
        + L ** 2 * beta * T_time / n
        + 2.0 * beta ** 2 * T_time ** 2 * L ** 4 / n
    )


def log_radon_nikodym_sgld(traj: Trajectory) -> float:
    """log-likelihood ratio of the simulated path against the pure noise walk:

        sum_k [ (eta_k / sigma_k) <g_k, eps_k> - (eta_k^2 / (2 sigma_k^2)) ||g_k||^2 ].

    Its exponential has unit mean over runs, and its negation has the same
    expectation as :func:`kl_sgld`.
    """
    sigmas = traj.sigmas()
    if np.any(sigmas == 0.0):
        raise DomainError("log likelihood ratio undefined for sigma = 0 steps")
    dots = np.einsum("kd,kd->k", traj.grads, traj.noises)
    sq = np.einsum("kd,kd->k", traj.grads, traj.grads)
    ratio = traj.etas / sigmas
    return float(np.sum(ratio * dots - 0.5 * ratio ** 2 * sq))


# ---------------------------------------------------------------------------
# Trajectory dumps: line-oriented text, one step per line
# ---------------------------------------------------------------------------

_DUMP_HEADER = (
    "# trajectory dump v1: one step per line: "
    "k w[0..d-1] g[0..d-1] eps[0..d-1] eta"
)


def dump_trajectory(traj: Trajectory, path) -> None:
    """Write a plain-text dump; W_k is the post-step iterate of step k."""
    d = traj.dimension
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_DUMP_HEADER + "\n")
        fh.write(f"# d={d} T={traj.iterations} beta={traj.beta!r} "
                 f"full_batch={int(traj.full_batch)} noise_free={int(traj.noise_free)}\n")
        fh.write("# w0 " + " ".join(repr(float(v)) for v in traj.weights[0]) + "\n")
        for k in range(traj.iterations):
            fields = [str(k + 1)]
            fields += [repr(float(v)) for v in traj.weights[k + 1]]
            fields += [repr(float(v)) for v in traj.grads[k]]
            fields += [repr(float(v)) for v in traj.noises[k]]
            fields.append(repr(float(traj.etas[k])))
            fh.write(" ".join(fields) + "\n")


def load_trajectory_dump(path) -> Trajectory:
    """Read back a dump written by :func:`dump_trajectory`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = {}
    w0 = None
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if line.startswith("# w0 "):
            w0 = np.array([float(v) for v in line[5:].split()])
        elif line.startswith("# d="):
            for item in line[2:].split():
                key, _, val = item.partition("=")
                meta[key] = val
        elif line.startswith("#"):
            continue
        else:
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError:
                raise ParseError(f"malformed dump line {lineno}", lineno) from None
    if w0 is None or "d" not in meta:
        raise ParseError("dump header is missing", 0)
    d = int(meta["d"])
    T = len(rows)
    weights = np.empty((T + 1, d))
    weights[0] = w0
    grads = np.empty((T, d))
    noises = np.empty((T, d))
    etas = np.empty(T)
    for row in rows:
        k = int(row[0])
        weights[k] = row[1 : 1 + d]
        grads[k - 1] = row[1 + d : 1 + 2 * d]
        noises[k - 1] = row[1 + 2 * d : 1 + 3 * d]
        etas[k - 1] = row[1 + 3 * d]
    return Trajectory(
        weights=weights,
        grads=grads,
        noises=noises,
        etas=etas,
        beta=float(meta["beta"]),
        full_batch=bool(int(meta.get("full_batch", 1))),
        noise_free=bool(int(meta.get("noise_free", 0))),
    )
