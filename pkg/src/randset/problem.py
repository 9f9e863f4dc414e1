"""Synthetic data distributions and bounded loss models.

A loss model maps a weight vector ``w`` and a data point ``z`` to a value in
``[0, B]``. Boundedness is obtained by passing a nonnegative raw loss through
a C^2 ramp (see :func:`clip_value`) so that the Lipschitz constant ``L`` and
smoothness constant ``M`` stay finite and can be computed analytically at
model construction. Population quantities are only offered for distributions
with finite support, where the expectation is an exact weighted sum; sampled
parametric distributions can be frozen into finite-support ones with
:func:`atomize`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CapabilityError, ConfigError, DomainError
from .seeds import rng_from

__all__ = [
    "FiniteSupport",
    "GaussianMixtureClassification",
    "LinearRegressionDistribution",
    "Dataset",
    "ClippedQuadraticLoss",
    "ClippedLogisticLoss",
    "TableLoss",
    "GapResult",
    "sample_dataset",
    "empirical_distribution",
    "atomize",
    "empirical_risk",
    "population_risk",
    "grad_empirical",
    "grad_population",
    "grad_on_points",
    "gen_gap_sup",
    "loss_table",
    "clip_value",
    "clip_derivative",
]

_PROB_TOL = 1e-12


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ConfigError("data points must form a 1-D or 2-D array")
    return pts


def _as_weight_block(w) -> tuple[np.ndarray, bool]:
    """Return weights as a (m, d) block plus a flag for scalar-style input."""
    arr = np.asarray(w, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        return arr[None, :], True
    if arr.ndim == 2:
        return arr, False
    raise ConfigError("weights must be a vector or a stack of vectors")


# ---------------------------------------------------------------------------
# Data distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteSupport:
    """Distribution with finitely many atoms; expectations are exact sums."""

    atoms: np.ndarray
    probabilities: np.ndarray
    dimension: int = 0

    kind = "finite-support"

    def __post_init__(self):
        atoms = _as_points(self.atoms).copy()
        probs = np.array(self.probabilities, dtype=float)
        if probs.ndim != 1 or probs.shape[0] != atoms.shape[0]:
            raise ConfigError("one probability per atom is required")
        if np.any(probs < 0):
            raise ConfigError("atom probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise ConfigError(
                f"atom probabilities sum to {probs.sum()!r}, not 1 within {_PROB_TOL}"
            )
        atoms.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probabilities", probs)
        if self.dimension <= 0:
            object.__setattr__(self, "dimension", atoms.shape[1])

    @property
    def point_dim(self) -> int:
        return self.atoms.shape[1]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(self.atoms.shape[0], size=n, p=self.probabilities)
        return self.atoms[idx].copy()


@dataclass(frozen=True)
class GaussianMixtureClassification:
    """Two-class Gaussian mixture emitting points (x, y) with y in {-1, +1}."""

    means: np.ndarray
    covariance_scale: float
    class_priors: tuple[float, float] = (0.5, 0.5)

    kind = "gaussian-mixture-classification"

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        if means.ndim != 2 or means.shape[0] != 2:
            raise ConfigError("means must be a (2, d) array, one row per class")
        if not self.covariance_scale > 0:
            raise ConfigError("covariance_scale must be strictly positive")
        priors = np.asarray(self.class_priors, dtype=float)
        if priors.shape != (2,) or np.any(priors < 0):
            raise ConfigError("class_priors must be two nonnegative numbers")
        if abs(priors.sum() - 1.0) > _PROB_TOL:
            raise ConfigError("class priors must sum to 1")
        means.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "class_priors", (float(priors[0]), float(priors[1])))

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    @property
    def point_dim(self) -> int:
        return self.means.shape[1] + 1

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        d = self.dimension
        classes = rng.choice(2, size=n, p=np.asarray(self.class_priors))
        x = self.means[classes] + self.covariance_scale * rng.standard_normal((n, d))
        y = np.where(classes == 1, 1.0, -1.0)
        return np.column_stack([x, y])


@dataclass(frozen=True)
class LinearRegressionDistribution:
    """Gaussian-design linear model emitting points (x, y), y = <w*, x> + noise."""

    true_weight: np.ndarray
    input_scale: float = 1.0
    noise_std: float = 0.0

    kind = "linear-regression"

    def __post_init__(self):
        w = np.array(self.true_weight, dtype=float)
        if w.ndim != 1:
            raise ConfigError("true_weight must be a vector")
        if not self.input_scale > 0:
            raise ConfigError("input_scale must be strictly positive")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "true_weight", w)

    @property
    def dimension(self) -> int:
        return self.true_weight.shape[0]

    @property
    def point_dim(self) -> int:
        return self.true_weight.shape[0] + 1

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        d = self.dimension
        x = np.sqrt(self.input_scale) * rng.standard_normal((n, d))
        y = x @ self.true_weight + self.noise_std * rng.standard_normal(n)
        return np.column_stack([x, y])


@dataclass(frozen=True)
class Dataset:
    """An ordered sample of n data points plus the seed that generated it."""

    points: np.ndarray
    n: int
    source_seed: int

    def __post_init__(self):
        pts = _as_points(self.points).copy()
        if pts.shape[0] != self.n:
            raise ConfigError("dataset length does not match n")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def sample_dataset(dist, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. points; bit-reproducible from (dist, n, seed)."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    rng = rng_from(seed)
    return Dataset(points=dist.sample(rng, n), n=n, source_seed=int(seed))


def empirical_distribution(dataset: Dataset, dimension: int | None = None) -> FiniteSupport:
    """The empirical measure of a dataset: one atom of mass 1/n per point.

    Uniform weights are kept exactly as fl(1/n) so that weighted population
    reductions reproduce the sample reductions bit for bit.
    """
    return FiniteSupport(
        atoms=dataset.points.copy(),
        probabilities=np.full(dataset.n, 1.0 / dataset.n),
        dimension=dimension or 0,
    )


def atomize(dist, num_atoms: int, seed: int) -> FiniteSupport:
    """Freeze a sampleable distribution into a uniform finite-support one.

    Population quantities of the returned distribution are exact, which is
    what the bound-verification experiments require.
    """
    if num_atoms < 1:
        raise ConfigError("num_atoms must be at least 1")
    rng = rng_from(seed)
    atoms = dist.sample(rng, num_atoms)
    probs = np.full(num_atoms, 1.0 / num_atoms)
    probs[-1] = 1.0 - probs[:-1].sum()
    return FiniteSupport(atoms=atoms, probabilities=probs, dimension=dist.dimension)


# ---------------------------------------------------------------------------
# Smooth clipping ramp
# ---------------------------------------------------------------------------
#
# clip(u) maps a nonnegative raw loss into [0, B]:
#
#   clip(u) = u                          for u <= B - m
#   clip(u) = B - m + m * g(s)           for B - m < u < B + m,  s = (u-B+m)/(2m)
#   clip(u) = B                          for u >= B + m
#
# with the ramp g(s) = 2s - 2s^3 + s^4, the degree-<=5 Hermite interpolant of
# (value, slope, curvature) = (0, 2, 0) at s=0 and (1, 0, 0) at s=1. It gives
# a C^2 clip with 0 <= clip'(u) = g'(s)/2 <= 1 and |clip''(u)| <= 3/(4m).


def clip_value(raw, B: float, margin: float):
    """Apply the C^2 ramp; accepts scalars or arrays, preserves shape."""
    u = np.asarray(raw, dtype=float)
    s = np.clip((u - (B - margin)) / (2.0 * margin), 0.0, 1.0)
    g = s * (2.0 + s * s * (s - 2.0))
    out = np.where(u <= B - margin, u, (B - margin) + margin * g)
    out = np.minimum(np.maximum(out, 0.0), B)  # exact range despite rounding
    return out if out.ndim else float(out)


def clip_derivative(raw, B: float, margin: float):
    """d clip / d raw; 1 on the linear part, 0 on the plateau."""
    u = np.asarray(raw, dtype=float)
    s = np.clip((u - (B - margin)) / (2.0 * margin), 0.0, 1.0)
    gp = 2.0 - 6.0 * s * s + 4.0 * s ** 3
    out = np.where(u <= B - margin, 1.0, 0.5 * gp)
    out = np.where(u >= B + margin, 0.0, out)
    return out if out.ndim else float(out)


def _check_clip_params(B: float, margin: float):
    if not B > 0:
        raise ConfigError("loss bound B must be strictly positive")
    if not 0 < margin <= B:
        raise ConfigError("clip margin must lie in (0, B]")


# ---------------------------------------------------------------------------
# Loss models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClippedQuadraticLoss:
    """loss(w, z) = clip(0.5 * ||w - z||^2), z living in weight space.

    Post-clip constants: the loss is constant outside ||w - z||^2 <= 2(B+m),
    so L = sqrt(2(B+m)) and M = 1 + (3 / 4m) * 2(B+m).
    """

    dimension: int
    B: float = 1.0
    clip_margin: float = 0.25
    L: float = field(init=False)
    M: float = field(init=False)

    kind = "clipped-quadratic"

    def __post_init__(self):
        _check_clip_params(self.B, self.clip_margin)
        if self.dimension < 1:
            raise ConfigError("dimension must be at least 1")
        active = 2.0 * (self.B + self.clip_margin)
        object.__setattr__(self, "L", float(np.sqrt(active)))
        object.__setattr__(self, "M", 1.0 + 3.0 / (4.0 * self.clip_margin) * active)

    @property
    def point_dim(self) -> int:
        return self.dimension

    def raw_over(self, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        diff = points[:, None, :] - weights[None, :, :]
        return 0.5 * np.einsum("nmd,nmd->nm", diff, diff)

    def values_over(self, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        return clip_value(self.raw_over(weights, points), self.B, self.clip_margin)

    def gradients_at(self, w: np.ndarray, points: np.ndarray) -> np.ndarray:
        diff = w[None, :] - points
        raw = 0.5 * np.einsum("nd,nd->n", diff, diff)
        return clip_derivative(raw, self.B, self.clip_margin)[:, None] * diff


@dataclass(frozen=True)
class ClippedLogisticLoss:
    """loss(w, (x, y)) = clip(log(1 + exp(-y <w, x~>))) with capped features.

    Features are rescaled inside the loss, x~ = x * min(1, cap/||x||), so the
    gradient norm in w never exceeds the cap for any data point. Post-clip
    constants: L = cap, M = cap^2 / 4 + (3 / 4m) * cap^2.
    """

    dimension: int
    B: float = 1.0
    clip_margin: float = 0.25
    feature_cap: float = 1.0
    L: float = field(init=False)
    M: float = field(init=False)

    kind = "clipped-logistic"

    def __post_init__(self):
        _check_clip_params(self.B, self.clip_margin)
        if self.dimension < 1:
            raise ConfigError("dimension must be at least 1")
        if not self.feature_cap > 0:
            raise ConfigError("feature_cap must be strictly positive")
        cap = self.feature_cap
        object.__setattr__(self, "L", float(cap))
        object.__setattr__(
            self, "M", cap * cap / 4.0 + 3.0 / (4.0 * self.clip_margin) * cap * cap
        )

    @property
    def point_dim(self) -> int:
        return self.dimension + 1

    def _split(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x, y = points[:, : self.dimension], points[:, self.dimension]
        norms = np.linalg.norm(x, axis=1)
        scale = np.minimum(1.0, self.feature_cap / np.maximum(norms, 1e-300))
        return x * scale[:, None], y

    @staticmethod
    def _softplus(t: np.ndarray) -> np.ndarray:
        return np.logaddexp(0.0, t)

    def raw_over(self, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        x, y = self._split(points)
        return self._softplus(-y[:, None] * (x @ weights.T))

    def values_over(self, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        return clip_value(self.raw_over(weights, points), self.B, self.clip_margin)

    def gradients_at(self, w: np.ndarray, points: np.ndarray) -> np.ndarray:
        x, y = self._split(points)
        t = -y * (x @ w)
        raw = self._softplus(t)
        sigma = 0.5 * (1.0 + np.tanh(0.5 * t))  # logistic(t), overflow-safe
        outer = clip_derivative(raw, self.B, self.clip_margin) * sigma
        return (-y * outer)[:, None] * x


@dataclass(frozen=True)
class TableLoss:
    """Explicit loss values over finite grids of weights and data points."""

    w_points: np.ndarray
    z_points: np.ndarray
    values: np.ndarray
    B: float = 1.0
    L = None
    M = None

    kind = "table"

    def __post_init__(self):
        w_pts = _as_points(self.w_points).copy()
        z_pts = _as_points(self.z_points).copy()
        vals = np.array(self.values, dtype=float)
        if vals.shape != (w_pts.shape[0], z_pts.shape[0]):
            raise ConfigError("values must have shape (num weights, num points)")
        if not self.B > 0:
            raise ConfigError("loss bound B must be strictly positive")
        if np.any(vals < 0) or np.any(vals > self.B):
            raise ConfigError("table entries must lie in [0, B]")
        for arr in (w_pts, z_pts, vals):
            arr.setflags(write=False)
        object.__setattr__(self, "w_points", w_pts)
        object.__setattr__(self, "z_points", z_pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(
            self, "_w_index", {row.tobytes(): i for i, row in enumerate(w_pts)}
        )
        object.__setattr__(
            self, "_z_index", {row.tobytes(): i for i, row in enumerate(z_pts)}
        )

    @property
    def dimension(self) -> int:
        return self.w_points.shape[1]

    @property
    def point_dim(self) -> int:
        return self.z_points.shape[1]

    def _lookup(self, index: dict, row: np.ndarray, what: str) -> int:
        key = np.ascontiguousarray(row, dtype=float).tobytes()
        try:
            return index[key]
        except KeyError:
            raise DomainError(f"{what} {row!r} is not on the table grid") from None

    def values_over(self, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
        wi = [self._lookup(self._w_index, w, "weight") for w in weights]
        zi = [self._lookup(self._z_index, z, "data point") for z in points]
        return self.values[np.ix_(wi, zi)].T

    def gradients_at(self, w, points):
        raise CapabilityError("table losses do not define gradients")


# ---------------------------------------------------------------------------
# Risks and gaps
# ---------------------------------------------------------------------------


def _check_point_dim(model, points: np.ndarray):
    if points.shape[1] != model.point_dim:
        raise ConfigError(
            f"data points have {points.shape[1]} coordinates, "
            f"model expects {model.point_dim}"
        )


def loss_table(model, weights, dataset: Dataset) -> np.ndarray:
    """Matrix of losses, entry (i, j) = loss(w_j, z_i)."""
    block, _ = _as_weight_block(weights)
    _check_point_dim(model, dataset.points)
    return model.values_over(block, dataset.points)


def empirical_risk(model, w, dataset: Dataset):
    """Mean loss over the sample; vectorized over a stack of weights."""
    block, single = _as_weight_block(w)
    _check_point_dim(model, dataset.points)
    means = model.values_over(block, dataset.points).mean(axis=0)
    return float(means[0]) if single else means


def population_risk(model, w, dist):
    """Exact expected loss; only finite-support distributions qualify."""
    if getattr(dist, "kind", None) != "finite-support":
        raise CapabilityError(
            f"population risk is exact only for finite-support distributions, "
            f"got kind={getattr(dist, 'kind', type(dist).__name__)!r}"
        )
    block, single = _as_weight_block(w)
    _check_point_dim(model, dist.atoms)
    vals = dist.probabilities @ model.values_over(block, dist.atoms)
    return float(vals[0]) if single else vals


def grad_on_points(model, w, points) -> np.ndarray:
    """Mean analytic loss gradient over an explicit block of points.

    Reduced as a uniform-weight dot product, the same arithmetic used by
    :func:`grad_population`, so the two agree exactly on empirical measures.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    pts = _as_points(points)
    _check_point_dim(model, pts)
    grads = model.gradients_at(w, pts)
    return np.full(pts.shape[0], 1.0 / pts.shape[0]) @ grads


def grad_empirical(model, w, dataset: Dataset) -> np.ndarray:
    """Exact gradient of the empirical risk."""
    return grad_on_points(model, w, dataset.points)


def grad_population(model, w, dist) -> np.ndarray:
    """Probability-weighted gradient over a finite-support distribution."""
    if getattr(dist, "kind", None) != "finite-support":
        raise CapabilityError(
            "population gradients are exact only for finite-support distributions"
        )
    w = np.atleast_1d(np.asarray(w, dtype=float))
    _check_point_dim(model, dist.atoms)
    grads = model.gradients_at(w, dist.atoms)
    return dist.probabilities @ grads


class GapResult(NamedTuple):
    value: float
    argmax: int
    abs_value: float
    abs_argmax: int


def gen_gap_sup(model, dataset: Dataset, dist, weights) -> GapResult:
    """Worst generalization gap over a finite set of weight vectors.

    Returns both max_w (population - empirical) and the absolute variant
    max_w |population - empirical| with their argmax indices.
    """
    block, _ = _as_weight_block(weights)
    if block.shape[0] == 0:
        raise DomainError("gen_gap_sup needs a nonempty set of weights")
    emp = empirical_risk(model, block, dataset)
    pop = population_risk(model, block, dist)
    gaps = np.atleast_1d(pop - emp)
    j = int(np.argmax(gaps))
    ja = int(np.argmax(np.abs(gaps)))
    return GapResult(float(gaps[j]), j, float(abs(gaps[ja])), ja)
