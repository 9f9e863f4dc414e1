"""Sign-randomized complexity estimates, covering numbers, box dimensions.

The empirical Rademacher complexity of a finite hypothesis set tabulated as
loss columns is

    (1/n) * E_eps [ max_j sum_i eps_i * loss[i, j] ],

estimated here by Monte Carlo over independent sign vectors. Covering
numbers use internal covers (centers restricted to the point set) built by
farthest-first traversal: the traversal order yields, for every scale at
once, a greedy cover size (upper estimate of the minimal cover) and a
packing count at separation > 2*delta (certified lower bound on the minimal
cover with closed delta-balls).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, RangeError
from .seeds import rng_from

__all__ = [
    "LossMatrix",
    "RademacherEstimate",
    "MgfEstimate",
    "CoveringCurve",
    "GreedyCover",
    "DimensionFit",
    "rademacher_mc",
    "rademacher_mgf_mc",
    "massart_bound",
    "pseudometric_matrix",
    "farthest_first_traversal",
    "greedy_cover",
    "covering_curve",
    "fit_box_dimension",
    "rademacher_cld_bound",
]

MGF_EXPONENT_CAP = 30.0


@dataclass(frozen=True)
class LossMatrix:
    """n x K matrix of losses; column j tabulates hypothesis j on the sample."""

    values: np.ndarray
    B: float

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2:
            raise ConfigError("loss matrix must be 2-D (points x hypotheses)")
        if not self.B > 0:
            raise ConfigError("loss bound B must be strictly positive")
        if vals.size and (vals.min() < 0 or vals.max() > self.B):
            raise ConfigError("loss matrix entries must lie in [0, B]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def num_hypotheses(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RademacherEstimate:
    mean: float
    std_error: float
    draws: int
    seed: int


@dataclass(frozen=True)
class MgfEstimate:
    mean: float
    std_error: float
    draws: int
    seed: int
    lam: float


def _sup_sign_sums(lm: LossMatrix, signs: np.ndarray) -> np.ndarray:
    """max_j sum_i eps_i * loss[i, j] for each sign row; shape (draws,)."""
    return (signs @ lm.values).max(axis=1)


def rademacher_mc(lm: LossMatrix, draws: int, seed: int) -> RademacherEstimate:
    """Monte-Carlo empirical Rademacher complexity with its standard error."""
    if lm.values.size == 0:
        raise DomainError("empty loss matrix")
    if draws < 1:
        raise ConfigError("draws must be at least 1")
    rng = rng_from(seed)
    sups = np.empty(draws)
    chunk = max(1, min(draws, 1 << 16))
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        signs = rng.integers(0, 2, size=(m, lm.n)) * 2.0 - 1.0
        sups[done : done + m] = _sup_sign_sums(lm, signs)
        done += m
    sups /= lm.n
    se = float(sups.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0
    return RademacherEstimate(float(sups.mean()), se, draws, int(seed))


def rademacher_mgf_mc(
    lm: LossMatrix, lam: float, draws: int, seed: int, exponent_cap: float = MGF_EXPONENT_CAP
) -> MgfEstimate:
    """Monte-Carlo estimate of E_eps exp{(lam/n) max_j sum_i eps_i loss[i,j]}."""
    if lm.values.size == 0:
        raise DomainError("empty loss matrix")
    if lam <= 0:
        raise DomainError("lambda must be strictly positive")
    if lam * lm.B > exponent_cap:
        raise RangeError(
            f"lambda * B = {lam * lm.B:g} exceeds the overflow cap {exponent_cap:g}; "
            "reduce lambda"
        )
    rng = rng_from(seed)
    vals = np.empty(draws)
    chunk = max(1, min(draws, 1 << 16))
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        signs = rng.integers(0, 2, size=(m, lm.n)) * 2.0 - 1.0
        vals[done : done + m] = np.exp(lam / lm.n * _sup_sign_sums(lm, signs))
        done += m
    se = float(vals.std(ddof=1) / np.sqrt(draws)) if draws > 1 else 0.0
    return MgfEstimate(float(vals.mean()), se, draws, int(seed), float(lam))


def massart_bound(K: int, B: float, n: int) -> float:
    """Finite-class complexity bound B * sqrt(2 log K / n); zero for K = 1."""
    if K < 1:
        raise DomainError("K must be at least 1")
    if n < 1 or B <= 0:
        raise ConfigError("B must be positive and n at least 1")
    return float(B * np.sqrt(2.0 * np.log(K) / n))


def pseudometric_matrix(lm: LossMatrix) -> np.ndarray:
    """Sample-averaged loss discrepancy d(j, j') = (1/n) sum_i |l_ij - l_ij'|."""
    vals = lm.values
    return np.abs(vals[:, :, None] - vals[:, None, :]).mean(axis=0)


# ---------------------------------------------------------------------------
# Covering numbers via farthest-first traversal
# ---------------------------------------------------------------------------


def _distances_from(data: np.ndarray, idx: int, precomputed: bool) -> np.ndarray:
    if precomputed:
        return data[idx]
    diff = data - data[idx]
    return np.sqrt(np.einsum("nd,nd->n", diff, diff))


def farthest_first_traversal(
    data, *, metric: str = "euclidean", stop_below: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Order points greedily by distance to the already chosen prefix.

    Returns (order, insertion_distances) where insertion_distances[0] = +inf
    and insertion_distances[i] is the distance of point order[i] to the
    prefix order[:i]; the sequence is nonincreasing. The prefix whose
    insertion distances all exceed r is an r-separated set, and the prefix up
    to the first distance <= r is an r-cover of the whole set. Traversal may
    stop once distances fall to `stop_below` or less.
    """
    if metric == "euclidean":
        pts = np.asarray(data, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        precomputed = False
        N = pts.shape[0]
        data_arr = pts
    elif metric in ("data-dependent", "precomputed"):
        data_arr = np.asarray(data, dtype=float)
        if data_arr.ndim != 2 or data_arr.shape[0] != data_arr.shape[1]:
            raise ConfigError("a precomputed metric requires a square matrix")
        precomputed = True
        N = data_arr.shape[0]
    else:
        raise ConfigError(f"unknown metric {metric!r}")
    if N == 0:
        raise DomainError("empty point set")

    order = np.empty(N, dtype=int)
    dists = np.empty(N)
    order[0] = 0
    dists[0] = np.inf
    min_dist = _distances_from(data_arr, 0, precomputed)
    k = 1
    while k < N:
        nxt = int(np.argmax(min_dist))
        d = float(min_dist[nxt])
        if d <= stop_below:
            break
        order[k] = nxt
        dists[k] = d
        np.minimum(min_dist, _distances_from(data_arr, nxt, precomputed), out=min_dist)
        k += 1
    return order[:k], dists[:k]


@dataclass(frozen=True)
class GreedyCover:
    """Internal cover at one scale plus the certified packing lower bound."""

    centers: tuple[int, ...]
    delta: float
    packing_lower_bound: int

    @property
    def size(self) -> int:
        return len(self.centers)


def greedy_cover(data, delta: float, *, metric: str = "euclidean") -> GreedyCover:
    """Farthest-point greedy cover with closed delta-balls.

    The returned size over-estimates the minimal cover; the packing count
    (points at pairwise distance > 2*delta in the traversal prefix) is a
    lower bound on it, so  packing <= minimal cover <= len(centers).
    """
    if not delta > 0:
        raise DomainError("delta must be strictly positive")
    order, dists = farthest_first_traversal(data, metric=metric, stop_below=delta)
    keep = int(np.sum(dists > delta)) if len(dists) > 1 else 1
    keep = max(keep, 1)
    packing = max(int(np.sum(dists > 2.0 * delta)), 1)
    return GreedyCover(tuple(int(i) for i in order[:keep]), float(delta), packing)


@dataclass(frozen=True)
class CoveringCurve:
    """(scale, cover size, packing size) triples at decreasing scales."""

    scales: np.ndarray
    cover_sizes: np.ndarray
    pack_sizes: np.ndarray
    metric: str

    def __post_init__(self):
        for name in ("scales", "cover_sizes", "pack_sizes"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.scales) >= 0):
            raise ConfigError("scales must be strictly decreasing")
        if np.any(np.diff(self.cover_sizes) < 0):
            raise ConfigError("cover sizes must grow as the scale shrinks")
        if np.any(self.pack_sizes > self.cover_sizes):
            raise ConfigError("packing sizes cannot exceed cover sizes")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("scale,cover_size,pack_size\n")
            for s, c, p in zip(self.scales, self.cover_sizes, self.pack_sizes):
                fh.write(f"{float(s)!r},{int(c)},{int(p)}\n")


def covering_curve(data, scales, *, metric: str = "euclidean") -> CoveringCurve:
    """Greedy cover and packing sizes at every scale from one traversal."""
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0:
        raise ConfigError("scales must be a nonempty 1-D sequence")
    if np.any(scales <= 0) or np.any(np.diff(scales) >= 0):
        raise ConfigError("scales must be positive and strictly decreasing")
    _, dists = farthest_first_traversal(data, metric=metric, stop_below=float(scales[-1]))
    tail = dists[1:]
    covers = np.array([1 + int(np.sum(tail > s)) for s in scales])
    packs = np.array([max(1, 1 + int(np.sum(tail > 2.0 * s))) for s in scales])
    packs = np.minimum(packs, covers)
    return CoveringCurve(scales.copy(), covers, packs, metric)


@dataclass(frozen=True)
class DimensionFit:
    """Log-log slope of cover size against inverse scale over a fit window."""

    dimension: float
    intercept: float
    rms_residual: float
    window: tuple[int, int]

    def __float__(self) -> float:
        return self.dimension


def default_fit_window(num_scales: int) -> tuple[int, int]:
    """Middle half of the scale range: drop the coarsest and finest quartiles.

    Trimming backs off for short scale lists so at least 3 points remain.
    """
    q = num_scales // 4
    while q > 0 and num_scales - 2 * q < 3:
        q -= 1
    return q, num_scales - q


def fit_box_dimension(curve: CoveringCurve, window: tuple[int, int] | None = None) -> DimensionFit:
    """Least-squares slope of log(cover size) on log(1/scale)."""
    if window is None:
        window = default_fit_window(len(curve.scales))
    lo, hi = window
    xs = np.log(1.0 / curve.scales[lo:hi])
    ys = np.log(curve.cover_sizes[lo:hi].astype(float))
    if xs.size < 3:
        raise DomainError("dimension fit needs at least 3 scales in the window")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    return DimensionFit(
        float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))), (lo, hi)
    )


def rademacher_cld_bound(
    B: float, L: float, sigma: float, d: int, T_time: float, n: int, C: float = 1.0
) -> float:
    """Closed-form complexity bound for diffusion trajectories:

        1/sqrt(n) + max(1, B) * sqrt(2 log(2 T n L^2 (1 + C^2 d^2 sigma^2)) / n).

    C is an unpinned universal constant, exposed as a knob (default 1).
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    arg = 2.0 * T_time * n * L ** 2 * (1.0 + C ** 2 * d ** 2 * sigma ** 2)
    if arg <= 1.0:
        raise DomainError(f"log argument {arg:g} must exceed 1")
    return float(1.0 / np.sqrt(n) + max(1.0, B) * np.sqrt(2.0 * np.log(arg) / n))
