"""Closed-form generalization bound assemblies.

Every function here combines precomputed ingredients (complexity estimates,
information terms, covering data) into a :class:`BoundReport` whose `value`
is exactly the sum of its named terms. Information terms are never estimated
in this module; they are produced by the exact enumeration or dynamics code
and passed in.

Most formulas have the shape  base + a / lambda + c * lambda  with
a = information + confidence mass and c the residual coefficient; passing
``lam="optimize"`` uses the analytic minimizer lambda* = sqrt(a / c), which
attains  base + 2 * sqrt(a * c).

Unpinned absolute constants inherited from the concentration step default to
9/8 and are stamped into every report that uses them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateError, DomainError

__all__ = [
    "BoundReport",
    "MCDIARMID_CONSTANT",
    "generic_subgaussian_bound",
    "pacbayes_rademacher_upper",
    "pacbayes_rademacher_upper_closed",
    "mgf_finite_upper",
    "covering_upper",
    "fractal_upper",
    "lower_bound",
    "sgld_upper",
    "cld_upper_brownian",
    "baseline_bounds",
    "gibbs_rademacher_posterior",
    "gibbs_objective",
]

MCDIARMID_CONSTANT = 9.0 / 8.0

_RESERVED_KEYS = ("formula_id", "side", "zeta", "lambda", "lambda_value", "value")


@dataclass(frozen=True)
class BoundReport:
    """Itemized bound: value == fsum(terms.values()) by construction."""

    formula_id: str
    side: str  # "upper" | "lower"
    terms: dict[str, float]
    zeta: float
    lam: float | str | None  # as requested: a number, "optimized", or None
    lambda_value: float | None  # effective numeric value when applicable
    value: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.side not in ("upper", "lower"):
            raise ConfigError("side must be 'upper' or 'lower'")
        checksum = math.fsum(self.terms.values())
        if abs(checksum - self.value) > 1e-12 * max(1.0, abs(self.value)):
            raise ConfigError("report value does not match its term sum")

    def to_flat_dict(self) -> dict:
        """Flat JSON form: reserved keys, then one key per term, then metadata."""
        out = {
            "formula_id": self.formula_id,
            "side": self.side,
            "zeta": self.zeta,
            "lambda": self.lam,
            "lambda_value": self.lambda_value,
            "value": self.value,
        }
        for name, val in self.terms.items():
            out[name] = val
        for name, val in self.metadata.items():
            out[name] = val
        return out

    @classmethod
    def from_flat_dict(cls, data: dict) -> "BoundReport":
        known_meta = (
            "gamma",
            "claimed_confidence",
            "mcdiarmid_constant",
            "universal_constant",
            "metric",
            "assumption_conditional",
            "holds_with_probability",
        )
        terms = {
            k: v
            for k, v in data.items()
            if k not in _RESERVED_KEYS and k not in known_meta
        }
        metadata = {k: data[k] for k in known_meta if k in data}
        return cls(
            formula_id=data["formula_id"],
            side=data["side"],
            terms=terms,
            zeta=data["zeta"],
            lam=data["lambda"],
            lambda_value=data["lambda_value"],
            value=data["value"],
            metadata=metadata,
        )


def _check_zeta(zeta: float):
    if not 0.0 < zeta < 1.0:
        raise ConfigError("zeta must lie strictly inside (0, 1)")


def _resolve_lambda(lam, a: float, c: float) -> tuple[float, float | str]:
    """Return (numeric lambda, lambda as requested); a/lambda + c*lambda shape."""
    if lam in ("optimize", "optimized"):
        if a <= 0 or c <= 0:
            raise DomainError("lambda optimization needs positive a and c")
        return float(np.sqrt(a / c)), "optimized"
    lam = float(lam)
    if lam <= 0:
        raise ConfigError("lambda must be strictly positive")
    return lam, lam


def _report(formula_id, side, terms, zeta, lam, lambda_value, **metadata):
    return BoundReport(
        formula_id=formula_id,
        side=side,
        terms={k: float(v) for k, v in terms.items()},
        zeta=float(zeta),
        lam=lam,
        lambda_value=lambda_value,
        value=math.fsum(terms.values()),
        metadata=metadata,
    )


def generic_subgaussian_bound(
    it_term: float, zeta: float, lam, residual_coeff: float
) -> BoundReport:
    """Template bound (it + log(1/zeta)) / lambda + lambda * residual_coeff."""
    _check_zeta(zeta)
    if residual_coeff < 0:
        raise ConfigError("residual coefficient must be nonnegative")
    conf = np.log(1.0 / zeta)
    lv, lam_out = _resolve_lambda(lam, it_term + conf, residual_coeff)
    terms = {
        "it": it_term / lv,
        "confidence": conf / lv,
        "residual": lv * residual_coeff,
    }
    return _report("generic-subgaussian", "upper", terms, zeta, lam_out, lv)


def pacbayes_rademacher_upper(
    rad: float, it_term: float, B: float, n: int, zeta: float, lam
) -> BoundReport:
    """2*rad + (it + log(1/zeta)) / lambda + lambda * 9 B^2 / (8 n)."""
    _check_zeta(zeta)
    conf = np.log(1.0 / zeta)
    coeff = MCDIARMID_CONSTANT * B * B / n
    lv, lam_out = _resolve_lambda(lam, it_term + conf, coeff)
    terms = {
        "complexity": 2.0 * rad,
        "it": it_term / lv,
        "confidence": conf / lv,
        "residual": lv * coeff,
    }
    return _report(
        "rademacher-upper", "upper", terms, zeta, lam_out, lv,
        mcdiarmid_constant=MCDIARMID_CONSTANT,
    )


def pacbayes_rademacher_upper_closed(
    rad_expect: float, kl: float, B: float, n: int, zeta: float
) -> BoundReport:
    """Lambda-free form 2*rad + 6 B sqrt((KL + log(2/zeta)) / (2 n))."""
    _check_zeta(zeta)
    terms = {
        "complexity": 2.0 * rad_expect,
        "combined": 6.0 * B * np.sqrt((kl + np.log(2.0 / zeta)) / (2.0 * n)),
    }
    return _report("rademacher-upper-closed", "upper", terms, zeta, None, None)


def mgf_finite_upper(
    expected_cardinality: float, it_term: float, B: float, n: int, zeta: float, lam
) -> BoundReport:
    """(log E|W| + it + log(1/zeta)) / lambda + 2 lambda B^2 / n."""
    _check_zeta(zeta)
    if expected_cardinality < 1:
        raise ConfigError("expected cardinality must be at least 1")
    conf = np.log(1.0 / zeta)
    card = np.log(expected_cardinality)
    coeff = 2.0 * B * B / n
    lv, lam_out = _resolve_lambda(lam, card + it_term + conf, coeff)
    terms = {
        "cardinality": card / lv,
        "it": it_term / lv,
        "confidence": conf / lv,
        "residual": lv * coeff,
    }
    return _report("mgf-finite-upper", "upper", terms, zeta, lam_out, lv)


def covering_upper(
    delta: float,
    cover_size: int,
    B: float,
    n: int,
    it_term: float,
    zeta: float,
    lam,
    metric: str = "data-dependent",
    L: float | None = None,
    constant: float = MCDIARMID_CONSTANT,
) -> BoundReport:
    """Covering-number bound at resolution delta.

    data-dependent metric: 2*delta + 2B sqrt(2 log N / n) + it/lambda + ...
    euclidean metric:      2*L*delta + same tail (needs the Lipschitz L).
    """
    _check_zeta(zeta)
    if cover_size < 1:
        raise ConfigError("cover size must be at least 1")
    if delta < 0:
        raise ConfigError("delta must be nonnegative")
    if metric == "euclidean":
        if L is None:
            raise ConfigError("the euclidean form needs the Lipschitz constant L")
        resolution = 2.0 * L * delta
    elif metric == "data-dependent":
        resolution = 2.0 * delta
    else:
        raise ConfigError(f"unknown metric {metric!r}")
    conf = np.log(1.0 / zeta)
    coeff = constant * B * B / n
    lv, lam_out = _resolve_lambda(lam, it_term + conf, coeff)
    terms = {
        "resolution": resolution,
        "complexity": 2.0 * B * np.sqrt(2.0 * np.log(cover_size) / n),
        "it": it_term / lv,
        "confidence": conf / lv,
        "residual": lv * coeff,
    }
    return _report(
        "covering-upper", "upper", terms, zeta, lam_out, lv,
        metric=metric, mcdiarmid_constant=constant,
    )


def fractal_upper(
    dim: float,
    eps: float,
    n: int,
    B: float,
    it_term: float,
    zeta: float,
    lam,
    metric: str = "data-dependent",
    L: float | None = None,
    gamma: float = 0.0,
    constant: float = MCDIARMID_CONSTANT,
) -> BoundReport:
    """Box-dimension bound; the confidence debit gamma rides as metadata.

    data-dependent: 2/n + 2B sqrt(2 (dim+eps) log n / n) + ..., holds with
    probability >= 1 - zeta - gamma; euclidean: 2L/n + 4B sqrt((dim+eps)
    log n / (2n)) + ..., holds with probability >= 1 - zeta - 3*gamma.
    Both are conditional on convergence hypotheses that cannot be checked
    from data, hence assumption_conditional=True in the metadata.
    """
    _check_zeta(zeta)
    if dim < 0 or eps <= 0 or n < 2:
        raise ConfigError("need dim >= 0, eps > 0 and n >= 2")
    if metric == "euclidean":
        if L is None:
            raise ConfigError("the euclidean form needs the Lipschitz constant L")
        resolution = 2.0 * L / n
        complexity = 4.0 * B * np.sqrt((dim + eps) * np.log(n) / (2.0 * n))
        claimed = 1.0 - zeta - 3.0 * gamma
    elif metric == "data-dependent":
        resolution = 2.0 / n
        complexity = 2.0 * B * np.sqrt(2.0 * (dim + eps) * np.log(n) / n)
        claimed = 1.0 - zeta - gamma
    else:
        raise ConfigError(f"unknown metric {metric!r}")
    conf = np.log(1.0 / zeta)
    coeff = constant * B * B / n
    lv, lam_out = _resolve_lambda(lam, it_term + conf, coeff)
    terms = {
        "resolution": resolution,
        "complexity": complexity,
        "it": it_term / lv,
        "confidence": conf / lv,
        "residual": lv * coeff,
    }
    return _report(
        "fractal-upper", "upper", terms, zeta, lam_out, lv,
        metric=metric, gamma=gamma, claimed_confidence=claimed,
        mcdiarmid_constant=constant, assumption_conditional=True,
    )


def lower_bound(
    rad: float,
    B: float,
    n: int,
    it_term: float,
    zeta: float,
    lam,
    constant: float = MCDIARMID_CONSTANT,
) -> BoundReport:
    """rad/2 - B/(2 sqrt(n)) - (it + log(1/zeta))/lambda - C B^2 lambda / n.

    A lower bound on the worst absolute gap; optimizing lambda maximizes it.
    """
    _check_zeta(zeta)
    conf = np.log(1.0 / zeta)
    coeff = constant * B * B / n
    lv, lam_out = _resolve_lambda(lam, it_term + conf, coeff)
    terms = {
        "complexity": 0.5 * rad,
        "sample": -B / (2.0 * np.sqrt(n)),
        "it": -it_term / lv,
        "confidence": -conf / lv,
        "residual": -lv * coeff,
    }
    return _report(
        "rademacher-lower", "lower", terms, zeta, lam_out, lv,
        mcdiarmid_constant=constant,
    )


def sgld_upper(kl: float, T_iters: int, B: float, n: int, zeta: float, lam) -> BoundReport:
    """(log(T/zeta) + KL) / lambda + 2 lambda B^2 / n for the T-step recursion.

    The optimized value is 2 B sqrt(2 (log(T/zeta) + KL) / n), attained at
    lambda* = sqrt(n (log(T/zeta) + KL) / (2 B^2)).
    """
    _check_zeta(zeta)
    if kl < 0:
        raise ConfigError("KL must be nonnegative")
    if T_iters < 1:
        raise ConfigError("T must be at least 1")
    conf = np.log(T_iters / zeta)
    coeff = 2.0 * B * B / n
    lv, lam_out = _resolve_lambda(lam, kl + conf, coeff)
    terms = {
        "it": kl / lv,
        "confidence": conf / lv,
        "residual": lv * coeff,
    }
    return _report("sgld-trajectory", "upper", terms, zeta, lam_out, lv)


def cld_upper_brownian(
    rad_term: float, kl: float, B: float, n: int, zeta: float, lam
) -> BoundReport:
    """2*rad + KL/lambda + log(1/zeta)/lambda + lambda * 9 B^2/(8 n)."""
    _check_zeta(zeta)
    if kl < 0:
        raise ConfigError("KL must be nonnegative")
    conf = np.log(1.0 / zeta)
    coeff = MCDIARMID_CONSTANT * B * B / n
    lv, lam_out = _resolve_lambda(lam, kl + conf, coeff)
    terms = {
        "complexity": 2.0 * rad_term,
        "it": kl / lv,
        "confidence": conf / lv,
        "residual": lv * coeff,
    }
    return _report(
        "cld-brownian", "upper", terms, zeta, lam_out, lv,
        mcdiarmid_constant=MCDIARMID_CONSTANT,
    )


def baseline_bounds(kind: str, value: float, B: float, n: int, zeta: float) -> BoundReport:
    """Comparison baselines for fixed hypothesis sets / classical posteriors.

    kind="rademacher": 2*value + 3 B sqrt(log(1/zeta) / (2 n)), with `value`
    an empirical Rademacher complexity. kind="kl": B * sqrt((value +
    log(2 sqrt(n)/zeta)) / (2 n)), with `value` a KL divergence; losses are
    rescaled to [0, 1] internally, hence the outer factor B.
    """
    _check_zeta(zeta)
    if kind == "rademacher":
        terms = {
            "complexity": 2.0 * value,
            "confidence": 3.0 * B * np.sqrt(np.log(1.0 / zeta) / (2.0 * n)),
        }
        return _report("baseline-rademacher", "upper", terms, zeta, None, None)
    if kind == "kl":
        if value < 0:
            raise ConfigError("KL must be nonnegative")
        terms = {
            "combined": B * np.sqrt(
                (value + np.log(2.0 * np.sqrt(n) / zeta)) / (2.0 * n)
            ),
        }
        return _report("baseline-kl", "upper", terms, zeta, None, None)
    raise ConfigError(f"unknown baseline kind {kind!r}")


def gibbs_rademacher_posterior(menu_scores, prior_weights, lam: float) -> np.ndarray:
    """Bound-minimizing posterior over a finite menu of hypothesis sets.

    weights ∝ prior * exp(-lambda * score), where score_j is the worst
    empirical risk plus twice the Rademacher complexity of menu entry j.
    By the variational formula for relative entropy this minimizes
    E_rho[score] + (KL(rho || prior) + log(1/zeta)) / lambda over posteriors.
    """
    scores = np.asarray(menu_scores, dtype=float)
    prior = np.asarray(prior_weights, dtype=float)
    if scores.shape != prior.shape or scores.ndim != 1:
        raise ConfigError("scores and prior weights must be matching vectors")
    if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-12:
        raise ConfigError("prior weights must be a probability vector")
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    if lam == 0:
        return prior.copy()
    support = prior > 0
    finite = support & np.isfinite(scores)
    if not np.any(finite):
        raise DegenerateError("all prior mass sits on infinitely scored sets")
    logw = np.full(scores.shape, -np.inf)
    logw[finite] = np.log(prior[finite]) - lam * scores[finite]
    logw -= logw[finite].max()
    w = np.exp(logw)
    return w / w.sum()


def gibbs_objective(weights, menu_scores, prior_weights, lam: float, zeta: float) -> float:
    """E_rho[score] + (KL(rho || prior) + log(1/zeta)) / lambda, exactly."""
    _check_zeta(zeta)
    rho = np.asarray(weights, dtype=float)
    scores = np.asarray(menu_scores, dtype=float)
    prior = np.asarray(prior_weights, dtype=float)
    if lam <= 0:
        raise ConfigError("lambda must be strictly positive")
    mask = rho > 0
    if np.any(mask & (prior == 0)):
        return float("inf")
    kl = float(np.sum(rho[mask] * np.log(rho[mask] / prior[mask])))
    return float(rho @ np.where(mask, scores, 0.0) + (kl + np.log(1.0 / zeta)) / lam)
