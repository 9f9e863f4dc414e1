"""Exact enumeration over tiny finite instances.

A :class:`FiniteInstance` is a fully enumerable toy world: finitely many
data atoms with probabilities, a loss table over a finite hypothesis grid, a
finite menu of hypothesis sets, and a stochastic kernel assigning each
possible dataset a distribution over the menu. Everything downstream is an
exact finite sum: Rademacher complexities (all 2^n sign vectors),
expectations over datasets (all A^n tuples), information terms, and the
probability of whole bound events. Size caps keep the term count around
4^n * 2^n; exactness is the point, not scale.

Dataset enumeration order is lexicographic over atom-index tuples
(itertools.product order); kernel rows are indexed accordingly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bounds import MCDIARMID_CONSTANT
from .errors import CapacityError, ConfigError, DomainError
from .seeds import rng_from

__all__ = [
    "FiniteInstance",
    "CheckResult",
    "ItTerms",
    "exact_rademacher",
    "exact_mgf",
    "check_symmetrization",
    "check_exp_symmetrization",
    "check_desymmetrization",
    "finite_it_terms",
    "exact_bound_coverage",
    "finite_ipm",
    "random_instance",
]

MAX_N = 8
MAX_ATOMS = 4
MAX_MENU = 8

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class FiniteInstance:
    z_values: np.ndarray  # (A,) labels of the atoms; carried for reporting
    z_probabilities: np.ndarray  # (A,)
    n: int
    bound: float  # loss range [0, bound]
    loss_table: np.ndarray  # (H, A); row = hypothesis, column = atom
    menu: tuple[tuple[int, ...], ...]  # hypothesis sets as index tuples
    kernel: np.ndarray  # (A**n, len(menu)); rows sum to 1
    prior: np.ndarray | str = "optimized"

    def __post_init__(self):
        probs = np.array(self.z_probabilities, dtype=float)
        table = np.array(self.loss_table, dtype=float)
        values = np.array(self.z_values, dtype=float)
        A = probs.shape[0]
        if self.n < 1 or self.n > MAX_N:
            raise CapacityError(f"n must lie in [1, {MAX_N}]")
        if A < 1 or A > MAX_ATOMS:
            raise CapacityError(f"number of atoms must lie in [1, {MAX_ATOMS}]")
        if len(self.menu) < 1 or len(self.menu) > MAX_MENU:
            raise CapacityError(f"menu size must lie in [1, {MAX_MENU}]")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > _PROB_TOL:
            raise ConfigError("atom probabilities must be a probability vector")
        if table.ndim != 2 or table.shape[1] != A:
            raise ConfigError("loss table must be (hypotheses, atoms)")
        if not self.bound > 0 or table.min() < 0 or table.max() > self.bound:
            raise ConfigError("loss table entries must lie in [0, bound]")
        H = table.shape[0]
        menu = tuple(tuple(int(j) for j in s) for s in self.menu)
        for s in menu:
            if len(s) == 0 or any(j < 0 or j >= H for j in s):
                raise ConfigError("menu sets must be nonempty subsets of the grid")
        kernel = np.array(self.kernel, dtype=float)
        if kernel.shape != (A ** self.n, len(menu)):
            raise ConfigError(
                f"kernel must be ({A ** self.n}, {len(menu)}): one row per dataset"
            )
        if np.any(kernel < 0) or np.any(np.abs(kernel.sum(axis=1) - 1.0) > _PROB_TOL):
            raise ConfigError("kernel rows must be probability vectors")
        if isinstance(self.prior, str):
            if self.prior != "optimized":
                raise ConfigError('prior must be a weight vector or "optimized"')
        else:
            prior = np.array(self.prior, dtype=float)
            if prior.shape != (len(menu),) or np.any(prior < 0) \
                    or abs(prior.sum() - 1.0) > _PROB_TOL:
                raise ConfigError("explicit prior must be a distribution over the menu")
            prior.setflags(write=False)
            object.__setattr__(self, "prior", prior)
        for arr in (values, probs, table, kernel):
            arr.setflags(write=False)
        object.__setattr__(self, "z_values", values)
        object.__setattr__(self, "z_probabilities", probs)
        object.__setattr__(self, "loss_table", table)
        object.__setattr__(self, "menu", menu)
        object.__setattr__(self, "kernel", kernel)

    @property
    def num_atoms(self) -> int:
        return self.z_probabilities.shape[0]

    @property
    def num_hypotheses(self) -> int:
        return self.loss_table.shape[0]

    @property
    def num_datasets(self) -> int:
        return self.num_atoms ** self.n

    def datasets(self) -> np.ndarray:
        """All datasets as atom-index tuples, lexicographic order; (A^n, n)."""
        combos = itertools.product(range(self.num_atoms), repeat=self.n)
        return np.array(list(combos), dtype=int)

    def dataset_probabilities(self) -> np.ndarray:
        D = self.datasets()
        return np.prod(self.z_probabilities[D], axis=1)

    def empirical_risks(self) -> np.ndarray:
        """(A^n, H): mean loss of each hypothesis on each dataset."""
        D = self.datasets()
        return self.loss_table[:, D].mean(axis=2).T

    def population_risks(self) -> np.ndarray:
        return self.loss_table @ self.z_probabilities

    def resolved_prior(self) -> np.ndarray:
        """The explicit prior, or the kernel marginal over datasets."""
        if isinstance(self.prior, str):
            return self.dataset_probabilities() @ self.kernel
        return np.asarray(self.prior)

    def to_json(self) -> str:
        payload = {
            "schema": "finite-instance-v1",
            "z_values": self.z_values.tolist(),
            "z_probabilities": self.z_probabilities.tolist(),
            "n": self.n,
            "bound": self.bound,
            "loss_table": self.loss_table.tolist(),
            "menu": [list(s) for s in self.menu],
            "kernel": self.kernel.tolist(),
            "prior": self.prior if isinstance(self.prior, str) else list(self.prior),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "FiniteInstance":
        data = json.loads(text)
        if data.get("schema") != "finite-instance-v1":
            raise ConfigError("unrecognized finite-instance schema")
        prior = data["prior"]
        return cls(
            z_values=np.asarray(data["z_values"], dtype=float),
            z_probabilities=np.asarray(data["z_probabilities"], dtype=float),
            n=int(data["n"]),
            bound=float(data["bound"]),
            loss_table=np.asarray(data["loss_table"], dtype=float),
            menu=tuple(tuple(s) for s in data["menu"]),
            kernel=np.asarray(data["kernel"], dtype=float),
            prior=prior if isinstance(prior, str) else np.asarray(prior, dtype=float),
        )


def _sign_vectors(n: int) -> np.ndarray:
    """All 2^n sign vectors, each row in {-1, +1}^n."""
    combos = itertools.product((-1.0, 1.0), repeat=n)
    return np.array(list(combos))


def _rademacher_by_dataset(inst: FiniteInstance, set_index: int) -> np.ndarray:
    """Exact empirical Rademacher complexity of one menu set on every dataset."""
    D = inst.datasets()
    signs = _sign_vectors(inst.n)  # (2^n, n)
    sups = None
    for j in inst.menu[set_index]:
        sums = inst.loss_table[j][D] @ signs.T  # (A^n, 2^n)
        sups = sums if sups is None else np.maximum(sups, sums)
    return sups.mean(axis=1) / inst.n


def _sup_sign_sums(inst: FiniteInstance, dataset_index: int, set_index: int) -> np.ndarray:
    D = inst.datasets()
    if not 0 <= dataset_index < inst.num_datasets:
        raise DomainError("dataset index out of range")
    signs = _sign_vectors(inst.n)
    cols = inst.loss_table[list(inst.menu[set_index])][:, D[dataset_index]]  # (K, n)
    return (signs @ cols.T).max(axis=1)


def exact_rademacher(inst: FiniteInstance, dataset_index: int, set_index: int) -> float:
    """Exact sum over all 2^n sign vectors for one (dataset, menu set) pair."""
    return float(_sup_sign_sums(inst, dataset_index, set_index).mean() / inst.n)


def exact_mgf(
    inst: FiniteInstance, dataset_index: int, set_index: int, lam: float
) -> float:
    """Exact E_eps exp{(lam/n) sup sign sums} over all 2^n sign vectors."""
    if lam <= 0:
        raise DomainError("lambda must be strictly positive")
    sups = _sup_sign_sums(inst, dataset_index, set_index)
    return float(np.exp(lam / inst.n * sups).mean())


class CheckResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


_SLACK = 1e-10


def _set_gaps(inst: FiniteInstance, set_index: int) -> tuple[np.ndarray, np.ndarray]:
    """(worst gap, worst absolute gap) of one menu set on every dataset."""
    idx = list(inst.menu[set_index])
    emp = inst.empirical_risks()[:, idx]
    pop = inst.population_risks()[idx]
    diff = pop[None, :] - emp
    return diff.max(axis=1), np.abs(diff).max(axis=1)


def check_symmetrization(inst: FiniteInstance, set_index: int) -> CheckResult:
    """E_S[worst gap] <= 2 * E_S[Rademacher], both sides exact."""
    p = inst.dataset_probabilities()
    gaps, _ = _set_gaps(inst, set_index)
    rad = _rademacher_by_dataset(inst, set_index)
    lhs = float(p @ gaps)
    rhs = float(2.0 * (p @ rad))
    return CheckResult(lhs, rhs, lhs <= rhs + _SLACK)


def check_exp_symmetrization(inst: FiniteInstance, set_index: int, lam: float) -> CheckResult:
    """E_S e^{lam * worst gap} <= E_S E_eps e^{(2 lam / n) sup sign sums}."""
    if lam <= 0:
        raise DomainError("lambda must be strictly positive")
    p = inst.dataset_probabilities()
    gaps, _ = _set_gaps(inst, set_index)
    lhs = float(p @ np.exp(lam * gaps))

    D = inst.datasets()
    signs = _sign_vectors(inst.n)
    idx = list(inst.menu[set_index])
    sums = np.stack([inst.loss_table[j][D] @ signs.T for j in idx])  # (K, A^n, 2^n)
    sups = sums.max(axis=0)
    rhs = float(p @ np.exp(2.0 * lam / inst.n * sups).mean(axis=1))
    return CheckResult(lhs, rhs, lhs <= rhs + _SLACK)


def check_desymmetrization(inst: FiniteInstance, set_index: int) -> CheckResult:
    """E_S[worst absolute gap] >= E_S[Rademacher] / 2 - B / (2 sqrt(n))."""
    p = inst.dataset_probabilities()
    _, abs_gaps = _set_gaps(inst, set_index)
    rad = _rademacher_by_dataset(inst, set_index)
    lhs = float(p @ abs_gaps)
    rhs = float(0.5 * (p @ rad) - inst.bound / (2.0 * np.sqrt(inst.n)))
    return CheckResult(lhs, rhs, lhs >= rhs - _SLACK)


class ItTerms(NamedTuple):
    rn_table: np.ndarray  # (A^n, menu) posterior/prior ratios
    kl_per_dataset: np.ndarray  # (A^n,)
    I1: float
    Iinf: float


def finite_it_terms(inst: FiniteInstance) -> ItTerms:
    """Exact information terms of the kernel against its prior.

    I1 is the dataset-averaged relative entropy of the kernel rows; Iinf is
    the log of the largest posterior/prior ratio over supported pairs, and
    every pointwise log-ratio is bounded by it with equality attained.
    """
    prior = inst.resolved_prior()
    kernel = inst.kernel
    p = inst.dataset_probabilities()
    supported = kernel > 0
    bad = supported & (prior[None, :] <= 0)
    if np.any(bad):
        s, w = map(int, np.argwhere(bad)[0])
        raise DomainError(
            f"absolute continuity violated: kernel row {s} puts mass on menu "
            f"entry {w} that the prior assigns zero weight"
        )
    ratios = np.where(supported, kernel / np.where(prior > 0, prior, 1.0), 0.0)
    logs = np.where(supported, np.log(np.where(supported, ratios, 1.0)), 0.0)
    kl_rows = (kernel * logs).sum(axis=1)
    live = supported & (p[:, None] > 0)
    iinf = float(np.log(ratios[live].max())) if np.any(live) else 0.0
    return ItTerms(ratios, kl_rows, float(p @ kl_rows), iinf)


def exact_bound_coverage(
    inst: FiniteInstance,
    lam: float,
    zeta: float,
    formula: str,
    constant: float = MCDIARMID_CONSTANT,
) -> float:
    """Exact probability of one bound event over the enumerated world.

    formula "thm13-kl": kernel-averaged gap vs. averaged complexity plus the
    relative-entropy penalty, event over datasets. "thm13-disintegrated":
    per-(dataset, menu set) event weighted by the joint law, with the
    log-ratio penalty. "thm15-lower": the lower-bound event over datasets.
    """
    if lam <= 0:
        raise DomainError("lambda must be strictly positive")
    if not 0 < zeta < 1:
        raise ConfigError("zeta must lie in (0, 1)")
    p = inst.dataset_probabilities()
    prior = inst.resolved_prior()
    kernel = inst.kernel
    B = inst.bound
    n = inst.n
    conf = np.log(1.0 / zeta)

    num_sets = len(inst.menu)
    gaps = np.empty((inst.num_datasets, num_sets))
    abs_gaps = np.empty_like(gaps)
    rads = np.empty_like(gaps)
    for w in range(num_sets):
        gaps[:, w], abs_gaps[:, w] = _set_gaps(inst, w)
        rads[:, w] = _rademacher_by_dataset(inst, w)

    it = finite_it_terms(inst)

    if formula == "thm13-kl":
        lhs = (kernel * gaps).sum(axis=1)
        rhs = (
            2.0 * (kernel * rads).sum(axis=1)
            + (it.kl_per_dataset + conf) / lam
            + lam * 9.0 * B * B / (8.0 * n)
        )
        return float(p @ (lhs <= rhs + _SLACK))
    if formula == "thm13-disintegrated":
        supported = kernel > 0
        log_ratio = np.where(
            supported, np.log(np.where(supported, it.rn_table, 1.0)), 0.0
        )
        rhs = (
            2.0 * rads
            + (log_ratio + conf) / lam
            + lam * 9.0 * B * B / (8.0 * n)
        )
        event = gaps <= rhs + _SLACK
        joint = p[:, None] * kernel
        return float((joint * event).sum())
    if formula == "thm15-lower":
        lhs = (kernel * abs_gaps).sum(axis=1)
        rhs = (
            0.5 * (kernel * rads).sum(axis=1)
            - B / (2.0 * np.sqrt(n))
            - (it.kl_per_dataset + conf) / lam
            - constant * B * B * lam / n
        )
        return float(p @ (lhs >= rhs - _SLACK))
    raise ConfigError(f"unknown coverage formula {formula!r}")


def finite_ipm(rho_weights, pi_weights, function_table) -> float:
    """max over function rows of |E_rho f - E_pi f| for finite menus."""
    rho = np.asarray(rho_weights, dtype=float)
    pi = np.asarray(pi_weights, dtype=float)
    table = np.asarray(function_table, dtype=float)
    for w in (rho, pi):
        if np.any(w < 0) or abs(w.sum() - 1.0) > _PROB_TOL:
            raise ConfigError("weights must be probability vectors")
    if table.ndim != 2 or table.shape[1] != rho.shape[0]:
        raise ConfigError("function table must be (functions, menu)")
    return float(np.abs(table @ rho - table @ pi).max())


def random_instance(
    seed: int,
    *,
    n: int = 3,
    num_atoms: int = 3,
    num_hypotheses: int = 3,
    menu_size: int = 3,
    max_set_size: int = 3,
    B: float = 1.0,
    prior: str = "optimized",
) -> FiniteInstance:
    """Reproducible adversarial-ish instance: uniform losses, Dirichlet kernels."""
    rng = rng_from(seed)
    probs = rng.dirichlet(np.ones(num_atoms))
    probs = probs / probs.sum()
    table = rng.uniform(0.0, B, size=(num_hypotheses, num_atoms))
    menu = []
    for _ in range(menu_size):
        size = int(rng.integers(1, min(max_set_size, num_hypotheses) + 1))
        menu.append(tuple(sorted(rng.choice(num_hypotheses, size=size, replace=False))))
    kernel = rng.dirichlet(np.ones(menu_size), size=num_atoms ** n)
    kernel = kernel / kernel.sum(axis=1, keepdims=True)
    prior_arg: np.ndarray | str
    if prior == "optimized":
        prior_arg = "optimized"
    elif prior == "uniform":
        prior_arg = np.full(menu_size, 1.0 / menu_size)
    else:
        raise ConfigError('prior must be "optimized" or "uniform"')
    return FiniteInstance(
        z_values=np.arange(num_atoms, dtype=float),
        z_probabilities=probs,
        n=n,
        bound=B,
        loss_table=table,
        menu=tuple(menu),
        kernel=kernel,
        prior=prior_arg,
    )
