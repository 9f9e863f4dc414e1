"""Exact verification batteries over randomized finite instances.

Each battery generates reproducible random instances (seeded loss tables,
Dirichlet kernels), evaluates inequalities or bound events exactly, and
reports one named pass/fail outcome with a short detail string. The CLI
prints these lines; the acceptance tests assert on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import complexity as cx
from . import oracle as oc
from .seeds import mix64, rng_from

__all__ = ["SuiteCheck", "run_oracle_suite",
           "lemma_battery", "coverage_battery", "it_battery",
           "calibration_battery"]


@dataclass(frozen=True)
class SuiteCheck:
    name: str
    passed: bool
    detail: str


def _battery_instance(rng, *, max_n=4, max_atoms=3, max_set=3) -> oc.FiniteInstance:
    n = int(rng.integers(1, max_n + 1))
    atoms = int(rng.integers(2, max_atoms + 1))
    hypotheses = int(rng.integers(2, 4))
    menu_size = int(rng.integers(1, 4))
    return oc.random_instance(
        int(rng.integers(0, 2 ** 63)),
        n=n,
        num_atoms=atoms,
        num_hypotheses=hypotheses,
        menu_size=menu_size,
        max_set_size=max_set,
    )


def lemma_battery(seed: int, count: int = 100) -> list[SuiteCheck]:
    """Symmetrization, exponential symmetrization, desymmetrization, exactly."""
    rng = rng_from(mix64(seed, 101))
    sym = exp_sym = desym = 0
    trials = 0
    worst = {"symmetrization": np.inf, "exp-symmetrization": np.inf,
             "desymmetrization": np.inf}
    for _ in range(count):
        inst = _battery_instance(rng)
        lam = float(rng.choice([0.5, 1.0, 2.0]))
        for set_index in range(len(inst.menu)):
            trials += 1
            r1 = oc.check_symmetrization(inst, set_index)
            r2 = oc.check_exp_symmetrization(inst, set_index, lam)
            r3 = oc.check_desymmetrization(inst, set_index)
            sym += r1.holds
            exp_sym += r2.holds
            desym += r3.holds
            worst["symmetrization"] = min(worst["symmetrization"], r1.rhs - r1.lhs)
            worst["exp-symmetrization"] = min(
                worst["exp-symmetrization"], r2.rhs - r2.lhs
            )
            worst["desymmetrization"] = min(
                worst["desymmetrization"], r3.lhs - r3.rhs
            )
    return [
        SuiteCheck(
            "symmetrization", sym == trials,
            f"{sym}/{trials} hold, worst slack {worst['symmetrization']:.3e}",
        ),
        SuiteCheck(
            "exp-symmetrization", exp_sym == trials,
            f"{exp_sym}/{trials} hold, worst slack {worst['exp-symmetrization']:.3e}",
        ),
        SuiteCheck(
            "desymmetrization", desym == trials,
            f"{desym}/{trials} hold, worst slack {worst['desymmetrization']:.3e}",
        ),
    ]


def coverage_battery(
    seed: int,
    count: int = 50,
    zetas=(0.1, 0.2),
    lambdas=(1.0, 5.0, 25.0),
) -> list[SuiteCheck]:
    """Enumerated probability of each bound event is at least 1 - zeta."""
    rng = rng_from(mix64(seed, 202))
    formulas = ("thm13-kl", "thm13-disintegrated", "thm15-lower")
    failures = {f: 0 for f in formulas}
    checks = {f: 0 for f in formulas}
    margin = {f: np.inf for f in formulas}
    for _ in range(count):
        inst = _battery_instance(rng, max_n=4, max_atoms=3)
        for formula in formulas:
            for zeta in zetas:
                for lam in lambdas:
                    cov = oc.exact_bound_coverage(inst, lam, zeta, formula)
                    checks[formula] += 1
                    margin[formula] = min(margin[formula], cov - (1.0 - zeta))
                    if cov < 1.0 - zeta:
                        failures[formula] += 1
    return [
        SuiteCheck(
            f"coverage-{f}", failures[f] == 0,
            f"{checks[f] - failures[f]}/{checks[f]} events at level, "
            f"worst margin {margin[f]:+.3e}",
        )
        for f in formulas
    ]


def it_battery(seed: int, count: int = 100) -> list[SuiteCheck]:
    """Information-term ordering and attainment on random optimized-prior kernels."""
    rng = rng_from(mix64(seed, 303))
    ordered = attained = pointwise = 0
    for _ in range(count):
        inst = _battery_instance(rng)
        terms = oc.finite_it_terms(inst)
        ordered += terms.I1 <= terms.Iinf + 1e-10
        live = (inst.kernel > 0) & (inst.dataset_probabilities()[:, None] > 0)
        logs = np.log(terms.rn_table[live])
        attained += abs(logs.max() - terms.Iinf) <= 1e-10
        pointwise += bool(np.all(logs <= terms.Iinf + 1e-10))
    return [
        SuiteCheck("it-ordering", ordered == count, f"I1 <= Iinf on {ordered}/{count}"),
        SuiteCheck(
            "it-attainment", attained == count and pointwise == count,
            f"max log-ratio equals Iinf on {attained}/{count}, "
            f"dominated pointwise on {pointwise}/{count}",
        ),
    ]


def calibration_battery(
    seed: int, count: int = 50, draws: int = 100_000
) -> list[SuiteCheck]:
    """Monte-Carlo Rademacher and MGF estimates against exact enumeration."""
    rng = rng_from(mix64(seed, 404))
    close = mgf_close = dominated = 0
    for _ in range(count):
        inst = _battery_instance(rng, max_n=4, max_atoms=3)
        set_index = int(rng.integers(0, len(inst.menu)))
        dataset_index = int(rng.integers(0, inst.num_datasets))
        exact = oc.exact_rademacher(inst, dataset_index, set_index)
        idx = list(inst.menu[set_index])
        dataset = inst.datasets()[dataset_index]
        lm = cx.LossMatrix(inst.loss_table[idx][:, dataset].T, inst.bound)
        est = cx.rademacher_mc(lm, draws, int(rng.integers(0, 2 ** 63)))
        tol = 4.0 * max(est.std_error, 1e-12)
        close += abs(est.mean - exact) <= tol
        bound = cx.massart_bound(len(idx), inst.bound, inst.n)
        dominated += est.mean <= bound + tol

        lam = float(rng.uniform(0.5, 3.0))
        mgf_exact = oc.exact_mgf(inst, dataset_index, set_index, lam)
        mgf_est = cx.rademacher_mgf_mc(lm, lam, draws, int(rng.integers(0, 2 ** 63)))
        mgf_close += abs(mgf_est.mean - mgf_exact) <= 4.0 * max(
            mgf_est.std_error, 1e-12
        )
    return [
        SuiteCheck(
            "mc-vs-exact", close == count,
            f"MC within 4 SE of exact enumeration on {close}/{count}",
        ),
        SuiteCheck(
            "mgf-vs-exact", mgf_close == count,
            f"MGF MC within 4 SE of exact enumeration on {mgf_close}/{count}",
        ),
        SuiteCheck(
            "massart-domination", dominated == count,
            f"MC below the finite-class bound on {dominated}/{count}",
        ),
    ]


def run_oracle_suite(seed: int, *, fast: bool = False) -> list[SuiteCheck]:
    """The full exact battery; `fast` shrinks counts for smoke tests."""
    scale = 5 if fast else 1
    checks = []
    checks += lemma_battery(seed, count=100 // scale)
    checks += coverage_battery(seed, count=50 // scale)
    checks += it_battery(seed, count=100 // scale)
    checks += calibration_battery(
        seed, count=50 // scale, draws=100_000 // (scale * scale)
    )
    return checks
