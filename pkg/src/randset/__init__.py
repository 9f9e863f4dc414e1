"""Bound-verification toolkit for data-dependent random hypothesis sets.

Subpackages: `problem` (distributions, losses, risks), `dynamics` (noisy
gradient trajectories and path-divergence statistics), `complexity`
(Rademacher estimates, covering numbers, box dimensions), `bounds`
(closed-form bound assemblies), `oracle` (exact enumeration on finite
instances), `harness` (repeated-trial experiments and persistence),
`plotting` (report figures), `cli` (command-line front end).
"""

from . import bounds, complexity, dynamics, harness, oracle, problem, suite
from .errors import (
    CapabilityError,
    CapacityError,
    ConfigError,
    DegenerateError,
    DivergenceError,
    DomainError,
    MisuseError,
    ParseError,
    RandsetError,
    RangeError,
)
from .seeds import mix64, rng_from

__version__ = "0.1.0"
