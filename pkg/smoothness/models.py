from dataclasses import dataclass, field
from typing import Any, Optional

from django.db import models

from core.models import PlayerOrdering, Profile


class SmoothnessKind(models.TextChoices):
    COALITIONAL = 'coalitional', 'Coalitional'
    UNILATERAL = 'unilateral', 'Unilateral'


class StructuralProperty(models.TextChoices):
    POTENTIAL = 'potential', 'Potential identity'
    CLOSENESS = 'closeness', 'Potential closeness'
    MONOTONE = 'monotone', 'Monotone participation'
    POSITIVE_EXTERNALITIES = 'positive-externalities', 'Positive externalities'
    MARGINAL_GAMMA = 'marginal-gamma', 'Marginal contribution'
    SUBMODULAR = 'submodular', 'Potential submodularity'


@dataclass(frozen=True)
class SmoothnessWitness:
    """Profile (and ordering, for the coalitional inequality) where the inequality fails."""
    profile: Profile
    ordering: Optional[PlayerOrdering]
    deviation_sum: float
    bound: float


@dataclass(frozen=True)
class Constraint:
    """
    One profile's inequality. `deviation_sum` is the extremal value over the
    orderings considered (the unilateral sum for unilateral smoothness).
    """
    profile: Profile
    deviation_sum: float
    welfare: float
    ordering: Optional[PlayerOrdering] = None


@dataclass
class SmoothnessCertificate:
    kind: str
    direction: str
    s_star: Profile
    lam: float
    mu: float
    opt: float
    verified: bool = False
    witness: Optional[SmoothnessWitness] = None
    frontier: list[tuple[float, float]] = field(default_factory=list)
    best_ratio: Optional[float] = None
    exact: bool = True

    @property
    def maximizes(self):
        return self.direction == 'utility'


@dataclass
class StructuralCheck:
    prop: str
    holds: bool
    value: Any = None
    witness: dict = field(default_factory=dict)
    reason: str = ''

    def __bool__(self):
        return self.holds
