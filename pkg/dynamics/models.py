from dataclasses import dataclass, field
from typing import Optional

from django.db import models

from core.models import Coalition, Profile

GENERATOR = 'numpy.random.PCG64'


class DynamicsMode(models.TextChoices):
    COALITIONAL = 'coalitional', 'Coalitional best response'
    UNILATERAL = 'unilateral', 'Random-player best response'


@dataclass(frozen=True)
class TraceStep:
    t: int
    coalition: Coalition
    profile: Profile
    welfare: float
    potential: Optional[float] = None


@dataclass
class DynamicsTrace:
    seed: int
    mode: str
    initial: Profile
    initial_welfare: float
    steps: list[TraceStep] = field(default_factory=list)
    generator: str = GENERATOR

    @property
    def has_potential(self):
        return bool(self.steps) and self.steps[0].potential is not None

    @property
    def final_welfare(self):
        return self.steps[-1].welfare if self.steps else self.initial_welfare

    @property
    def empirical_mean_welfare(self):
        """Average welfare over steps 1..T; the initial welfare when T = 0."""
        if not self.steps:
            return self.initial_welfare
        return sum(step.welfare for step in self.steps) / len(self.steps)


@dataclass
class SinkClass:
    """Recurrent class of the best-response chain with its stationary law."""
    states: list[Profile]
    stationary: list[float]
    expected_welfare: float
    residual: float


@dataclass
class ChainAnalysis:
    states: list[Profile]
    transition: object
    welfare: object
    sinks: list[SinkClass] = field(default_factory=list)
    threshold: Optional[float] = None
    threshold_reason: str = ''
    bound_holds: Optional[bool] = None

    def state_index(self, profile):
        return self.states.index(tuple(profile))


@dataclass
class DriftReport:
    holds: Optional[bool]
    min_margin: Optional[float] = None
    worst_state: Optional[Profile] = None
    expected_next: list[float] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    reason: str = ''


@dataclass
class EmpiricalBoundReport:
    seed: int
    steps: int
    mean_welfare: float
    threshold: float
    margin: float
    passed: bool


@dataclass
class EmpiricalBoundSweep:
    """Empirical bound over several seeded runs; the worst margin decides."""
    reports: list[EmpiricalBoundReport]
    min_margin: float
    worst_seed: int
    passed: bool
