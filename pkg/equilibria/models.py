from dataclasses import dataclass, field
from typing import Optional

from django.db import models

from core.models import Coalition, Profile


class EquilibriumKind(models.TextChoices):
    NASH = 'nash', 'Nash'
    STRONG_NASH = 'strong_nash', 'Strong Nash'


@dataclass(frozen=True)
class Deviation:
    """A coalition's joint move and the profile it lands on."""
    coalition: Coalition
    joint: tuple[int, ...]
    profile: Profile
    names: tuple[str, ...] = ()


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Optional[Deviation] = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class ProfileEntry:
    profile: Profile
    names: tuple[str, ...]
    welfare: float


@dataclass(frozen=True)
class EfficiencyRatio:
    """Ratio >= 1, or None with the reason it is undefined."""
    value: Optional[float] = None
    reason: str = ''

    @property
    def defined(self):
        return self.value is not None


@dataclass
class ProfileRow:
    entry: ProfileEntry
    is_nash: bool
    is_strong_nash: bool


@dataclass
class EquilibriumReport:
    direction: str
    opt: ProfileEntry
    nash: list[ProfileEntry]
    strong_nash: list[ProfileEntry]
    poa: EfficiencyRatio
    pos: EfficiencyRatio
    spoa: EfficiencyRatio
    witnesses: dict[Profile, Deviation] = field(default_factory=dict)
