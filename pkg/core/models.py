from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

from django.conf import settings
from django.db import models

from core.exceptions import InvalidPlayer, InvalidProfile, InvalidArgument

Profile = tuple[int, ...]


class Direction(models.TextChoices):
    UTILITY_MAX = 'utility', 'Maximize utility'
    COST_MIN = 'cost', 'Minimize cost'


class Game:
    """
    Finite strategic game reduced to a payoff oracle.

    `payoffs(profile)` returns every player's utility (or cost, for
    cost-minimization games) at once. Strategy indices run over
    `range(strategy_counts[i])`; an out strategy equal to `strategy_counts[i]`
    is virtual: it can be evaluated but is never enumerated.
    """

    def __init__(self, strategy_counts: Sequence[int], payoffs: Callable[[Profile], Sequence[float]],
                 direction=Direction.UTILITY_MAX, out_strategies: Optional[Sequence[int]] = None,
                 potential: Optional[Callable[[Profile], float]] = None,
                 strategy_names: Optional[Sequence[Sequence[str]]] = None,
                 occupancy=None, family='normal_form', label=''):
        counts = tuple(int(count) for count in strategy_counts)
        if not counts:
            raise InvalidArgument('A game needs at least one player.')
        if any(count < 1 for count in counts):
            raise InvalidArgument('Every player needs at least one strategy.')
        if out_strategies is not None:
            out_strategies = tuple(int(k) for k in out_strategies)
            if len(out_strategies) != len(counts):
                raise InvalidArgument('One out strategy per player is required.')
            if any(not 0 <= k <= count for k, count in zip(out_strategies, counts)):
                raise InvalidArgument('Out strategy index out of range.')

        self.strategy_counts = counts
        self.n_players = len(counts)
        self.direction = Direction(direction)
        self.out_strategies = out_strategies
        self.family = family
        self.label = label
        self.occupancy = occupancy
        self.strategy_names = tuple(
            tuple(names) for names in strategy_names
        ) if strategy_names else tuple(tuple(str(k) for k in range(count)) for count in counts)

        cached = lru_cache(maxsize=settings.PAYOFF_CACHE_SIZE)
        self._payoffs = cached(lambda profile: tuple(float(v) for v in payoffs(profile)))
        self._potential = cached(lambda profile: float(potential(profile))) if potential else None

    def __repr__(self):
        return f"<Game {self.label or self.family} n={self.n_players} |S|={self.strategy_counts}>"

    @property
    def maximizes(self):
        return self.direction == Direction.UTILITY_MAX

    @property
    def sign(self):
        """+1 when larger values are better, -1 for costs."""
        return 1.0 if self.maximizes else -1.0

    @property
    def has_out(self):
        return self.out_strategies is not None

    @property
    def has_potential(self):
        return self._potential is not None

    def check_player(self, i):
        if not 0 <= i < self.n_players:
            raise InvalidPlayer(f"Player {i} out of range for {self.n_players} players.")

    def is_out(self, i, k):
        return self.out_strategies is not None and self.out_strategies[i] == k

    def validate_profile(self, profile, allow_out=True) -> Profile:
        profile = tuple(int(k) for k in profile)
        if len(profile) != self.n_players:
            raise InvalidProfile(f"Profile {profile} has {len(profile)} entries, expected {self.n_players}.")
        for i, k in enumerate(profile):
            if 0 <= k < self.strategy_counts[i]:
                continue
            if allow_out and self.is_out(i, k):
                continue
            raise InvalidProfile(f"Strategy {k} is not valid for player {i}.")
        return profile

    def payoffs(self, profile: Profile) -> tuple[float, ...]:
        return self._payoffs(tuple(profile))

    def value(self, i, profile: Profile) -> float:
        return self._payoffs(tuple(profile))[i]

    def welfare(self, profile: Profile) -> float:
        return sum(self._payoffs(tuple(profile)))

    def potential(self, profile: Profile) -> float:
        return self._potential(tuple(profile))

    def strictly_better(self, new, old, tol=None):
        """True when `new` beats `old` for the player by more than the tolerance."""
        tol = settings.IMPROVEMENT_TOL if tol is None else tol
        return self.sign * (new - old) > tol

    def with_out(self, profile: Profile, i) -> Profile:
        profile = list(profile)
        profile[i] = self.out_strategies[i]
        return tuple(profile)

    def strategy_name(self, i, k):
        if k < self.strategy_counts[i]:
            return self.strategy_names[i][k]
        return 'out'

    def describe(self, profile: Profile) -> tuple[str, ...]:
        return tuple(self.strategy_name(i, k) for i, k in enumerate(profile))

    def profile_named(self, *names) -> Profile:
        if len(names) != self.n_players:
            raise InvalidProfile(f"Expected {self.n_players} strategy names, got {len(names)}.")
        profile = []
        for i, name in enumerate(names):
            if name == 'out' and self.has_out and name not in self.strategy_names[i]:
                profile.append(self.out_strategies[i])
            elif name in self.strategy_names[i]:
                profile.append(self.strategy_names[i].index(name))
            else:
                raise InvalidProfile(f"Player {i} has no strategy named {name!r}.")
        return tuple(profile)


@dataclass(frozen=True)
class Coalition:
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidArgument('A coalition must be nonempty.')
        if len(set(members)) != len(members):
            raise InvalidArgument(f"Coalition {members} repeats a player.")
        object.__setattr__(self, 'members', tuple(sorted(members)))

    @classmethod
    def of(cls, n_players, members):
        coalition = cls(tuple(members))
        if any(not 0 <= i < n_players for i in coalition.members):
            raise InvalidPlayer(f"Coalition {coalition.members} names a player outside 0..{n_players - 1}.")
        return coalition

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i):
        return i in self.members

    def __str__(self):
        return '-'.join(str(i) for i in self.members)


@dataclass(frozen=True)
class PlayerOrdering:
    """Permutation stored as ranks: ranks[i] is player i's position, 1..n."""
    ranks: tuple[int, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        if sorted(ranks) != list(range(1, len(ranks) + 1)):
            raise InvalidArgument(f"Ranks {ranks} are not a permutation of 1..{len(ranks)}.")
        object.__setattr__(self, 'ranks', ranks)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_order(cls, order):
        """Build from players listed first-to-last."""
        ranks = [0] * len(order)
        for position, player in enumerate(order, start=1):
            ranks[player] = position
        return cls(tuple(ranks))

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(sorted(range(len(self.ranks)), key=self.ranks.__getitem__))

    def suffix(self, i) -> frozenset:
        """N_{pi(i)}: players ranked at or after player i."""
        return frozenset(j for j, rank in enumerate(self.ranks) if rank >= self.ranks[i])


@dataclass
class OccupancyModel:
    """
    Occupancy semantics of a congestion-form potential.

    `unit_values[r]` maps an occupancy k >= 1 to the resource's per-user
    value; tables shorter than the requested occupancy hold their last entry.
    `strategies` is the universe of distinct resource sets players can pick.
    """
    resources: tuple[str, ...]
    unit_values: tuple[Callable[[int], float], ...]
    strategies: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def potential_of_counts(self, counts: Sequence[int]) -> float:
        return sum(
            self.unit_values[r](k)
            for r, count in enumerate(counts)
            for k in range(1, count + 1)
        )

    def counts_of(self, multiplicities: Sequence[int]) -> list[int]:
        """Resource occupancy of a multiset given as multiplicity per strategy."""
        counts = [0] * len(self.resources)
        for strategy, times in zip(self.strategies, multiplicities):
            for r in strategy:
                counts[r] += times
        return counts
