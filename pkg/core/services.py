import itertools
import logging
import math
from fractions import Fraction

import numpy as np
from django.conf import settings

from core.exceptions import ArityMismatch, InvalidArgument, StateSpaceTooLarge
from core.models import Coalition, PlayerOrdering

logger = logging.getLogger(__name__)


class ProfileService:
    @staticmethod
    def utility(game, i, s):
        game.check_player(i)
        s = game.validate_profile(s)
        return game.value(i, s)

    @staticmethod
    def social_welfare(game, s):
        """Sum of utilities, or the social cost for cost-minimization games."""
        s = game.validate_profile(s)
        return game.welfare(s)

    @staticmethod
    def apply_deviation(s, coalition, joint):
        members = coalition.members if isinstance(coalition, Coalition) else tuple(coalition)
        joint = tuple(joint)
        if len(members) != len(joint):
            raise ArityMismatch(f"Coalition {members} got joint strategy {joint}.")
        deviated = list(s)
        for i, k in zip(members, joint):
            deviated[i] = k
        return tuple(deviated)

    @staticmethod
    def suffix_deviation_profile(s, s_star, ordering, i):
        """(s*_{N_pi(i)}, s_{-N_pi(i)}) with N_pi(i) = {j : pi(j) >= pi(i)}."""
        if len(s) != len(s_star) or len(s) != len(ordering.ranks):
            raise ArityMismatch('Profiles and ordering disagree on the number of players.')
        deviating = ordering.suffix(i)
        return tuple(star if j in deviating else own for j, (own, star) in enumerate(zip(s, s_star)))

    @staticmethod
    def count_profiles(game):
        return math.prod(game.strategy_counts)

    @staticmethod
    def enumerate_profiles(game, cap=None):
        """Live profiles in lexicographic order, player 0 slowest."""
        cap = settings.PROFILE_CAP if cap is None else cap
        size = ProfileService.count_profiles(game)
        if size > cap:
            raise StateSpaceTooLarge(size, cap)
        logger.debug("enumerating %d profiles of %r", size, game)
        return itertools.product(*(range(count) for count in game.strategy_counts))

    @staticmethod
    def optimum(game, cap=None):
        """Best profile (max welfare or min cost), lexicographically first on ties."""
        best_profile, best_value = None, None
        for s in ProfileService.enumerate_profiles(game, cap):
            value = game.welfare(s)
            if best_value is None or game.sign * (value - best_value) > 0:
                best_profile, best_value = s, value
        return best_profile, best_value

    @staticmethod
    def harmonic(n):
        if n < 1:
            raise InvalidArgument(f"Harmonic number needs n >= 1, got {n}.")
        return float(sum(Fraction(1, k) for k in range(1, n + 1)))

    @staticmethod
    def coalitions(n):
        """Nonempty coalitions, by size ascending then lexicographic."""
        for size in range(1, n + 1):
            for members in itertools.combinations(range(n), size):
                yield Coalition.of(n, members)

    @staticmethod
    def orderings(n):
        for order in itertools.permutations(range(n)):
            yield PlayerOrdering.from_order(order)

    @staticmethod
    def sample_orderings(n, samples, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        for _ in range(samples):
            yield PlayerOrdering.from_order(tuple(int(i) for i in rng.permutation(n)))

    @staticmethod
    def joint_strategy_count(game, coalition):
        return math.prod(game.strategy_counts[i] for i in coalition)

    @staticmethod
    def joint_strategies(game, coalition, cap=None):
        cap = settings.PROFILE_CAP if cap is None else cap
        size = ProfileService.joint_strategy_count(game, coalition)
        if size > cap:
            raise StateSpaceTooLarge(size, cap, 'joint strategies')
        return itertools.product(*(range(game.strategy_counts[i]) for i in coalition))

    @staticmethod
    def coalition_deviation_count(game):
        """Number of (coalition, joint strategy) pairs one profile is tested against."""
        return math.prod(count + 1 for count in game.strategy_counts) - 1

    @staticmethod
    def extremal_suffix_sum(game, s, s_star, minimize=True):
        """
        Min (or max) over all orderings of the suffix-deviation sum.

        The term of player i depends only on the suffix set N containing i,
        so f(N) = best over the first player i of N of value_i(N) + f(N - i)
        equals the n!-ordering search. Returns (value, ordering).
        """
        n = game.n_players
        pick = min if minimize else max
        full = (1 << n) - 1
        best = {0: (0.0, ())}
        for mask in range(1, full + 1):
            deviated = tuple(s_star[j] if mask >> j & 1 else s[j] for j in range(n))
            values = game.payoffs(deviated)
            options = []
            for i in range(n):
                if mask >> i & 1:
                    rest_value, rest_order = best[mask & ~(1 << i)]
                    options.append((values[i] + rest_value, (i,) + rest_order))
            best[mask] = pick(options, key=lambda option: option[0])
        value, order = best[full]
        return value, PlayerOrdering.from_order(order)
