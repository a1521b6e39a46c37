import logging
import math

from django.conf import settings

from core.exceptions import InvalidDistribution, InvalidProfile, StateSpaceTooLarge
from core.models import Coalition
from core.services import ProfileService
from equilibria.models import (
    Deviation, EfficiencyRatio, EquilibriumKind, EquilibriumReport, ProfileEntry, ProfileRow,
    Verdict,
)

logger = logging.getLogger(__name__)

NO_EQUILIBRIUM = 'no equilibrium of this kind'
UNBOUNDED = 'unbounded'


class EquilibriumService:
    @staticmethod
    def entry(game, s):
        return ProfileEntry(tuple(s), game.describe(s), game.welfare(s))

    @staticmethod
    def deviation(game, coalition, joint, s):
        profile = ProfileService.apply_deviation(s, coalition, joint)
        return Deviation(coalition, tuple(joint), profile, game.describe(profile))

    @staticmethod
    def is_nash(game, s) -> Verdict:
        """First strictly improving unilateral deviation, by player then strategy."""
        s = game.validate_profile(s, allow_out=False)
        current = game.payoffs(s)
        for i in range(game.n_players):
            for k in range(game.strategy_counts[i]):
                if k == s[i]:
                    continue
                deviated = s[:i] + (k,) + s[i + 1:]
                if game.strictly_better(game.value(i, deviated), current[i]):
                    player = Coalition.of(game.n_players, (i,))
                    return Verdict(False, EquilibriumService.deviation(game, player, (k,), s))
        return Verdict(True)

    @staticmethod
    def check_coalition_cap(game, cap=None):
        cap = settings.PROFILE_CAP if cap is None else cap
        size = ProfileService.coalition_deviation_count(game)
        if size > cap:
            raise StateSpaceTooLarge(size, cap, 'coalitional deviations')

    @staticmethod
    def blocking_deviation(game, s, current):
        """First joint deviation, in canonical coalition order, strictly improving every member."""
        for coalition in ProfileService.coalitions(game.n_players):
            members = coalition.members
            own = tuple(s[i] for i in members)
            for joint in ProfileService.joint_strategies(game, members):
                if joint == own:
                    continue
                deviated = ProfileService.apply_deviation(s, members, joint)
                values = game.payoffs(deviated)
                if all(game.strictly_better(values[i], current[i]) for i in members):
                    return EquilibriumService.deviation(game, coalition, joint, s)
        return None

    @staticmethod
    def is_strong_nash(game, s) -> Verdict:
        s = game.validate_profile(s, allow_out=False)
        EquilibriumService.check_coalition_cap(game)
        witness = EquilibriumService.blocking_deviation(game, s, game.payoffs(s))
        return Verdict(witness is None, witness)

    @staticmethod
    def enumerate_equilibria(game, kind=EquilibriumKind.NASH):
        kind = EquilibriumKind(kind)
        if kind == EquilibriumKind.STRONG_NASH:
            EquilibriumService.check_coalition_cap(game)
        found = []
        for s in ProfileService.enumerate_profiles(game):
            if not EquilibriumService.is_nash(game, s):
                continue
            if kind == EquilibriumKind.STRONG_NASH and not EquilibriumService.is_strong_nash(game, s):
                continue
            found.append(s)
        logger.debug("%d %s equilibria in %r", len(found), kind, game)
        return found

    @staticmethod
    def ratio(game, opt_value, equilibrium_value):
        """OPT over equilibrium welfare, or equilibrium cost over OPT; >= 1."""
        numerator, denominator = (
            (opt_value, equilibrium_value) if game.maximizes else (equilibrium_value, opt_value)
        )
        if abs(denominator) <= settings.IMPROVEMENT_TOL:
            if abs(numerator) <= settings.IMPROVEMENT_TOL:
                return EfficiencyRatio(1.0)
            return EfficiencyRatio(reason=UNBOUNDED)
        return EfficiencyRatio(numerator / denominator)

    @staticmethod
    def worst_and_best(game, profiles):
        values = [game.welfare(s) for s in profiles]
        if game.maximizes:
            return min(values), max(values)
        return max(values), min(values)

    @staticmethod
    def efficiency_ratios(game, with_witnesses=False) -> EquilibriumReport:
        opt_profile, opt_value = ProfileService.optimum(game)
        nash = EquilibriumService.enumerate_equilibria(game, EquilibriumKind.NASH)
        strong = EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH)

        absent = EfficiencyRatio(reason=NO_EQUILIBRIUM)
        poa = pos = spoa = absent
        if nash:
            worst, best = EquilibriumService.worst_and_best(game, nash)
            poa = EquilibriumService.ratio(game, opt_value, worst)
            pos = EquilibriumService.ratio(game, opt_value, best)
        if strong:
            worst, _ = EquilibriumService.worst_and_best(game, strong)
            spoa = EquilibriumService.ratio(game, opt_value, worst)

        witnesses = {}
        if with_witnesses:
            strong_set = set(strong)
            for s in ProfileService.enumerate_profiles(game):
                if s not in strong_set:
                    witnesses[s] = EquilibriumService.blocking_deviation(game, s, game.payoffs(s))

        logger.info("%r: %d Nash, %d strong Nash", game, len(nash), len(strong))
        return EquilibriumReport(
            direction=game.direction,
            opt=EquilibriumService.entry(game, opt_profile),
            nash=[EquilibriumService.entry(game, s) for s in nash],
            strong_nash=[EquilibriumService.entry(game, s) for s in strong],
            poa=poa,
            pos=pos,
            spoa=spoa,
            witnesses=witnesses,
        )

    @staticmethod
    def normalize_distribution(game, dist):
        """Merge a mapping or (profile, probability) pairs into a validated dict."""
        pairs = dist.items() if hasattr(dist, 'items') else dist
        merged = {}
        try:
            for profile, probability in pairs:
                s = game.validate_profile(profile)
                probability = float(probability)
                if not math.isfinite(probability) or probability < -settings.IMPROVEMENT_TOL:
                    raise InvalidDistribution(f"Probability {probability} of {s} is not a probability.")
                merged[s] = merged.get(s, 0.0) + probability
        except InvalidProfile as exc:
            raise InvalidDistribution(f"Distribution names an invalid profile: {exc.detail}")
        except (TypeError, ValueError):
            raise InvalidDistribution('Distribution entries must be (profile, probability) pairs.')
        total = sum(merged.values())
        if abs(total - 1.0) > settings.IMPROVEMENT_TOL:
            raise InvalidDistribution(f"Probabilities sum to {total}, not 1.")
        return {s: p for s, p in merged.items() if p > 0}

    @staticmethod
    def verify_scce(game, dist) -> Verdict:
        """Pure-deviation strong coarse correlated equilibrium test."""
        dist = EquilibriumService.normalize_distribution(game, dist)
        EquilibriumService.check_coalition_cap(game)
        n = game.n_players
        expected = [sum(p * game.value(i, s) for s, p in dist.items()) for i in range(n)]
        for coalition in ProfileService.coalitions(n):
            members = coalition.members
            for joint in ProfileService.joint_strategies(game, members):
                deviated = [0.0] * n
                for s, p in dist.items():
                    values = game.payoffs(ProfileService.apply_deviation(s, members, joint))
                    for i in members:
                        deviated[i] += p * values[i]
                if all(game.strictly_better(deviated[i], expected[i]) for i in members):
                    profile = tuple(
                        joint[members.index(i)] if i in members else None for i in range(n)
                    )
                    names = tuple(
                        game.strategy_name(i, k) if k is not None else '*' for i, k in enumerate(profile)
                    )
                    return Verdict(False, Deviation(coalition, tuple(joint), profile, names))
        return Verdict(True)

    @staticmethod
    def profile_table(game):
        strong = set(EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH))
        return [
            ProfileRow(
                EquilibriumService.entry(game, s),
                bool(EquilibriumService.is_nash(game, s)),
                s in strong,
            )
            for s in ProfileService.enumerate_profiles(game)
        ]
