import itertools
import logging
import math
from operator import attrgetter

import numpy as np
from django.conf import settings

from core.exceptions import (
    DegenerateGame, Incomparable, InvalidArgument, MissingOutStrategy, MissingPotential,
    NotMultisetExtendable, StateSpaceTooLarge,
)
from core.services import ProfileService
from smoothness.models import (
    Constraint, SmoothnessCertificate, SmoothnessKind, SmoothnessWitness, StructuralCheck,
    StructuralProperty,
)

logger = logging.getLogger(__name__)


def within(value, bound, maximizes, tol):
    """value >= bound (utility) or value <= bound (cost), up to a tolerance scaled to the bound."""
    slack = tol * max(1.0, abs(bound))
    return value >= bound - slack if maximizes else value <= bound + slack


def crossing(left, right):
    (b1, a1), (b2, a2) = left, right
    return (a2 - a1) / (b1 - b2)


def lower_envelope_breakpoints(intercepts, slopes):
    """Abscissae where min_k (a_k + b_k * x) switches line, increasing."""
    lines = sorted(set(zip(slopes, intercepts)), key=lambda line: (-line[0], line[1]))
    hull = []
    for line in lines:
        if hull and hull[-1][0] == line[0]:
            continue
        while len(hull) >= 2 and crossing(hull[-2], line) <= crossing(hull[-2], hull[-1]):
            hull.pop()
        hull.append(line)
    return [crossing(hull[k], hull[k + 1]) for k in range(len(hull) - 1)]


class SmoothnessService:
    @staticmethod
    def deviation_sum(game, s_star, s, ordering):
        return sum(
            game.value(i, ProfileService.suffix_deviation_profile(s, s_star, ordering, i))
            for i in range(game.n_players)
        )

    @staticmethod
    def unilateral_sum(game, s_star, s):
        return sum(
            game.value(i, s[:i] + (s_star[i],) + s[i + 1:]) for i in range(game.n_players)
        )

    @staticmethod
    def implied_ratio(game, lam, mu):
        """Efficiency bound a (lam, mu) certificate gives: lam/(1+mu), or lam/(1-mu) for costs."""
        if game.maximizes:
            return lam / (1 + mu)
        return lam / (1 - mu) if mu < 1 else None

    @staticmethod
    def anchor(game, s_star):
        opt_profile, opt = ProfileService.optimum(game)
        if s_star is None:
            return opt_profile, opt
        return game.validate_profile(s_star, allow_out=False), opt

    @staticmethod
    def reference(game, s_star, opt):
        """lam multiplies OPT for utility games and SC(s*) for cost games."""
        return opt if game.maximizes else game.welfare(s_star)

    @staticmethod
    def constraints(game, s_star, kind=SmoothnessKind.COALITIONAL, sample=False, seed=0):
        """Per-profile extremal deviation sums; returns (constraints, exact)."""
        profiles = list(ProfileService.enumerate_profiles(game))
        if kind == SmoothnessKind.UNILATERAL:
            return [
                Constraint(s, SmoothnessService.unilateral_sum(game, s_star, s), game.welfare(s))
                for s in profiles
            ], True

        n = game.n_players
        if n <= settings.PERMUTATION_CAP:
            constraints = []
            for s in profiles:
                value, ordering = ProfileService.extremal_suffix_sum(
                    game, s, s_star, minimize=game.maximizes,
                )
                constraints.append(Constraint(s, value, game.welfare(s), ordering))
            return constraints, True

        if not sample:
            raise StateSpaceTooLarge(
                math.factorial(n), math.factorial(settings.PERMUTATION_CAP), 'orderings',
            )
        orderings = list(ProfileService.sample_orderings(n, settings.PERMUTATION_SAMPLES, seed))
        logger.warning(
            "sampling %d of %d orderings (seed %d); the certificate is not exact",
            len(orderings), math.factorial(n), seed,
        )
        pick = min if game.maximizes else max
        constraints = []
        for s in profiles:
            value, ordering = pick(
                ((SmoothnessService.deviation_sum(game, s_star, s, o), o) for o in orderings),
                key=lambda pair: pair[0],
            )
            constraints.append(Constraint(s, value, game.welfare(s), ordering))
        return constraints, False

    @staticmethod
    def check(game, lam, mu, s_star=None, kind=SmoothnessKind.COALITIONAL, sample=False, seed=0):
        if lam < 0 or mu < 0 or not (math.isfinite(lam) and math.isfinite(mu)):
            raise InvalidArgument(f"Smoothness parameters must be finite and non-negative, got ({lam}, {mu}).")
        s_star, opt = SmoothnessService.anchor(game, s_star)
        constraints, exact = SmoothnessService.constraints(game, s_star, kind, sample, seed)
        reference = SmoothnessService.reference(game, s_star, opt)

        witness = None
        for c in constraints:
            bound = lam * reference - mu * c.welfare if game.maximizes else lam * reference + mu * c.welfare
            if not within(c.deviation_sum, bound, game.maximizes, settings.IMPROVEMENT_TOL):
                witness = SmoothnessWitness(c.profile, c.ordering, c.deviation_sum, bound)
                break

        verified = witness is None
        logger.info("%s (%g, %g)-smoothness of %r: %s", kind, lam, mu, game, 'verified' if verified else 'rejected')
        return SmoothnessCertificate(
            kind=SmoothnessKind(kind),
            direction=game.direction,
            s_star=s_star,
            lam=lam,
            mu=mu,
            opt=opt,
            verified=verified,
            witness=witness,
            frontier=[(lam, mu)] if verified else [],
            best_ratio=SmoothnessService.implied_ratio(game, lam, mu) if verified else None,
            exact=exact,
        )

    @staticmethod
    def check_coalitional_smoothness(game, s_star, lam, mu, sample=False, seed=0):
        return SmoothnessService.check(game, lam, mu, s_star, SmoothnessKind.COALITIONAL, sample, seed)

    @staticmethod
    def check_unilateral_smoothness(game, s_star, lam, mu):
        return SmoothnessService.check(game, lam, mu, s_star, SmoothnessKind.UNILATERAL)

    @staticmethod
    def envelope(game, constraints, reference):
        """Candidate (lam, mu) frontier points, sorted by mu, and the best of them."""
        deviation = np.array([c.deviation_sum for c in constraints], dtype=float) / reference
        welfare = np.array([c.welfare for c in constraints], dtype=float) / reference

        if game.maximizes:
            # lam(mu) = min_s (L(s) + mu * SW(s)) / OPT over mu >= 0
            vertices = lower_envelope_breakpoints(deviation, welfare)
            mus = [0.0] + sorted({m for m in vertices if m > 0})
            frontier = [(float(np.min(deviation + welfare * m)), m) for m in mus]
        else:
            # lam(mu) = max(0, max_s (L(s) - mu * SC(s)) / SC(s*)) over 0 <= mu < 1
            vertices = lower_envelope_breakpoints(
                np.append(-deviation, 0.0), np.append(welfare, 0.0),
            )
            mus = [0.0] + sorted({m for m in vertices if 0 < m < 1})
            frontier = [(max(0.0, float(np.max(deviation - welfare * m))), m) for m in mus]

        best, best_ratio = None, None
        for lam, mu in frontier:
            ratio = SmoothnessService.implied_ratio(game, lam, mu)
            if best is None or game.sign * (ratio - best_ratio) > 1e-12:
                best, best_ratio = (lam, mu), ratio
        return frontier, best, best_ratio

    @staticmethod
    def bound_on_opt(game, certificate):
        """Equilibrium welfare (or cost) bound of a certificate as a multiple of OPT."""
        reference = SmoothnessService.reference(game, certificate.s_star, certificate.opt)
        return certificate.best_ratio * reference / certificate.opt

    @staticmethod
    def fit_at(game, s_star, opt, kind, sample, seed):
        reference = SmoothnessService.reference(game, s_star, opt)
        if abs(reference) <= settings.IMPROVEMENT_TOL:
            raise DegenerateGame(f"Anchor cost of {game!r} at {s_star} is zero.")
        constraints, exact = SmoothnessService.constraints(game, s_star, kind, sample, seed)
        frontier, (lam, mu), ratio = SmoothnessService.envelope(game, constraints, reference)
        return SmoothnessCertificate(
            kind=SmoothnessKind(kind),
            direction=game.direction,
            s_star=s_star,
            lam=lam,
            mu=mu,
            opt=opt,
            verified=True,
            frontier=frontier,
            best_ratio=ratio,
            exact=exact,
        )

    @staticmethod
    def fit(game, s_star=None, kind=SmoothnessKind.COALITIONAL, anchor_search=False, sample=False, seed=0):
        s_star, opt = SmoothnessService.anchor(game, s_star)
        if abs(opt) <= settings.IMPROVEMENT_TOL:
            raise DegenerateGame(f"Optimal {'welfare' if game.maximizes else 'cost'} of {game!r} is zero.")
        if not anchor_search:
            certificate = SmoothnessService.fit_at(game, s_star, opt, kind, sample, seed)
        else:
            certificate = None
            for anchor in ProfileService.enumerate_profiles(game):
                candidate = SmoothnessService.fit_at(game, anchor, opt, kind, sample, seed)
                if certificate is None or game.sign * (
                    SmoothnessService.bound_on_opt(game, candidate) - SmoothnessService.bound_on_opt(game, certificate)
                ) > 1e-12:
                    certificate = candidate
        logger.info(
            "fitted %s certificate for %r: (%g, %g), ratio %g",
            kind, game, certificate.lam, certificate.mu, certificate.best_ratio,
        )
        return certificate

    @staticmethod
    def fit_coalitional_smoothness(game, s_star=None, anchor_search=False, sample=False, seed=0):
        return SmoothnessService.fit(game, s_star, SmoothnessKind.COALITIONAL, anchor_search, sample, seed)

    @staticmethod
    def fit_unilateral_smoothness(game, s_star=None, anchor_search=False):
        return SmoothnessService.fit(game, s_star, SmoothnessKind.UNILATERAL, anchor_search)


class StructureService:
    """Hypotheses the efficiency theorems consume, each checked exhaustively."""

    @staticmethod
    def require_out(game):
        if not game.has_out:
            raise MissingOutStrategy(f"{game!r} has no out strategies.")

    @staticmethod
    def require_potential(game):
        if not game.has_potential:
            raise MissingPotential(f"{game!r} exposes no potential.")

    @staticmethod
    def outside_options(game, s):
        """(player, profile with that player out) for every player."""
        return ((i, game.with_out(s, i)) for i in range(game.n_players))

    @staticmethod
    def check_marginal_contribution(game):
        StructureService.require_out(game)
        tol = settings.IMPROVEMENT_TOL
        gamma, binding = math.inf, {}
        for s in ProfileService.enumerate_profiles(game):
            welfare, values = game.welfare(s), game.payoffs(s)
            for i, without in StructureService.outside_options(game, s):
                marginal = welfare - game.welfare(without)
                if marginal <= tol:
                    continue
                ratio = values[i] / marginal
                if ratio < gamma:
                    gamma, binding = ratio, {'profile': s, 'player': i, 'utility': values[i], 'marginal': marginal}
        return StructuralCheck(StructuralProperty.MARGINAL_GAMMA, True, gamma, binding)

    @staticmethod
    def marginal_contribution_gamma(game):
        return StructureService.check_marginal_contribution(game).value

    @staticmethod
    def check_monotone_participation(game):
        StructureService.require_out(game)
        for s in ProfileService.enumerate_profiles(game):
            welfare = game.welfare(s)
            for i, without in StructureService.outside_options(game, s):
                if welfare < game.welfare(without) - settings.IMPROVEMENT_TOL:
                    return StructuralCheck(StructuralProperty.MONOTONE, False, witness={
                        'profile': s, 'player': i, 'welfare': welfare, 'welfare_without': game.welfare(without),
                    })
        return StructuralCheck(StructuralProperty.MONOTONE, True)

    @staticmethod
    def augmented_counts(game):
        """Strategy counts with virtual out strategies made enumerable."""
        if not game.has_out:
            return game.strategy_counts
        return tuple(
            count + 1 if out == count else count
            for count, out in zip(game.strategy_counts, game.out_strategies)
        )

    @staticmethod
    def verify_potential(game):
        StructureService.require_potential(game)
        counts = StructureService.augmented_counts(game)
        size = math.prod(counts)
        if size > settings.PROFILE_CAP:
            raise StateSpaceTooLarge(size, settings.PROFILE_CAP)
        tol = settings.IMPROVEMENT_TOL
        for s in itertools.product(*(range(count) for count in counts)):
            phi, values = game.potential(s), game.payoffs(s)
            for i in range(game.n_players):
                for k in range(s[i] + 1, counts[i]):
                    t = s[:i] + (k,) + s[i + 1:]
                    du = game.value(i, t) - values[i]
                    dphi = game.potential(t) - phi
                    if abs(du - dphi) > tol * max(1.0, abs(du), abs(dphi)):
                        return StructuralCheck(StructuralProperty.POTENTIAL, False, witness={
                            'profile': s, 'player': i, 'strategy': k,
                            'utility_change': du, 'potential_change': dphi,
                        })
        return StructuralCheck(StructuralProperty.POTENTIAL, True)

    @staticmethod
    def potential_closeness(game):
        """(lam, mu) with lam * SW <= potential <= mu * SW on every live profile."""
        StructureService.require_potential(game)
        tol = settings.IMPROVEMENT_TOL
        ratios = []
        for s in ProfileService.enumerate_profiles(game):
            welfare, phi = game.welfare(s), game.potential(s)
            if welfare > tol:
                ratios.append(phi / welfare)
            elif phi > tol:
                raise Incomparable(f"Potential {phi} is positive at {game.describe(s)} where welfare is zero.")
        if not ratios:
            raise DegenerateGame(f"Welfare of {game!r} is zero everywhere.")
        return min(ratios), max(ratios)

    @staticmethod
    def check_positive_externalities(game):
        StructureService.require_out(game)
        for s in ProfileService.enumerate_profiles(game):
            values = game.payoffs(s)
            for j, without in StructureService.outside_options(game, s):
                others = game.payoffs(without)
                for i in range(game.n_players):
                    if i != j and game.strictly_better(others[i], values[i]):
                        return StructuralCheck(StructuralProperty.POSITIVE_EXTERNALITIES, False, witness={
                            'profile': s, 'player': i, 'leaving': j,
                            'value': values[i], 'value_after_exit': others[i],
                        })
        return StructuralCheck(StructuralProperty.POSITIVE_EXTERNALITIES, True)

    @staticmethod
    def check_potential_submodularity(game, multiplicity_cap=2):
        """
        Submodularity and monotonicity of the occupancy potential over multisets
        of strategies with multiplicities up to `multiplicity_cap`.
        """
        occupancy = game.occupancy
        if occupancy is None:
            raise NotMultisetExtendable(f"{game!r} has no occupancy semantics.")
        if multiplicity_cap < 1:
            raise InvalidArgument(f"Multiplicity cap must be at least 1, got {multiplicity_cap}.")
        m = len(occupancy.strategies)
        pairs = ((multiplicity_cap + 1) * (multiplicity_cap + 2) // 2) ** m
        if pairs * m > settings.PROFILE_CAP:
            raise StateSpaceTooLarge(pairs * m, settings.PROFILE_CAP, 'multiset pairs')

        phi_cache = {}

        def phi(multiset):
            if multiset not in phi_cache:
                phi_cache[multiset] = occupancy.potential_of_counts(occupancy.counts_of(multiset))
            return phi_cache[multiset]

        def plus(multiset, k):
            return multiset[:k] + (multiset[k] + 1,) + multiset[k + 1:]

        names = ['+'.join(occupancy.resources[r] for r in strategy) or 'none' for strategy in occupancy.strategies]
        tol = settings.IMPROVEMENT_TOL
        for t in itertools.product(range(multiplicity_cap + 1), repeat=m):
            for s in itertools.product(*(range(x + 1) for x in t)):
                if phi(t) < phi(s) - tol:
                    return StructuralCheck(StructuralProperty.SUBMODULAR, False, witness={
                        'smaller': s, 'larger': t, 'strategies': names, 'reason': 'not monotone',
                    })
                for k in range(m):
                    gain_small = phi(plus(s, k)) - phi(s)
                    gain_large = phi(plus(t, k)) - phi(t)
                    if gain_small < gain_large - tol * max(1.0, abs(gain_large)):
                        return StructuralCheck(StructuralProperty.SUBMODULAR, False, witness={
                            'smaller': s, 'larger': t, 'added': names[k], 'strategies': names,
                            'gain_smaller': gain_small, 'gain_larger': gain_large,
                        })
        return StructuralCheck(StructuralProperty.SUBMODULAR, True, value=multiplicity_cap)

    @staticmethod
    def run(game, prop, multiplicity_cap=2):
        """Dispatch one structural property by name."""
        prop = StructuralProperty(prop)
        if prop == StructuralProperty.POTENTIAL:
            return StructureService.verify_potential(game)
        if prop == StructuralProperty.CLOSENESS:
            lam, mu = StructureService.potential_closeness(game)
            return StructuralCheck(prop, True, {'lambda': lam, 'mu': mu})
        if prop == StructuralProperty.MONOTONE:
            return StructureService.check_monotone_participation(game)
        if prop == StructuralProperty.POSITIVE_EXTERNALITIES:
            return StructureService.check_positive_externalities(game)
        if prop == StructuralProperty.MARGINAL_GAMMA:
            return StructureService.check_marginal_contribution(game)
        return StructureService.check_potential_submodularity(game, multiplicity_cap)
