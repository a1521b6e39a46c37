import itertools

from django.test import SimpleTestCase, override_settings

from core.exceptions import (
    ArityMismatch, InvalidArgument, InvalidPlayer, InvalidProfile, StateSpaceTooLarge,
)
from core.models import Coalition, Direction, Game, PlayerOrdering
from core.services import ProfileService

PRISONERS = {
    (0, 0): (3.0, 3.0), (0, 1): (0.0, 4.0),
    (1, 0): (4.0, 0.0), (1, 1): (1.0, 1.0),
}


def prisoners_dilemma():
    return Game((2, 2), PRISONERS.__getitem__, strategy_names=[['C', 'D'], ['C', 'D']])


def shared_road():
    """Two players, one shared resource of cost 1 and private ones of cost 0.9."""
    def costs(s):
        if s == (0, 0):
            return (0.5, 0.5)
        return tuple(1.0 if k == 0 else (0.9 if k == 1 else 0.0) for k in s)
    return Game((2, 2), costs, direction=Direction.COST_MIN, out_strategies=(2, 2))


class ProfileTests(SimpleTestCase):
    def test_social_welfare(self):
        self.assertEqual(ProfileService.social_welfare(prisoners_dilemma(), (0, 0)), 6.0)
        self.assertEqual(ProfileService.social_welfare(shared_road(), (0, 0)), 1.0)

    def test_all_out_profile_has_zero_welfare(self):
        self.assertEqual(ProfileService.social_welfare(shared_road(), (2, 2)), 0.0)

    def test_utility(self):
        self.assertEqual(ProfileService.utility(prisoners_dilemma(), 0, (1, 0)), 4.0)
        self.assertEqual(ProfileService.utility(shared_road(), 0, (0, 1)), 1.0)
        self.assertEqual(ProfileService.utility(shared_road(), 1, (0, 2)), 0.0)

    def test_invalid_player_and_profile(self):
        game = prisoners_dilemma()
        with self.assertRaises(InvalidPlayer):
            ProfileService.utility(game, 2, (0, 0))
        with self.assertRaises(InvalidProfile):
            ProfileService.social_welfare(game, (0, 2))
        with self.assertRaises(InvalidProfile):
            ProfileService.social_welfare(game, (0,))

    def test_profile_names(self):
        game = prisoners_dilemma()
        self.assertEqual(game.profile_named('D', 'C'), (1, 0))
        self.assertEqual(game.describe((0, 1)), ('C', 'D'))
        self.assertEqual(shared_road().profile_named('0', 'out'), (0, 2))


class DeviationTests(SimpleTestCase):
    def test_apply_deviation(self):
        s = ('a', 'b', 'c')
        self.assertEqual(ProfileService.apply_deviation(s, Coalition((1,)), ('x',)), ('a', 'x', 'c'))
        self.assertEqual(ProfileService.apply_deviation(s, Coalition((0, 2)), ('x', 'z')), ('x', 'b', 'z'))
        self.assertEqual(
            ProfileService.apply_deviation(s, Coalition((0, 1, 2)), ('x', 'y', 'z')), ('x', 'y', 'z')
        )
        self.assertEqual(ProfileService.apply_deviation(s, Coalition((0, 2)), ('a', 'c')), s)

    def test_arity_mismatch(self):
        with self.assertRaises(ArityMismatch):
            ProfileService.apply_deviation((0, 0), Coalition((0, 1)), (1,))

    def test_suffix_deviation_profile(self):
        s, star = ('a', 'b', 'c'), ('x', 'y', 'z')
        identity = PlayerOrdering.identity(3)
        self.assertEqual(ProfileService.suffix_deviation_profile(s, star, identity, 0), star)
        self.assertEqual(ProfileService.suffix_deviation_profile(s, star, identity, 1), ('a', 'y', 'z'))
        self.assertEqual(ProfileService.suffix_deviation_profile(s, star, identity, 2), ('a', 'b', 'z'))
        shuffled = PlayerOrdering.from_order((2, 0, 1))
        self.assertEqual(ProfileService.suffix_deviation_profile(s, star, shuffled, 0), ('x', 'y', 'c'))
        self.assertEqual(ProfileService.suffix_deviation_profile(s, star, shuffled, 1), ('a', 'y', 'c'))
        for ordering in ProfileService.orderings(3):
            for i in range(3):
                self.assertEqual(ProfileService.suffix_deviation_profile(star, star, ordering, i), star)

    def test_coalition_validation(self):
        self.assertEqual(Coalition((2, 0)).members, (0, 2))
        with self.assertRaises(InvalidArgument):
            Coalition(())
        with self.assertRaises(InvalidArgument):
            Coalition((1, 1))
        with self.assertRaises(InvalidPlayer):
            Coalition.of(2, (0, 2))

    def test_ordering_round_trip(self):
        ordering = PlayerOrdering.from_order((2, 0, 1))
        self.assertEqual(ordering.ranks, (2, 3, 1))
        self.assertEqual(ordering.order, (2, 0, 1))
        self.assertEqual(ordering.suffix(0), frozenset({0, 1}))
        with self.assertRaises(InvalidArgument):
            PlayerOrdering((1, 1, 2))


class EnumerationTests(SimpleTestCase):
    def counts_game(self, counts):
        return Game(counts, lambda s: (0.0,) * len(counts))

    def test_lexicographic_order(self):
        self.assertEqual(
            list(ProfileService.enumerate_profiles(self.counts_game((2, 2)))),
            [(0, 0), (0, 1), (1, 0), (1, 1)],
        )
        profiles = list(ProfileService.enumerate_profiles(self.counts_game((2, 3, 2))))
        self.assertEqual(len(profiles), 12)
        self.assertEqual(len(set(profiles)), 12)
        self.assertEqual(profiles[0], (0, 0, 0))
        self.assertEqual(profiles[-1], (1, 2, 1))
        self.assertEqual(len(list(ProfileService.enumerate_profiles(self.counts_game((3,))))), 3)

    def test_out_strategies_are_not_enumerated(self):
        self.assertNotIn((2, 2), list(ProfileService.enumerate_profiles(shared_road())))

    @override_settings(PROFILE_CAP=10)
    def test_cap(self):
        with self.assertRaises(StateSpaceTooLarge) as raised:
            ProfileService.enumerate_profiles(self.counts_game((2, 3, 2)))
        self.assertEqual(raised.exception.size, 12)
        self.assertEqual(raised.exception.cap, 10)
        self.assertEqual(raised.exception.exit_code, 2)

    def test_coalition_order(self):
        self.assertEqual(
            [c.members for c in ProfileService.coalitions(3)],
            [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)],
        )

    def test_orderings(self):
        ranks = {o.ranks for o in ProfileService.orderings(4)}
        self.assertEqual(len(ranks), 24)

    def test_sampled_orderings_are_reproducible(self):
        first = list(ProfileService.sample_orderings(6, 20, seed=3))
        second = list(ProfileService.sample_orderings(6, 20, seed=3))
        self.assertEqual(first, second)


class OptimumTests(SimpleTestCase):
    def test_optimum(self):
        self.assertEqual(ProfileService.optimum(prisoners_dilemma()), ((0, 0), 6.0))
        self.assertEqual(ProfileService.optimum(shared_road()), ((0, 0), 1.0))

    def test_ties_pick_first_profile(self):
        game = Game((2, 2), lambda s: (1.0, 1.0))
        self.assertEqual(ProfileService.optimum(game), ((0, 0), 2.0))

    def test_harmonic(self):
        self.assertEqual(ProfileService.harmonic(1), 1.0)
        self.assertEqual(ProfileService.harmonic(2), 1.5)
        self.assertAlmostEqual(ProfileService.harmonic(4), 25 / 12)
        with self.assertRaises(InvalidArgument):
            ProfileService.harmonic(0)


class ExtremalSuffixSumTests(SimpleTestCase):
    def brute_force(self, game, s, star, pick):
        return pick(
            sum(
                game.value(i, ProfileService.suffix_deviation_profile(s, star, ordering, i))
                for i in range(game.n_players)
            )
            for ordering in ProfileService.orderings(game.n_players)
        )

    def test_matches_enumeration_over_orderings(self):
        game = Game(
            (2, 2, 2),
            lambda s: (s[0] + 2 * s[1] * s[2], 3 * s[0] * s[2] + s[1], (s[0] + s[1] + s[2]) % 2),
        )
        star = (1, 1, 1)
        for s in itertools.product(range(2), repeat=3):
            for minimize, pick in ((True, min), (False, max)):
                value, ordering = ProfileService.extremal_suffix_sum(game, s, star, minimize)
                self.assertAlmostEqual(value, self.brute_force(game, s, star, pick))
                replay = sum(
                    game.value(i, ProfileService.suffix_deviation_profile(s, star, ordering, i))
                    for i in range(3)
                )
                self.assertAlmostEqual(value, replay)

    def test_prisoners_dilemma_identity_ordering(self):
        game = prisoners_dilemma()
        value, _ = ProfileService.extremal_suffix_sum(game, (1, 1), (0, 0))
        # identity gives 3 + 0, the reverse ordering 0 + 3
        self.assertEqual(value, 3.0)
