import json

from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings as hypothesis_settings, strategies as st

from core.exceptions import (
    DegenerateGame, InvalidArgument, MissingOutStrategy, MissingPotential, NotMultisetExtendable,
    StateSpaceTooLarge, UndefinedProperty,
)
from core.models import Direction, Game, PlayerOrdering
from core.serializers import render_json
from core.services import ProfileService
from equilibria.models import EquilibriumKind
from equilibria.services import EquilibriumService
from games import generators
from games.services import GameLoader
from smoothness.models import SmoothnessKind, StructuralProperty
from smoothness.serializers import SmoothnessCertificateSerializer, StructuralCheckSerializer
from smoothness.services import SmoothnessService, StructureService, lower_envelope_breakpoints

FUZZ = hypothesis_settings(max_examples=100, derandomize=True, deadline=None)


def load(spec):
    return GameLoader.load_game(spec)


def family_of(spec):
    data = GameLoader.validate(spec)
    return GameLoader.build_family(data['kind'], data['payload'])


def crowding_game():
    """Player 0's entry costs player 1 more than player 0 gains."""
    table = {(0, 0): (1.0, 0.0), (0, 1): (2.0, 0.0), (1, 0): (0.0, 5.0), (1, 1): (0.0, 0.0)}
    return Game((1, 1), table.__getitem__, out_strategies=(1, 1))


class DeviationSumTests(SimpleTestCase):
    def test_prisoners_dilemma(self):
        game = load(generators.g2())
        value = SmoothnessService.deviation_sum(
            game, game.profile_named('C', 'C'), game.profile_named('D', 'D'), PlayerOrdering.identity(2),
        )
        self.assertEqual(value, 3.0)

    def test_fixed_point(self):
        game = load(generators.g3())
        s = game.profile_named('A-B:1', 'B-C:1', 'B-C:1', 'C-D:1')
        for ordering in ProfileService.orderings(4):
            self.assertAlmostEqual(SmoothnessService.deviation_sum(game, s, s, ordering), game.welfare(s))

    def test_single_player(self):
        game = Game((3,), lambda s: ((1.0, 5.0, 2.0)[s[0]],))
        self.assertEqual(SmoothnessService.deviation_sum(game, (1,), (0,), PlayerOrdering.identity(1)), 5.0)

    def test_unilateral_sum(self):
        game = load(generators.g5())
        self.assertEqual(SmoothnessService.unilateral_sum(game, (1, 1), (0, 0)), 0.0)
        self.assertEqual(SmoothnessService.unilateral_sum(game, (1, 1), (1, 1)), 1.0)


class CheckTests(SimpleTestCase):
    def test_cost_sharing_harmonic_bound(self):
        game = load(generators.g1())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 1.5, 0.0)
        self.assertTrue(certificate.verified)
        self.assertIsNone(certificate.witness)
        self.assertEqual(certificate.s_star, game.profile_named('shared', 'shared'))
        self.assertEqual(certificate.best_ratio, 1.5)

    def test_line_of_four(self):
        certificate = SmoothnessService.check_coalitional_smoothness(load(generators.g3()), None, 0.5, 0.5)
        self.assertTrue(certificate.verified)
        self.assertAlmostEqual(certificate.best_ratio, 1 / 3)

    def test_zero_parameters_hold_vacuously(self):
        for spec in (generators.g2(), generators.g3(), generators.g4(), generators.g5()):
            self.assertTrue(SmoothnessService.check_coalitional_smoothness(load(spec), None, 0.0, 0.0).verified)

    def test_infeasible_certificate_has_witness(self):
        game = load(generators.g2())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 10.0, 0.0)
        self.assertFalse(certificate.verified)
        self.assertEqual(certificate.witness.bound, 60.0)
        self.assertEqual(certificate.witness.profile, (0, 0))
        self.assertEqual(certificate.frontier, [])

    def test_negative_parameters(self):
        with self.assertRaises(InvalidArgument):
            SmoothnessService.check_coalitional_smoothness(load(generators.g2()), None, -1.0, 0.0)

    def test_explicit_anchor(self):
        game = load(generators.g2())
        certificate = SmoothnessService.check_coalitional_smoothness(game, (1, 1), 0.0, 0.0)
        self.assertEqual(certificate.s_star, (1, 1))

    def test_cost_bound_uses_anchor_cost(self):
        game = load(generators.g1())
        private = game.profile_named('own1', 'own2')
        certificate = SmoothnessService.check_coalitional_smoothness(game, private, 1.0, 0.0)
        self.assertTrue(certificate.verified)
        self.assertEqual(certificate.opt, 1.0)
        rejected = SmoothnessService.check_coalitional_smoothness(game, private, 0.9, 0.0)
        self.assertFalse(rejected.verified)
        self.assertAlmostEqual(rejected.witness.bound, 0.9 * 1.8)

    def test_unilateral_harmonic_congestion(self):
        certificate = SmoothnessService.check_unilateral_smoothness(load(generators.g4()), None, 1.0, 1.5)
        self.assertTrue(certificate.verified)
        self.assertEqual(certificate.kind, SmoothnessKind.UNILATERAL)

    @override_settings(PERMUTATION_CAP=2, PERMUTATION_SAMPLES=50)
    def test_sampling_mode(self):
        game = load(generators.g3())
        with self.assertRaises(StateSpaceTooLarge):
            SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5)
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5, sample=True, seed=3)
        self.assertTrue(certificate.verified)
        self.assertFalse(certificate.exact)


class FitTests(SimpleTestCase):
    def test_lower_envelope(self):
        # min(1 + 2x, 3 - x, 2) switches at x = 0.5 and x = 1
        self.assertEqual(lower_envelope_breakpoints([1.0, 3.0, 2.0], [2.0, -1.0, 0.0]), [0.5, 1.0])

    def test_dominated_line_is_dropped(self):
        self.assertEqual(lower_envelope_breakpoints([1.0, 5.0, 3.0], [2.0, 0.0, -1.0]), [2 / 3])

    def test_cost_sharing(self):
        game = load(generators.g1())
        certificate = SmoothnessService.fit_coalitional_smoothness(game)
        self.assertEqual(certificate.frontier[0], (1.5, 0.0))
        self.assertEqual(len(certificate.frontier), 2)
        self.assertAlmostEqual(certificate.lam, 0.375)
        self.assertAlmostEqual(certificate.mu, 0.625)
        self.assertAlmostEqual(certificate.best_ratio, 1.0)
        self.assertLessEqual(certificate.best_ratio, 1.5)

    def test_cost_sharing_private_anchor(self):
        game = load(generators.g1())
        certificate = SmoothnessService.fit_coalitional_smoothness(game, game.profile_named('own1', 'own2'))
        self.assertEqual(len(certificate.frontier), 1)
        self.assertAlmostEqual(certificate.lam, 1.0)
        self.assertEqual(certificate.mu, 0.0)
        self.assertAlmostEqual(SmoothnessService.bound_on_opt(game, certificate), 1.8)

    def test_cost_anchor_search_keeps_optimum(self):
        game = load(generators.g1())
        searched = SmoothnessService.fit_coalitional_smoothness(game, anchor_search=True)
        self.assertEqual(searched.s_star, (0, 0))
        self.assertAlmostEqual(searched.best_ratio, 1.0)

    def test_welfare_sharing(self):
        certificate = SmoothnessService.fit_coalitional_smoothness(load(generators.g5()))
        self.assertGreaterEqual(certificate.best_ratio, 1 / 3 - 1e-12)

    def test_single_player(self):
        game = Game((3,), lambda s: ((1.0, 5.0, 2.0)[s[0]],))
        certificate = SmoothnessService.fit_coalitional_smoothness(game)
        self.assertEqual((certificate.lam, certificate.mu), (1.0, 0.0))
        self.assertEqual(certificate.best_ratio, 1.0)

    def test_unilateral_welfare_sharing_is_trivial(self):
        certificate = SmoothnessService.fit_unilateral_smoothness(load(generators.g5()))
        self.assertEqual(certificate.best_ratio, 0.0)
        self.assertEqual(certificate.lam, 0.0)

    def test_degenerate_optimum(self):
        game = Game((2, 2), lambda s: (0.0, 0.0))
        with self.assertRaises(DegenerateGame):
            SmoothnessService.fit_coalitional_smoothness(game)

    def test_anchor_search_never_worse(self):
        game = load(generators.g2())
        default = SmoothnessService.fit_coalitional_smoothness(game)
        searched = SmoothnessService.fit_coalitional_smoothness(game, anchor_search=True)
        self.assertGreaterEqual(searched.best_ratio, default.best_ratio)

    @FUZZ
    @given(
        family=st.sampled_from([
            generators.random_congestion, generators.random_contribution,
            generators.random_welfare_sharing, generators.random_normal_form,
            generators.random_cost_sharing,
        ]),
        seed=st.integers(0, 10_000),
    )
    def test_frontier_points_verify(self, family, seed):
        game = load(family(seed=seed))
        try:
            certificate = SmoothnessService.fit_coalitional_smoothness(game)
        except DegenerateGame:
            return
        for lam, mu in certificate.frontier:
            check = SmoothnessService.check_coalitional_smoothness(game, certificate.s_star, lam, mu)
            self.assertTrue(check.verified, (lam, mu))

    @FUZZ
    @given(
        family=st.sampled_from([
            generators.random_congestion, generators.random_contribution,
            generators.random_welfare_sharing, generators.random_cost_sharing,
        ]),
        seed=st.integers(0, 10_000),
    )
    def test_frontier_is_monotone(self, family, seed):
        game = load(family(seed=seed))
        try:
            frontier = SmoothnessService.fit_coalitional_smoothness(game).frontier
        except DegenerateGame:
            return
        self.assertEqual(frontier[0][1], 0.0)
        for (lam, mu), (next_lam, next_mu) in zip(frontier, frontier[1:]):
            self.assertLess(mu, next_mu)
            if game.maximizes:
                self.assertGreaterEqual(next_lam, lam - 1e-12)
            else:
                self.assertLessEqual(next_lam, lam + 1e-12)


class EfficiencyBoundTests(SimpleTestCase):
    """Smoothness certificates bound the welfare of every strong Nash equilibrium."""

    def assert_strong_nash_bounded(self, game, certificate):
        _, opt = ProfileService.optimum(game)
        for s in EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH):
            if game.maximizes:
                self.assertGreaterEqual(game.welfare(s), certificate.best_ratio * opt - 1e-6)
            elif certificate.best_ratio is not None:
                self.assertLessEqual(game.welfare(s), certificate.best_ratio * opt + 1e-6)

    @FUZZ
    @given(
        family=st.sampled_from([
            generators.random_cost_sharing, generators.random_congestion,
            generators.random_contribution, generators.random_welfare_sharing,
        ]),
        seed=st.integers(0, 10_000),
    )
    def test_fitted_certificates_bound_strong_nash(self, family, seed):
        game = load(family(seed=seed))
        try:
            certificate = SmoothnessService.fit_coalitional_smoothness(game)
        except DegenerateGame:
            return
        self.assert_strong_nash_bounded(game, certificate)

    @FUZZ
    @given(n=st.integers(1, 4), seed=st.integers(0, 10_000))
    def test_cost_sharing_is_harmonic_smooth(self, n, seed):
        game = load(generators.random_cost_sharing(n=n, r=4, seed=seed))
        harmonic = ProfileService.harmonic(n)
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(game, None, harmonic, 0.0).verified)
        _, opt = ProfileService.optimum(game)
        for s in EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH):
            self.assertLessEqual(game.welfare(s), harmonic * opt + 1e-9)

    def test_welfare_sharing_separates_anarchy_measures(self):
        game = load(generators.g5())
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5).verified)
        for s in EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH):
            self.assertGreaterEqual(game.welfare(s), 1 / 3)
        self.assertIn((0, 0), EquilibriumService.enumerate_equilibria(game))
        self.assertEqual(game.welfare((0, 0)), 0.0)


class StructuralCheckTests(SimpleTestCase):
    def test_marginal_contribution(self):
        self.assertEqual(StructureService.marginal_contribution_gamma(load(generators.g5())), 0.5)
        self.assertEqual(
            StructureService.marginal_contribution_gamma(load(generators.g5(budget=3.0, grid=3))), 0.5,
        )
        self.assertEqual(StructureService.marginal_contribution_gamma(crowding_game()), float('inf'))

    def test_marginal_contribution_binding_zero(self):
        table = {(0, 0): (0.0, 2.0), (0, 1): (0.0, 0.0), (1, 0): (0.0, 1.0), (1, 1): (0.0, 0.0)}
        game = Game((1, 1), table.__getitem__, out_strategies=(1, 1))
        check = StructureService.check_marginal_contribution(game)
        self.assertEqual(check.value, 0.0)
        self.assertEqual(check.witness['player'], 0)

    def test_needs_out_strategies(self):
        game = load(generators.g2())
        for check in (
            StructureService.marginal_contribution_gamma,
            StructureService.check_monotone_participation,
            StructureService.check_positive_externalities,
        ):
            with self.assertRaises(MissingOutStrategy):
                check(game)

    def test_monotone_participation(self):
        self.assertTrue(StructureService.check_monotone_participation(load(generators.g5())))
        self.assertTrue(StructureService.check_monotone_participation(load(generators.g4())))
        check = StructureService.check_monotone_participation(crowding_game())
        self.assertFalse(check)
        self.assertEqual(check.witness['profile'], (0, 0))
        self.assertEqual(check.witness['player'], 0)

    def test_potential_identity(self):
        self.assertTrue(StructureService.verify_potential(load(generators.g4())))
        self.assertTrue(StructureService.verify_potential(load(generators.g3())))
        self.assertTrue(StructureService.verify_potential(load(generators.g1())))
        with self.assertRaises(MissingPotential):
            StructureService.verify_potential(load(generators.g2()))

    def test_corrupted_potential(self):
        family = family_of(generators.g4())
        game = family.to_game()
        corrupted = Game(
            game.strategy_counts, game.payoffs, out_strategies=game.out_strategies,
            potential=lambda s: family.rosenthal_potential(s) + (1.0 if s == (0, 0) else 0.0),
        )
        check = StructureService.verify_potential(corrupted)
        self.assertFalse(check)
        self.assertEqual(check.witness['profile'], (0, 0))

    @FUZZ
    @given(
        family=st.sampled_from([generators.random_congestion, generators.random_cost_sharing]),
        n=st.integers(1, 4),
        seed=st.integers(0, 10_000),
        increasing=st.booleans(),
    )
    def test_rosenthal_potential_identity(self, family, n, seed, increasing):
        options = {'increasing': increasing} if family is generators.random_congestion else {}
        spec = family(n=n, r=3, seed=seed, **options)
        game = load(spec)
        rosenthal = family_of(spec).rosenthal_potential
        for s in ProfileService.enumerate_profiles(game):
            self.assertEqual(game.potential(s), rosenthal(s))
        self.assertTrue(StructureService.verify_potential(game))

    def test_closeness(self):
        self.assertEqual(StructureService.potential_closeness(load(generators.g3())), (0.5, 0.5))
        self.assertEqual(StructureService.potential_closeness(load(generators.g4())), (1.0, 1.5))

    def test_positive_externalities(self):
        self.assertTrue(StructureService.check_positive_externalities(load(generators.g1())))
        self.assertTrue(StructureService.check_positive_externalities(load(generators.g3())))
        check = StructureService.check_positive_externalities(crowding_game())
        self.assertFalse(check)
        self.assertEqual((check.witness['player'], check.witness['leaving']), (1, 0))

    def test_submodularity(self):
        self.assertTrue(StructureService.check_potential_submodularity(load(generators.g4()), 2))
        game = load(generators.random_congestion(n=2, r=2, seed=1, increasing=True))
        check = StructureService.check_potential_submodularity(game, 1)
        self.assertFalse(check)
        self.assertLess(check.witness['gain_smaller'], check.witness['gain_larger'])

    def test_submodularity_needs_occupancy(self):
        with self.assertRaises(NotMultisetExtendable):
            StructureService.check_potential_submodularity(load(generators.g2()), 2)
        with self.assertRaises(InvalidArgument):
            StructureService.check_potential_submodularity(load(generators.g4()), 0)

    @override_settings(PROFILE_CAP=50)
    def test_submodularity_cap(self):
        with self.assertRaises(StateSpaceTooLarge):
            StructureService.check_potential_submodularity(load(generators.g4()), 2)

    def test_dispatch(self):
        check = StructureService.run(load(generators.g3()), 'closeness')
        self.assertEqual(check.value, {'lambda': 0.5, 'mu': 0.5})
        self.assertEqual(check.prop, StructuralProperty.CLOSENESS)
        with self.assertRaises(MissingPotential):
            StructureService.run(load(generators.g2()), 'potential')


class StructuralTheoremTests(SimpleTestCase):
    """Structural hypotheses imply the smoothness certificates they promise."""

    @FUZZ
    @given(
        family=st.sampled_from([generators.random_welfare_sharing, generators.random_contribution]),
        seed=st.integers(0, 10_000),
    )
    def test_marginal_contribution_gives_certificate(self, family, seed):
        game = load(family(seed=seed))
        gamma = StructureService.marginal_contribution_gamma(game)
        if not StructureService.check_monotone_participation(game) or gamma == float('inf'):
            return
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(game, None, gamma, gamma).verified)

    def test_welfare_sharing_marginal_certificate(self):
        game = load(generators.g5())
        self.assertTrue(StructureService.check_monotone_participation(game))
        gamma = StructureService.marginal_contribution_gamma(game)
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(game, None, gamma, gamma).verified)

    @FUZZ
    @given(
        family=st.sampled_from([generators.random_congestion, generators.random_contribution]),
        seed=st.integers(0, 10_000),
    )
    def test_closeness_gives_certificate(self, family, seed):
        game = load(family(seed=seed))
        try:
            lam, mu = StructureService.potential_closeness(game)
        except (UndefinedProperty, DegenerateGame):
            return
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(game, None, lam, mu).verified)

    @FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_positive_externalities_give_certificate(self, seed):
        game = load(generators.random_contribution(seed=seed))
        self.assertTrue(StructureService.check_positive_externalities(game))
        self.assertTrue(StructureService.verify_potential(game))
        try:
            lam, _ = StructureService.potential_closeness(game)
        except DegenerateGame:
            return
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(game, None, lam, 0.0).verified)

    @FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_submodular_potential_gives_unilateral_certificate(self, seed):
        game = load(generators.random_congestion(n=2, r=3, seed=seed))
        if not StructureService.check_potential_submodularity(game, 1):
            return
        try:
            lam, mu = StructureService.potential_closeness(game)
        except (UndefinedProperty, DegenerateGame):
            return
        self.assertTrue(SmoothnessService.check_unilateral_smoothness(game, None, lam, mu).verified)

    @FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_skill_groups_give_certificate(self, seed):
        spec = generators.random_welfare_sharing(seed=seed, caps=False)
        bound = 1 / max(1, family_of(spec).max_skill_groups)
        self.assertTrue(SmoothnessService.check_coalitional_smoothness(load(spec), None, bound, bound).verified)

    def test_named_skill_group_fixtures(self):
        for spec in (generators.g5(), generators.g5(budget=3.0, grid=3)):
            self.assertEqual(family_of(spec).max_skill_groups, 2)
            self.assertTrue(SmoothnessService.check_coalitional_smoothness(load(spec), None, 0.5, 0.5).verified)


class SerializerTests(SimpleTestCase):
    def test_certificate_document(self):
        certificate = SmoothnessService.check_coalitional_smoothness(load(generators.g1()), None, 1.5, 0.0)
        data = SmoothnessCertificateSerializer(certificate).data
        self.assertEqual(data['lambda'], 1.5)
        self.assertNotIn('lam', data)
        self.assertEqual(data['s_star'], [0, 0])
        self.assertEqual(data['frontier'], [[1.5, 0.0]])
        self.assertIsNone(data['witness'])
        self.assertEqual(data['direction'], Direction.COST_MIN)

    def test_witness_document(self):
        certificate = SmoothnessService.check_coalitional_smoothness(load(generators.g2()), None, 10.0, 0.0)
        data = SmoothnessCertificateSerializer(certificate).data
        self.assertEqual(data['witness']['profile'], [0, 0])
        self.assertEqual(len(data['witness']['ordering']), 2)
        self.assertEqual(data['best_ratio_reason'], 'unbounded')

    def test_read_certificate(self):
        serializer = SmoothnessCertificateSerializer(data={'s_star': [1, 1], 'lambda': 0.5, 'mu': 0.5})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        certificate = serializer.save()
        self.assertEqual((certificate.lam, certificate.mu), (0.5, 0.5))
        self.assertEqual(certificate.s_star, (1, 1))
        self.assertEqual(certificate.kind, SmoothnessKind.COALITIONAL)

    def test_reject_malformed_certificate(self):
        for data in (
            {'s_star': [0, 0], 'lambda': -1, 'mu': 0},
            {'s_star': [0, None], 'lambda': 1, 'mu': 0},
            {'s_star': [0, 0], 'mu': 0},
        ):
            self.assertFalse(SmoothnessCertificateSerializer(data=data).is_valid())

    def test_unbounded_gamma(self):
        check = StructureService.check_marginal_contribution(crowding_game())
        data = StructuralCheckSerializer(check).data
        self.assertIsNone(data['value'])
        self.assertEqual(data['reason'], 'unbounded')
        self.assertEqual(data['property'], StructuralProperty.MARGINAL_GAMMA)
        document = json.loads(render_json(data))
        self.assertIsNone(document['value'])
        self.assertEqual(document['reason'], 'unbounded')
