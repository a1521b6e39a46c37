import io
import json

from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings as hypothesis_settings, strategies as st

from core.exceptions import InvalidDistribution, StateSpaceTooLarge
from core.models import Game
from core.serializers import render_json
from equilibria.models import EquilibriumKind
from equilibria.serializers import EquilibriumReportSerializer, write_profile_table
from equilibria.services import NO_EQUILIBRIUM, UNBOUNDED, EquilibriumService
from games import generators
from games.services import GameLoader

FAMILY_FUZZ = hypothesis_settings(max_examples=200, derandomize=True, deadline=None)


def names_of(game, profiles):
    return {game.describe(s) for s in profiles}


class NashTests(SimpleTestCase):
    def setUp(self):
        self.pd = GameLoader.load_game(generators.g2())

    def test_dominant_strategy_profile(self):
        self.assertTrue(EquilibriumService.is_nash(self.pd, self.pd.profile_named('D', 'D')))

    def test_cooperation_is_not_nash(self):
        verdict = EquilibriumService.is_nash(self.pd, self.pd.profile_named('C', 'C'))
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness.coalition.members, (0,))
        self.assertEqual(verdict.witness.names, ('D', 'C'))

    def test_single_player(self):
        game = Game((3,), lambda s: ((1.0, 5.0, 2.0)[s[0]],))
        self.assertEqual(
            [s for s in [(0,), (1,), (2,)] if EquilibriumService.is_nash(game, s)], [(1,)]
        )

    def test_cost_sharing_equilibria(self):
        game = GameLoader.load_game(generators.g1())
        self.assertEqual(EquilibriumService.enumerate_equilibria(game), [(0, 0), (1, 1)])


class StrongNashTests(SimpleTestCase):
    def test_cost_sharing(self):
        game = GameLoader.load_game(generators.g1())
        self.assertTrue(EquilibriumService.is_strong_nash(game, (0, 0)))
        verdict = EquilibriumService.is_strong_nash(game, (1, 1))
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness.coalition.members, (0, 1))
        self.assertEqual(verdict.witness.profile, (0, 0))

    def test_prisoners_dilemma_has_none(self):
        game = GameLoader.load_game(generators.g2())
        verdict = EquilibriumService.is_strong_nash(game, game.profile_named('D', 'D'))
        self.assertEqual(verdict.witness.names, ('C', 'C'))
        self.assertEqual(
            EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH), []
        )

    def test_line_of_four(self):
        game = GameLoader.load_game(generators.g3())
        mid = ('A-B:1', 'B-C:1', 'B-C:1', 'C-D:1')
        outer = ('A-B:1', 'A-B:1', 'C-D:1', 'C-D:1')
        self.assertEqual(names_of(game, EquilibriumService.enumerate_equilibria(game)), {mid, outer})
        self.assertEqual(
            names_of(game, EquilibriumService.enumerate_equilibria(game, 'strong_nash')), {mid}
        )
        verdict = EquilibriumService.is_strong_nash(game, game.profile_named(*outer))
        self.assertEqual(verdict.witness.coalition.members, (1, 2))

    @override_settings(PROFILE_CAP=7)
    def test_coalition_cap(self):
        game = GameLoader.load_game(generators.g1())
        with self.assertRaises(StateSpaceTooLarge):
            EquilibriumService.is_strong_nash(game, (0, 0))

    def assert_strong_nash_are_nash(self, spec):
        game = GameLoader.load_game(spec)
        nash = set(EquilibriumService.enumerate_equilibria(game))
        strong = EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH)
        self.assertTrue(set(strong) <= nash)
        for s in strong:
            self.assertTrue(EquilibriumService.is_strong_nash(game, s))

    @FAMILY_FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_cost_sharing_strong_nash_are_nash(self, seed):
        self.assert_strong_nash_are_nash(generators.random_cost_sharing(seed=seed))

    @FAMILY_FUZZ
    @given(seed=st.integers(0, 10_000), increasing=st.booleans())
    def test_congestion_strong_nash_are_nash(self, seed, increasing):
        self.assert_strong_nash_are_nash(generators.random_congestion(seed=seed, increasing=increasing))

    @FAMILY_FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_contribution_strong_nash_are_nash(self, seed):
        self.assert_strong_nash_are_nash(generators.random_contribution(seed=seed))

    @FAMILY_FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_welfare_sharing_strong_nash_are_nash(self, seed):
        self.assert_strong_nash_are_nash(generators.random_welfare_sharing(seed=seed))

    @FAMILY_FUZZ
    @given(seed=st.integers(0, 10_000))
    def test_normal_form_strong_nash_are_nash(self, seed):
        self.assert_strong_nash_are_nash(generators.random_normal_form(n=3, seed=seed))


class EfficiencyTests(SimpleTestCase):
    def test_cost_sharing_ratios(self):
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g1()))
        self.assertAlmostEqual(report.poa.value, 1.8)
        self.assertEqual(report.pos.value, 1.0)
        self.assertEqual(report.spoa.value, 1.0)
        self.assertEqual(report.opt.names, ('shared', 'shared'))

    def test_missing_strong_nash(self):
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g2()))
        self.assertEqual(report.poa.value, 3.0)
        self.assertIsNone(report.spoa.value)
        self.assertEqual(report.spoa.reason, NO_EQUILIBRIUM)

    def test_line_of_four(self):
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g3()))
        self.assertEqual(report.poa.value, 6.0)
        self.assertEqual(report.spoa.value, 1.0)
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g3(H=30)))
        self.assertEqual(report.poa.value, 16.0)

    def test_harmonic_congestion(self):
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g4()))
        self.assertEqual(len(report.nash), 3)
        self.assertEqual(len(report.strong_nash), 3)
        self.assertEqual(report.spoa.value, 1.5)

    def test_zero_welfare_nash_is_unbounded(self):
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g5()))
        self.assertEqual(report.poa.reason, UNBOUNDED)
        self.assertEqual(report.pos.value, 1.0)
        self.assertEqual([e.profile for e in report.strong_nash], [(1, 1)])
        self.assertEqual(report.spoa.value, 1.0)

    def test_witnesses(self):
        game = GameLoader.load_game(generators.g1())
        report = EquilibriumService.efficiency_ratios(game, with_witnesses=True)
        self.assertEqual(set(report.witnesses), {(0, 1), (1, 0), (1, 1)})
        self.assertEqual(report.witnesses[(1, 1)].profile, (0, 0))

    def test_report_serializes(self):
        report = EquilibriumService.efficiency_ratios(GameLoader.load_game(generators.g2()))
        data = EquilibriumReportSerializer(report).data
        self.assertEqual(data['strong_nash'], [])
        self.assertIsNone(data['spoa']['value'])
        self.assertEqual(json.loads(render_json(data))['spoa'], {'value': None, 'reason': NO_EQUILIBRIUM})

    def test_profile_table(self):
        stream = io.StringIO()
        write_profile_table(EquilibriumService.profile_table(GameLoader.load_game(generators.g1())), stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[0], 'profile,names,welfare,is_nash,is_strong_nash')
        self.assertEqual(len(lines), 5)
        self.assertEqual(lines[1], '0-0,shared|shared,1.0,true,true')


class StrongCoarseCorrelatedTests(SimpleTestCase):
    def setUp(self):
        self.pd = GameLoader.load_game(generators.g2())

    def test_point_mass_on_strong_nash(self):
        game = GameLoader.load_game(generators.g1())
        self.assertTrue(EquilibriumService.verify_scce(game, {(0, 0): 1.0}))

    def test_point_mass_on_defection(self):
        verdict = EquilibriumService.verify_scce(self.pd, {(1, 1): 1.0})
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness.coalition.members, (0, 1))
        self.assertEqual(verdict.witness.joint, (0, 0))

    def test_uniform_distribution(self):
        uniform = [((a, b), 0.25) for a in range(2) for b in range(2)]
        verdict = EquilibriumService.verify_scce(self.pd, uniform)
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness.coalition.members, (0,))
        self.assertEqual(verdict.witness.joint, (1,))

    def test_point_masses_agree_with_strong_nash(self):
        for spec in (generators.g1(), generators.g2(), generators.g3(), generators.g4()):
            game = GameLoader.load_game(spec)
            for s in EquilibriumService.enumerate_equilibria(game):
                self.assertEqual(
                    bool(EquilibriumService.verify_scce(game, {s: 1.0})),
                    bool(EquilibriumService.is_strong_nash(game, s)),
                )

    def test_malformed_distributions(self):
        with self.assertRaises(InvalidDistribution):
            EquilibriumService.verify_scce(self.pd, {(0, 0): 0.5, (1, 1): 0.4})
        with self.assertRaises(InvalidDistribution):
            EquilibriumService.verify_scce(self.pd, {(0, 3): 1.0})
        with self.assertRaises(InvalidDistribution):
            EquilibriumService.verify_scce(self.pd, {(0, 0): 1.5, (1, 1): -0.5})
