import io

from django.test import SimpleTestCase, override_settings

from core.exceptions import InvalidArgument, RejectedCertificate, StateSpaceTooLarge
from core.models import Coalition, Game
from core.services import ProfileService
from dynamics.models import DynamicsMode
from dynamics.serializers import ChainAnalysisSerializer, DynamicsTraceSerializer, write_trace
from dynamics.services import UTILITY_ONLY, DynamicsService, rng_for
from equilibria.models import EquilibriumKind
from equilibria.services import EquilibriumService
from games import generators
from games.services import GameLoader
from smoothness.models import SmoothnessCertificate, SmoothnessKind
from smoothness.services import SmoothnessService


def load(spec):
    return GameLoader.load_game(spec)


def harmonic_congestion(values=(4.0, 2.0, 1.0), n=4):
    resources = [{'id': f"r{k + 1}", 'harmonic': v} for k, v in enumerate(values)]
    strategies = [[resource['id']] for resource in resources]
    return {
        'kind': 'utility_congestion',
        'payload': {'resources': resources, 'players': [{'strategies': strategies}] * n},
    }


class CoalitionDistributionTests(SimpleTestCase):
    def test_two_players(self):
        distribution = DynamicsService.coalition_distribution(2)
        self.assertEqual([c.members for c, _ in distribution], [(0,), (1,), (0, 1)])
        for _, probability in distribution:
            self.assertAlmostEqual(probability, 1 / 3)

    def test_three_players(self):
        distribution = dict(DynamicsService.coalition_distribution(3))
        self.assertAlmostEqual(distribution[Coalition((0, 2))], 1 / 11)
        self.assertAlmostEqual(sum(distribution.values()), 1.0)

    def test_single_player(self):
        self.assertEqual(DynamicsService.coalition_distribution(1), [(Coalition((0,)), 1.0)])


class BestResponseTests(SimpleTestCase):
    def setUp(self):
        self.pd = load(generators.g2())

    def test_grand_coalition_cooperates(self):
        for s in ProfileService.enumerate_profiles(self.pd):
            self.assertEqual(DynamicsService.joint_best_response(self.pd, Coalition((0, 1)), s), (0, 0))

    def test_single_player_defects(self):
        self.assertEqual(DynamicsService.joint_best_response(self.pd, Coalition((0,)), (0, 0)), (1,))

    def test_single_player_game(self):
        game = Game((3,), lambda s: ((1.0, 5.0, 2.0)[s[0]],))
        self.assertEqual(DynamicsService.joint_best_response(game, Coalition((0,)), (0,)), (1,))

    def test_ties_keep_current(self):
        game = Game((3, 1), lambda s: (1.0, 0.0))
        self.assertEqual(DynamicsService.joint_best_response(game, Coalition((0,)), (2, 0)), (2,))

    def test_ties_otherwise_lexicographic(self):
        game = Game((3, 1), lambda s: ((0.0, 2.0, 2.0)[s[0]], 0.0))
        self.assertEqual(DynamicsService.joint_best_response(game, Coalition((0,)), (0, 0)), (1,))

    def test_cost_minimization(self):
        game = load(generators.g1())
        self.assertEqual(DynamicsService.joint_best_response(game, Coalition((0, 1)), (1, 1)), (0, 0))
        self.assertEqual(DynamicsService.joint_best_response(game, Coalition((0,)), (1, 1)), (1,))

    def test_step_uses_seeded_generator(self):
        first = DynamicsService.coalitional_step(self.pd, (1, 1), rng_for(5))
        second = DynamicsService.coalitional_step(self.pd, (1, 1), rng_for(5))
        self.assertEqual(first, second)


class SimulationTests(SimpleTestCase):
    def test_one_step_from_defection(self):
        game = load(generators.g2())
        for seed in range(20):
            step = DynamicsService.run_coalitional(game, 1, seed, initial=(1, 1)).steps[0]
            expected = (0, 0) if step.coalition.members == (0, 1) else (1, 1)
            self.assertEqual(step.profile, expected)

    def test_replay(self):
        game = load(generators.g3())
        first = DynamicsService.run_coalitional(game, 200, 7)
        second = DynamicsService.run_coalitional(game, 200, 7)
        self.assertEqual(first.steps, second.steps)
        self.assertEqual(len(first.steps), 200)

    def test_welfare_column(self):
        game = load(generators.g3())
        for step in DynamicsService.run_coalitional(game, 50, 1).steps:
            self.assertEqual(step.welfare, game.welfare(step.profile))

    def test_optimum_is_kept_by_grand_coalition(self):
        game = load(generators.g3())
        opt, _ = ProfileService.optimum(game)
        self.assertEqual(DynamicsService.respond(game, opt, Coalition((0, 1, 2, 3))), opt)

    def test_unilateral_congestion(self):
        game = load(generators.g4())
        trace = DynamicsService.run_unilateral(game, 1, 0, initial=(1, 1))
        self.assertEqual(trace.initial_welfare, 1.0)
        self.assertEqual(trace.steps[0].welfare, 3.0)

    def test_potential_never_decreases(self):
        for spec in (generators.g4(), generators.random_congestion(seed=4), generators.random_contribution(seed=2)):
            trace = DynamicsService.run_unilateral(load(spec), 100, 3)
            potentials = [step.potential for step in trace.steps]
            for before, after in zip(potentials, potentials[1:]):
                self.assertGreaterEqual(after, before - 1e-9)

    def test_no_steps(self):
        game = load(generators.g4())
        trace = DynamicsService.run_unilateral(game, 0, 0)
        self.assertEqual(trace.steps, [])
        self.assertEqual(trace.empirical_mean_welfare, game.welfare((0, 0)))
        with self.assertRaises(InvalidArgument):
            DynamicsService.run_unilateral(game, -1, 0)

    def test_trace_csv(self):
        stream = io.StringIO()
        write_trace(DynamicsService.run_unilateral(load(generators.g4()), 3, 9), stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[:2], ['# seed: 9', '# generator: numpy.random.PCG64'])
        self.assertEqual(lines[4], 't,coalition,profile,welfare,potential')
        self.assertEqual(len(lines), 8)
        self.assertTrue(lines[5].startswith('1,'))

    def test_trace_csv_without_potential(self):
        stream = io.StringIO()
        write_trace(DynamicsService.run_coalitional(load(generators.g2()), 2, 0), stream)
        self.assertIn('t,coalition,profile,welfare\n', stream.getvalue())

    def test_trace_document(self):
        data = DynamicsTraceSerializer(DynamicsService.run_coalitional(load(generators.g2()), 2, 0)).data
        self.assertEqual(data['mode'], DynamicsMode.COALITIONAL)
        self.assertEqual(len(data['steps']), 2)
        self.assertIsNone(data['steps'][0]['potential'])


class ChainTests(SimpleTestCase):
    def test_prisoners_dilemma_transitions(self):
        game = load(generators.g2())
        chain = DynamicsService.build_chain(game)
        dd, cc = chain.state_index((1, 1)), chain.state_index((0, 0))
        self.assertAlmostEqual(chain.transition[dd, cc], 1 / 3)
        self.assertAlmostEqual(chain.transition[dd, dd], 2 / 3)

    def test_cost_sharing_transitions(self):
        chain = DynamicsService.build_chain(load(generators.g1()))
        self.assertAlmostEqual(chain.transition[chain.state_index((1, 1)), chain.state_index((0, 0))], 1 / 3)

    def test_rows_are_stochastic(self):
        for spec in (generators.g1(), generators.g2(), generators.g3(), generators.g4(), generators.g5()):
            sums = DynamicsService.build_chain(load(spec)).transition.sum(axis=1)
            for total in sums.A1:
                self.assertAlmostEqual(total, 1.0, delta=1e-12)

    @override_settings(CHAIN_STATE_CAP=3)
    def test_state_cap(self):
        with self.assertRaises(StateSpaceTooLarge):
            DynamicsService.build_chain(load(generators.g2()))

    def test_strong_nash_profiles_are_absorbing(self):
        for spec in (generators.g1(), generators.g3(), generators.g5()):
            game = load(spec)
            chain = DynamicsService.build_chain(game)
            for s in EquilibriumService.enumerate_equilibria(game, EquilibriumKind.STRONG_NASH):
                k = chain.state_index(s)
                self.assertAlmostEqual(chain.transition[k, k], 1.0)


class SinkTests(SimpleTestCase):
    def test_cost_sharing_absorbs(self):
        chain = DynamicsService.sink_equilibria(load(generators.g1()))
        self.assertEqual([sink.states for sink in chain.sinks], [[(0, 0)]])
        self.assertAlmostEqual(chain.sinks[0].expected_welfare, 1.0)

    def test_prisoners_dilemma_cycles(self):
        chain = DynamicsService.sink_equilibria(load(generators.g2()))
        self.assertEqual(len(chain.sinks), 1)
        sink = chain.sinks[0]
        self.assertEqual(sink.states, [(0, 0), (0, 1), (1, 0), (1, 1)])
        for value, expected in zip(sink.stationary, [1 / 3, 1 / 6, 1 / 6, 1 / 3]):
            self.assertAlmostEqual(value, expected)
        self.assertAlmostEqual(sink.expected_welfare, 4.0)
        self.assertLessEqual(sink.residual, 1e-10)

    @override_settings(DENSE_SOLVE_LIMIT=1)
    def test_power_iteration(self):
        sink = DynamicsService.sink_equilibria(load(generators.g2())).sinks[0]
        self.assertAlmostEqual(sink.expected_welfare, 4.0, places=6)

    def test_indifferent_game(self):
        chain = DynamicsService.sink_equilibria(Game((2, 2), lambda s: (0.0, 0.0)))
        self.assertEqual(len(chain.sinks), 4)

    def test_sink_welfare_bound(self):
        for spec in (generators.g2(), generators.g3(), generators.g4()):
            game = load(spec)
            certificate = SmoothnessService.fit_coalitional_smoothness(game)
            chain = DynamicsService.sink_equilibria(game, certificate)
            self.assertTrue(chain.bound_holds, spec['kind'])
            drift = DynamicsService.check_one_step_drift(game, chain, certificate)
            self.assertTrue(drift.holds, spec['kind'])

    def test_cost_games_have_no_threshold(self):
        game = load(generators.g1())
        certificate = SmoothnessService.fit_coalitional_smoothness(game)
        chain = DynamicsService.sink_equilibria(game, certificate)
        self.assertIsNone(chain.threshold)
        self.assertEqual(chain.threshold_reason, UTILITY_ONLY)
        self.assertIsNone(DynamicsService.check_one_step_drift(game, chain, certificate).holds)

    def test_rejected_certificate(self):
        game = load(generators.g2())
        bogus = SmoothnessCertificate(SmoothnessKind.COALITIONAL, 'utility', (0, 0), 10.0, 0.0, 6.0, verified=True)
        with self.assertRaises(RejectedCertificate):
            DynamicsService.sink_equilibria(game, bogus)

    def test_chain_document(self):
        data = ChainAnalysisSerializer(DynamicsService.sink_equilibria(load(generators.g2()))).data
        self.assertEqual(data['states'], 4)
        self.assertEqual(data['sinks'][0]['states'][0], [0, 0])
        self.assertIsNone(data['bound_holds'])


class GuaranteeTests(SimpleTestCase):
    def test_short_trace_passes(self):
        game = load(generators.g3())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5)
        trace = DynamicsService.run_coalitional(game, 1, 0)
        report = DynamicsService.empirical_bound_check(trace, certificate, certificate.opt)
        self.assertEqual(report.threshold, 0.0)
        self.assertTrue(report.passed)

    def test_line_of_four_empirical_welfare(self):
        game = load(generators.g3())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5)
        sweep = DynamicsService.empirical_bound_sweep(game, certificate, 10_000, range(20))
        self.assertEqual([report.seed for report in sweep.reports], list(range(20)))
        self.assertTrue(sweep.passed)
        self.assertEqual(sweep.min_margin, min(report.margin for report in sweep.reports))
        self.assertGreater(sweep.min_margin, 0.0)
        worst = next(report for report in sweep.reports if report.seed == sweep.worst_seed)
        self.assertEqual(worst.margin, sweep.min_margin)
        for report in sweep.reports:
            self.assertEqual(report.steps, 10_000)
            self.assertAlmostEqual(report.threshold, 0.49995 * 0.5 / (ProfileService.harmonic(4) + 0.5) * 12)

    def test_empirical_bound_needs_coalitional_utility_runs(self):
        game = load(generators.g3())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5)
        with self.assertRaises(InvalidArgument):
            DynamicsService.empirical_bound(game, certificate, DynamicsService.run_unilateral(game, 5, 0))
        cost_game = load(generators.g1())
        cost_certificate = SmoothnessService.check_coalitional_smoothness(cost_game, None, 1.5, 0.0)
        with self.assertRaises(InvalidArgument):
            DynamicsService.empirical_bound_sweep(cost_game, cost_certificate, 5, [0])
        with self.assertRaises(InvalidArgument):
            DynamicsService.empirical_bound_sweep(game, certificate, 5, [])

    def test_empirical_bound_rechecks_certificate(self):
        game = load(generators.g2())
        bogus = SmoothnessCertificate(SmoothnessKind.COALITIONAL, 'utility', (0, 0), 10.0, 0.0, 6.0, verified=True)
        with self.assertRaises(RejectedCertificate):
            DynamicsService.empirical_bound_sweep(game, bogus, 5, [0])

    def test_trace_carries_bound(self):
        game = load(generators.g3())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 0.5, 0.5)
        trace = DynamicsService.run_coalitional(game, 50, 4)
        bound = DynamicsService.empirical_bound(game, certificate, trace)
        stream = io.StringIO()
        write_trace(trace, stream, bound)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines[4], f"# threshold: {bound.threshold!r}")
        self.assertEqual(lines[7], f"# passed: {str(bound.passed).lower()}")
        self.assertEqual(lines[8], 't,coalition,profile,welfare')

    def test_unverified_certificate(self):
        game = load(generators.g2())
        certificate = SmoothnessService.check_coalitional_smoothness(game, None, 10.0, 0.0)
        with self.assertRaises(RejectedCertificate):
            DynamicsService.empirical_bound_check(DynamicsService.run_coalitional(game, 5, 0), certificate, 6.0)

    def test_unilateral_guarantee(self):
        steps, fraction = DynamicsService.unilateral_guarantee(4, 1.0, ProfileService.harmonic(4), 0.1)
        self.assertEqual(steps, 4)
        self.assertAlmostEqual(fraction, 0.4 * 12 / 25)
        with self.assertRaises(InvalidArgument):
            DynamicsService.unilateral_guarantee(4, 1.0, 2.0, 0.6)

    def test_random_best_response_reaches_guarantee(self):
        game = load(harmonic_congestion())
        harmonic = ProfileService.harmonic(4)
        steps, fraction = DynamicsService.unilateral_guarantee(4, 1.0, harmonic, 0.1)
        _, opt = ProfileService.optimum(game)
        self.assertGreaterEqual(DynamicsService.mean_welfare_after(game, steps, range(50)), fraction * opt)
