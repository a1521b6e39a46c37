from django.test import SimpleTestCase, override_settings

from core.exceptions import SpecError, StateSpaceTooLarge, flatten_errors
from core.models import Direction
from core.services import ProfileService
from games import generators
from games.services import GameLoader


def family_of(spec):
    data = GameLoader.validate(spec)
    return GameLoader.build_family(data['kind'], data['payload'])


def paths(error):
    return {path for path, _ in flatten_errors(error.detail)}


class CostSharingTests(SimpleTestCase):
    def setUp(self):
        self.game = GameLoader.load_game(generators.g1())
        self.family = family_of(generators.g1())

    def test_shape(self):
        self.assertEqual(self.game.strategy_counts, (2, 2))
        self.assertEqual(self.game.direction, Direction.COST_MIN)
        self.assertEqual(self.game.profile_named('shared', 'own2'), (0, 1))

    def test_cost_shares(self):
        self.assertEqual(self.family.cost_share_cost(0, (0, 0)), 0.5)
        self.assertEqual(self.family.cost_share_cost(0, (0, 1)), 1.0)
        self.assertAlmostEqual(self.family.cost_share_cost(1, (1, 1)), 0.9)

    def test_out_player_pays_nothing(self):
        self.assertEqual(self.game.value(1, (0, 2)), 0.0)
        self.assertEqual(self.game.value(0, (0, 2)), 1.0)

    def test_budget_balance(self):
        for seed in range(5):
            family = family_of(generators.random_cost_sharing(n=3, r=4, seed=seed))
            game = family.to_game()
            for s in ProfileService.enumerate_profiles(game):
                used = {r for i, k in enumerate(s) for r in family.resources_of(i, k)}
                self.assertAlmostEqual(game.welfare(s), sum(family.costs[r] for r in used))

    def test_unknown_resource(self):
        spec = generators.g1()
        spec['payload']['players'][0]['strategies'].append(['bridge'])
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.players.0.strategies.2', paths(raised.exception))


class NormalFormTests(SimpleTestCase):
    def test_prisoners_dilemma(self):
        game = GameLoader.load_game(generators.g2())
        self.assertEqual(game.payoffs(game.profile_named('D', 'C')), (4.0, 0.0))
        self.assertEqual(game.welfare((0, 0)), 6.0)
        self.assertFalse(game.has_out)
        self.assertFalse(game.has_potential)

    def test_shape_mismatch(self):
        spec = generators.g2()
        spec['payload']['utilities'][1] = [[3, 4]]
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.utilities.1', paths(raised.exception))

    def test_out_must_pay_zero(self):
        spec = generators.g2()
        spec['payload']['out'] = [1, 1]
        with self.assertRaises(SpecError):
            GameLoader.load_game(spec)

    def test_live_out_strategy(self):
        spec = {
            'kind': 'normal_form',
            'payload': {
                'players': 2,
                'strategies': [['in', 'out'], ['in', 'out']],
                'utilities': [[[2, 1], [0, 0]], [[2, 0], [1, 0]]],
                'potential': [[3, 1], [1, 0]],
                'out': [1, 1],
            },
        }
        game = GameLoader.load_game(spec)
        self.assertEqual(game.out_strategies, (1, 1))
        self.assertEqual(game.potential((0, 0)), 3.0)

    def test_partial_out_list(self):
        spec = generators.g2()
        spec['payload']['out'] = [None, 1]
        with self.assertRaises(SpecError):
            GameLoader.load_game(spec)


class NetworkContributionTests(SimpleTestCase):
    def setUp(self):
        self.game = GameLoader.load_game(generators.g3())
        self.family = family_of(generators.g3())
        self.mid = self.game.profile_named('A-B:1', 'B-C:1', 'B-C:1', 'C-D:1')
        self.outer = self.game.profile_named('A-B:1', 'A-B:1', 'C-D:1', 'C-D:1')

    def test_shape(self):
        self.assertEqual(self.game.strategy_counts, (1, 2, 2, 1))

    def test_welfare(self):
        self.assertEqual(self.game.welfare(self.mid), 12.0)
        self.assertEqual(self.game.welfare(self.outer), 2.0)
        self.assertEqual(ProfileService.optimum(self.game), (self.mid, 12.0))

    def test_contribution_utility(self):
        both_mid = [(1.0,), (0.0, 1.0), (1.0, 0.0), (1.0,)]
        both_outer = [(1.0,), (1.0, 0.0), (0.0, 1.0), (1.0,)]
        self.assertEqual(self.family.contribution_utility(1, both_mid), 5.5)
        self.assertEqual(self.family.contribution_utility(1, both_outer), 0.5)

    def test_zero_effort_product_edge(self):
        spec = {
            'kind': 'network_contribution',
            'payload': {
                'nodes': [{'id': 'A', 'budget': 1.0}, {'id': 'B', 'budget': 1.0}, {'id': 'C', 'budget': 1.0}],
                'edges': [
                    {'a': 'A', 'b': 'B', 'fn': 'product', 'params': {'c': 2.0}},
                    {'a': 'B', 'b': 'C', 'fn': 'sum', 'params': {'c': 1.0}},
                ],
                'grid': 1,
            },
        }
        family = family_of(spec)
        efforts = [(1.0,), (0.0, 1.0), (1.0,)]
        self.assertEqual(family.edge_values(efforts)[0], 0.0)
        self.assertEqual(family.contribution_utility(0, efforts), 0.0)
        self.assertEqual(family.contribution_utility(1, efforts), 1.0)

    def test_effort_validation(self):
        with self.assertRaises(SpecError):
            self.family.contribution_utility(1, [(1.0,), (0.5, 0.5), (1.0, 0.0), (1.0,)])
        with self.assertRaises(SpecError):
            self.family.contribution_utility(1, [(1.0,), (1.0, 1.0), (1.0, 0.0), (1.0,)])

    def test_potential_is_half_welfare(self):
        for s in ProfileService.enumerate_profiles(self.game):
            self.assertEqual(self.game.potential(s), self.game.welfare(s) / 2)

    def test_absent_node_kills_its_edges(self):
        s = (self.mid[0], self.game.out_strategies[1], self.mid[2], self.mid[3])
        self.assertEqual(self.game.payoffs(s), (0.0, 0.0, 0.5, 0.5))

    def test_threshold_needs_H(self):
        spec = generators.g3()
        spec['payload']['edges'][1]['params'] = {'c': 10.0}
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.edges.1.params', paths(raised.exception))

    @override_settings(PROFILE_CAP=5)
    def test_allocation_overflow(self):
        spec = generators.g3()
        spec['payload']['grid'] = 10
        with self.assertRaises(StateSpaceTooLarge):
            GameLoader.load_game(spec)


class WelfareSharingTests(SimpleTestCase):
    def test_unit_efforts(self):
        family = family_of(generators.g5())
        self.assertEqual(family.welfare_share_utility(0, [(1.0,), (1.0,)]), 0.5)
        self.assertEqual(family.welfare_share_utility(0, [(0.0,), (0.0,)]), 0.0)

    def test_uneven_efforts(self):
        family = family_of(generators.g5(budget=3.0, grid=3))
        self.assertEqual(family.welfare_share_utility(0, [(2.0,), (3.0,)]), 3.0)
        self.assertEqual(family.welfare_share_utility(1, [(2.0,), (3.0,)]), 3.0)

    def test_off_grid_effort(self):
        family = family_of(generators.g5(budget=3.0, grid=3))
        with self.assertRaises(SpecError):
            family.welfare_share_utility(0, [(1.5,), (3.0,)])
        with self.assertRaises(SpecError):
            family.welfare_share_utility(0, [(4.0,), (3.0,)])

    def test_zero_effort_is_live(self):
        game = GameLoader.load_game(generators.g5())
        self.assertEqual(game.strategy_counts, (2, 2))
        self.assertEqual(game.strategy_names[0], ('idle', 'P:1'))
        self.assertEqual(game.payoffs((1, 1)), (0.5, 0.5))

    def test_shares_partition_project_value(self):
        for seed in range(5):
            family = family_of(generators.random_welfare_sharing(n=3, seed=seed))
            game = family.to_game()
            for s in ProfileService.enumerate_profiles(game):
                efforts = family.efforts_of(s)
                for j in range(len(family.project_ids)):
                    shares = family.project_shares(j, efforts)
                    value = family.project_value(j, family.project_effort(j, efforts))
                    if sum(shares.values()) > 0:
                        self.assertAlmostEqual(sum(shares.values()), value)

    def test_missing_group_factor(self):
        spec = generators.g5()
        del spec['payload']['projects'][0]['factors']['g2']
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.projects.0.factors', paths(raised.exception))


class UtilityCongestionTests(SimpleTestCase):
    def setUp(self):
        self.game = GameLoader.load_game(generators.g4())
        self.family = family_of(generators.g4())

    def test_crowded_resource(self):
        s = self.game.profile_named('r1', 'r1')
        self.assertEqual(self.family.congestion_utility(0, s), 1.0)
        self.assertEqual(self.game.potential(s), 3.0)

    def test_split(self):
        s = self.game.profile_named('r1', 'r2')
        self.assertEqual(self.game.welfare(s), 3.0)
        self.assertEqual(self.game.potential(s), 3.0)

    def test_all_out(self):
        self.assertEqual(self.game.potential(self.game.out_strategies), 0.0)

    def test_harmonic_potential_between_welfare_bounds(self):
        h = ProfileService.harmonic(self.game.n_players)
        for s in ProfileService.enumerate_profiles(self.game):
            self.assertGreaterEqual(self.game.potential(s), self.game.welfare(s) - 1e-9)
            self.assertLessEqual(self.game.potential(s), h * self.game.welfare(s) + 1e-9)

    def test_table_length(self):
        spec = generators.random_congestion(n=3, r=2, seed=1)
        spec['payload']['resources'][0]['pi'].append(0.1)
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.resources.0.pi', paths(raised.exception))

    def test_table_holds_last_entry(self):
        family = family_of(generators.random_congestion(n=2, r=2, seed=3))
        self.assertEqual(family.unit_value(0, 5), family.unit_value(0, 2))


class LoaderTests(SimpleTestCase):
    def test_empty_players(self):
        spec = generators.g1()
        spec['payload']['players'] = []
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertTrue(any(p.startswith('payload.players') for p in paths(raised.exception)))

    def test_unknown_fields(self):
        spec = generators.g1()
        spec['payload']['players'][0]['weight'] = 2
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.players.0.weight', paths(raised.exception))

        spec = generators.g1()
        spec['version'] = 1
        with self.assertRaises(SpecError):
            GameLoader.load_game(spec)

    def test_unknown_kind(self):
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game({'kind': 'auction', 'payload': {}})
        self.assertIn('kind', paths(raised.exception))

    def test_malformed_json(self):
        with self.assertRaises(SpecError) as raised:
            GameLoader.parse(b'{"kind": ')
        self.assertEqual(raised.exception.exit_code, 1)

    def test_message_names_field_path(self):
        spec = generators.g3()
        spec['payload']['nodes'][2]['budget'] = -1
        with self.assertRaises(SpecError) as raised:
            GameLoader.load_game(spec)
        self.assertIn('payload.nodes.2.budget', str(raised.exception))


class GeneratorTests(SimpleTestCase):
    def test_random_families_are_reproducible(self):
        for name in ('random-cost-sharing', 'random-congestion', 'random-contribution',
                     'random-welfare-sharing', 'random-normal-form'):
            generate = generators.FIXTURES[name]
            self.assertEqual(generate(seed=4), generate(seed=4))
            GameLoader.load_game(generate(seed=4))

    def test_increasing_congestion_tables(self):
        spec = generators.random_congestion(n=3, r=2, seed=2, increasing=True)
        for resource in spec['payload']['resources']:
            self.assertEqual(resource['pi'], sorted(resource['pi']))
            self.assertLess(resource['pi'][0], resource['pi'][-1])

    def test_g3_scales_with_H(self):
        game = GameLoader.load_game(generators.g3(H=40))
        self.assertEqual(ProfileService.optimum(game)[1], 42.0)
