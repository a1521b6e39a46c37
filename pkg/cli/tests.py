import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.serializers import render_json
from games import generators


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.root = Path(directory.name)

    def spec(self, data, name='game.json'):
        path = self.root / name
        path.write_text(render_json(data))
        return str(path)

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, **options)
        return out.getvalue()

    def exit_code(self, *args, **options):
        with self.assertRaises(CommandError) as raised:
            self.call(*args, **options)
        return raised.exception.returncode


class AnalyzeCommandTests(CommandTestCase):
    def test_prisoners_dilemma_report(self):
        report = json.loads(self.call('analyze', self.spec(generators.g2())))
        self.assertEqual(report['opt']['profile'], [0, 0])
        self.assertEqual(report['nash'][0]['profile'], [1, 1])
        self.assertEqual(report['poa']['value'], 3.0)
        self.assertIsNone(report['spoa']['value'])
        self.assertEqual(report['witnesses'], [])

    def test_witnesses(self):
        report = json.loads(self.call('analyze', self.spec(generators.g2()), witnesses=True))
        self.assertEqual(len(report['witnesses']), 4)
        self.assertTrue(all(entry['deviation'] for entry in report['witnesses']))

    def test_profile_table(self):
        lines = self.call('analyze', self.spec(generators.g2()), format='csv').splitlines()
        self.assertEqual(lines[0], 'profile,names,welfare,is_nash,is_strong_nash')
        self.assertEqual(lines[1], '0-0,C|C,6.0,false,false')
        self.assertEqual(lines[4], '1-1,D|D,2.0,true,false')

    def test_cost_sharing_table(self):
        lines = self.call('analyze', self.spec(generators.g1()), format='csv').splitlines()
        self.assertEqual(len(lines), 5)

    def test_output_file(self):
        target = self.root / 'report.json'
        self.assertEqual(self.call('analyze', self.spec(generators.g1()), output=str(target)), '')
        self.assertEqual(json.loads(target.read_text())['spoa']['value'], 1.0)

    def test_unknown_format(self):
        self.assertEqual(self.exit_code('analyze', self.spec(generators.g2()), format='xml'), 1)

    def test_malformed_spec(self):
        path = self.root / 'broken.json'
        path.write_text('{"kind": ')
        self.assertEqual(self.exit_code('analyze', str(path)), 1)
        self.assertEqual(self.exit_code('analyze', str(self.root / 'missing.json')), 1)

    def test_profile_cap(self):
        self.assertEqual(self.exit_code('analyze', self.spec(generators.g2()), profile_cap=3), 2)
        self.assertEqual(self.exit_code('analyze', self.spec(generators.g2()), profile_cap=0), 1)


class SmoothnessCommandTests(CommandTestCase):
    def test_fit(self):
        certificate = json.loads(self.call('smoothness', self.spec(generators.g3())))
        self.assertEqual(certificate['kind'], 'coalitional')
        self.assertTrue(certificate['verified'])
        self.assertEqual(certificate['opt'], 12.0)
        self.assertIn('lambda', certificate)
        self.assertNotIn('lam', certificate)

    def test_check_passes(self):
        certificate = json.loads(self.call('smoothness', self.spec(generators.g1()), lam=1.5, mu=0.0))
        self.assertTrue(certificate['verified'])
        self.assertEqual(certificate['best_ratio'], 1.5)

    def test_contribution_game_is_half_smooth(self):
        certificate = json.loads(self.call('smoothness', self.spec(generators.g3()), check=True, lam=0.5, mu=0.5))
        self.assertTrue(certificate['verified'])

    def test_check_fails(self):
        path = self.spec(generators.g2())
        self.assertEqual(self.exit_code('smoothness', path, lam=10.0, mu=0.0), 3)

    def test_failure_names_profile_and_ordering(self):
        with self.assertRaises(CommandError) as raised:
            self.call('smoothness', self.spec(generators.g2()), lam=10.0, mu=0.0)
        message = str(raised.exception)
        self.assertIn('fails at profile ', message)
        self.assertRegex(message, r'ordering [01]-[01]:')

    def test_check_needs_both_parameters(self):
        self.assertEqual(self.exit_code('smoothness', self.spec(generators.g2()), check=True, lam=1.0), 1)

    def test_search_anchor_only_fits(self):
        path = self.spec(generators.g2())
        self.assertEqual(self.exit_code('smoothness', path, lam=1.0, mu=0.0, anchor='search'), 1)

    def test_explicit_anchor(self):
        certificate = json.loads(self.call('smoothness', self.spec(generators.g2()), anchor='1-1'))
        self.assertEqual(certificate['s_star'], [1, 1])

    def test_unilateral(self):
        certificate = json.loads(self.call('smoothness', self.spec(generators.g5()), unilateral=True))
        self.assertEqual(certificate['kind'], 'unilateral')

    def test_permutation_cap(self):
        path = self.spec(generators.g3())
        self.assertEqual(self.exit_code('smoothness', path, permutation_cap=2), 2)
        certificate = json.loads(self.call('smoothness', path, permutation_cap=2, sample=True, seed=1))
        self.assertFalse(certificate['exact'])


class DynamicsCommandTests(CommandTestCase):
    def test_trace_is_deterministic(self):
        path = self.spec(generators.g2())
        first = self.call('dynamics', path, seed=7, steps=20)
        self.assertEqual(first, self.call('dynamics', path, seed=7, steps=20))
        lines = first.splitlines()
        self.assertEqual(lines[:4], ['# seed: 7', '# generator: numpy.random.PCG64', '# mode: coalitional', '# initial: 0-0'])
        self.assertEqual(lines[4], 't,coalition,profile,welfare')
        self.assertEqual(len(lines), 25)

    def test_unilateral_trace_carries_potential(self):
        lines = self.call('dynamics', self.spec(generators.g4()), seed=1, steps=5, mode='unilateral').splitlines()
        self.assertEqual(lines[4], 't,coalition,profile,welfare,potential')

    def test_json(self):
        trace = json.loads(self.call('dynamics', self.spec(generators.g2()), seed=3, steps=4, format='json'))
        self.assertEqual(trace['seed'], 3)
        self.assertEqual(len(trace['steps']), 4)

    def test_initial_profile(self):
        lines = self.call('dynamics', self.spec(generators.g2()), seed=0, steps=0, initial='1-0').splitlines()
        self.assertEqual(lines[3], '# initial: 1-0')

    def certificate(self, path, lam=0.5):
        target = self.root / 'cert.json'
        self.call('smoothness', path, lam=0.5, mu=0.5, output=str(target))
        data = json.loads(target.read_text())
        data['lambda'] = lam
        return self.spec(data, 'cert.json')

    def test_empirical_bound_over_seeds(self):
        path = self.spec(generators.g3())
        sweep = json.loads(self.call('dynamics', path, seed=0, steps=2000, runs=3, cert=self.certificate(path)))
        self.assertTrue(sweep['passed'])
        self.assertEqual([report['seed'] for report in sweep['reports']], [0, 1, 2])
        self.assertEqual(sweep['min_margin'], min(report['margin'] for report in sweep['reports']))

    def test_trace_with_bound(self):
        path = self.spec(generators.g3())
        lines = self.call('dynamics', path, seed=1, steps=500, cert=self.certificate(path)).splitlines()
        self.assertTrue(lines[4].startswith('# threshold: '))
        trace = json.loads(self.call('dynamics', path, seed=1, steps=500, cert=self.certificate(path), format='json'))
        self.assertEqual(trace['bound']['steps'], 500)

    def test_bound_arguments(self):
        path = self.spec(generators.g3())
        self.assertEqual(self.exit_code('dynamics', path, seed=0, runs=2), 1)
        self.assertEqual(self.exit_code('dynamics', path, seed=0, runs=0, cert=self.certificate(path)), 1)
        self.assertEqual(
            self.exit_code('dynamics', path, seed=0, runs=2, mode='unilateral', cert=self.certificate(path)), 1,
        )
        self.assertEqual(self.exit_code('dynamics', path, seed=0, steps=5, cert=self.certificate(path, lam=5.0)), 4)

    def test_bad_arguments(self):
        path = self.spec(generators.g2())
        self.assertEqual(self.exit_code('dynamics', path, seed=0, mode='sideways'), 1)
        self.assertEqual(self.exit_code('dynamics', path, seed=0, initial='0-x'), 1)
        self.assertEqual(self.exit_code('dynamics', path, seed=0, initial='0-5'), 1)
        self.assertEqual(self.exit_code('dynamics', path, seed=0, steps=-1), 1)


class SinksCommandTests(CommandTestCase):
    def test_without_certificate(self):
        chain = json.loads(self.call('sinks', self.spec(generators.g2())))
        self.assertEqual(chain['states'], 4)
        self.assertEqual(len(chain['sinks']), 1)
        self.assertAlmostEqual(chain['sinks'][0]['expected_welfare'], 4.0)
        self.assertIsNone(chain['threshold'])
        self.assertNotIn('drift', chain)

    def test_with_fitted_certificate(self):
        path = self.spec(generators.g2())
        certificate = self.root / 'certificate.json'
        self.call('smoothness', path, output=str(certificate))
        chain = json.loads(self.call('sinks', path, cert=str(certificate)))
        self.assertTrue(chain['bound_holds'])
        self.assertTrue(chain['drift']['holds'])

    def test_rejected_certificate(self):
        path = self.spec(generators.g2())
        certificate = self.spec(
            {'kind': 'coalitional', 's_star': [0, 0], 'lambda': 10.0, 'mu': 0.0}, 'certificate.json',
        )
        self.assertEqual(self.exit_code('sinks', path, cert=certificate), 4)

    def test_malformed_certificate(self):
        certificate = self.spec({'s_star': [0, 0], 'lambda': -1.0, 'mu': 0.0}, 'certificate.json')
        self.assertEqual(self.exit_code('sinks', self.spec(generators.g2()), cert=certificate), 1)

    def test_chain_cap(self):
        self.assertEqual(self.exit_code('sinks', self.spec(generators.g2()), chain_cap=3), 2)


class VerifyCommandTests(CommandTestCase):
    def test_closeness(self):
        check = json.loads(self.call('verify', self.spec(generators.g3()), prop='closeness'))
        self.assertTrue(check['holds'])
        self.assertEqual(check['value'], {'lambda': 0.5, 'mu': 0.5})

    def test_marginal_gamma(self):
        check = json.loads(self.call('verify', self.spec(generators.g5()), prop='marginal-gamma'))
        self.assertEqual(check['value'], 0.5)

    def test_submodular(self):
        check = json.loads(self.call('verify', self.spec(generators.g4()), prop='submodular', cap=2))
        self.assertTrue(check['holds'])
        self.assertEqual(self.exit_code('verify', self.spec(generators.g2()), prop='submodular'), 5)

    def test_undefined_property(self):
        self.assertEqual(self.exit_code('verify', self.spec(generators.g2()), prop='potential'), 5)
        self.assertEqual(self.exit_code('verify', self.spec(generators.g2()), prop='monotone'), 5)

    def test_unknown_property(self):
        self.assertEqual(self.exit_code('verify', self.spec(generators.g3()), prop='convexity'), 1)


class GenCommandTests(CommandTestCase):
    def test_fixture(self):
        self.assertEqual(json.loads(self.call('gen', 'g2')), generators.g2())
        self.assertEqual(json.loads(self.call('gen', 'g3', H=4.0)), generators.g3(H=4.0))

    def test_random_family_is_deterministic(self):
        first = self.call('gen', 'random-congestion', n=3, r=2, seed=5, increasing=True)
        self.assertEqual(first, self.call('gen', 'random-congestion', n=3, r=2, seed=5, increasing=True))
        self.assertEqual(json.loads(first), generators.random_congestion(n=3, r=2, seed=5, increasing=True))

    def test_generated_spec_loads(self):
        spec = self.root / 'generated.json'
        self.call('gen', 'random-welfare-sharing', seed=2, caps=False, output=str(spec))
        report = json.loads(self.call('analyze', str(spec)))
        self.assertIn('poa', report)

    def test_unknown_family(self):
        self.assertEqual(self.exit_code('gen', 'g9'), 1)

    def test_parameter_the_family_does_not_take(self):
        self.assertEqual(self.exit_code('gen', 'g3', n=4), 1)
