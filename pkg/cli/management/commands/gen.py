import inspect

from cli.base import ReportCommand, spec_failure
from core.serializers import render_json
from games.generators import FIXTURES

PARAMETERS = {
    'H': float, 'n': int, 'r': int, 'seed': int, 'budget': float, 'grid': int, 'projects': int,
    'groups': int, 'strategies': int, 'density': float, 'direction': str,
}


class Command(ReportCommand):
    help = 'Write a fixture game spec: ' + ', '.join(FIXTURES) + '.'

    def add_arguments(self, parser):
        parser.add_argument('family')
        super().add_arguments(parser)
        for name, cast in PARAMETERS.items():
            parser.add_argument(f"--{name}", type=cast)
        parser.add_argument('--increasing', action='store_true', help='Increasing congestion tables.')
        parser.add_argument('--no-caps', dest='caps', action='store_false', help='Linear welfare-sharing factors.')

    def report(self, options):
        family = options['family']
        if family not in FIXTURES:
            raise spec_failure(f"Unknown family {family!r}; choose from {', '.join(FIXTURES)}.")
        generator = FIXTURES[family]
        accepted = inspect.signature(generator).parameters
        given = {name: options[name] for name in PARAMETERS if options[name] is not None}
        if options['increasing']:
            given['increasing'] = True
        if not options['caps']:
            given['caps'] = False
        unknown = sorted(set(given) - set(accepted))
        if unknown:
            raise spec_failure(f"{family} does not take {', '.join('--' + name for name in unknown)}.")
        self.emit(render_json(generator(**given)), options)
