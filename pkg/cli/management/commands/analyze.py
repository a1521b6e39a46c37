import io

from cli.base import GameCommand, choose
from cli.models import OutputFormat
from core.serializers import render_json
from equilibria.serializers import EquilibriumReportSerializer, write_profile_table
from equilibria.services import EquilibriumService


class Command(GameCommand):
    help = 'Enumerate Nash and strong Nash equilibria and report PoA, PoS and strong PoA.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--format', default=OutputFormat.JSON, help='json (report) or csv (profile table).')
        parser.add_argument(
            '--witnesses', action='store_true', help='Add the blocking deviation of every non-strong profile.',
        )

    def analyze(self, game, options):
        if choose(options, 'format', OutputFormat) == OutputFormat.CSV:
            stream = io.StringIO()
            write_profile_table(EquilibriumService.profile_table(game), stream)
            self.emit(stream.getvalue(), options)
            return
        report = EquilibriumService.efficiency_ratios(game, with_witnesses=options['witnesses'])
        self.emit(render_json(EquilibriumReportSerializer(report).data), options)
