from cli.base import GameCommand, read_certificate
from core.serializers import render_json
from dynamics.serializers import ChainAnalysisSerializer, DriftReportSerializer
from dynamics.services import DynamicsService


class Command(GameCommand):
    help = 'Coalitional sink equilibria: recurrent classes, stationary laws and expected welfare.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--cert', help='Certificate JSON; adds the welfare threshold and the drift check.')

    def analyze(self, game, options):
        certificate = read_certificate(options['cert']) if options['cert'] else None
        chain = DynamicsService.sink_equilibria(game, certificate)
        data = ChainAnalysisSerializer(chain).data
        if certificate is not None:
            data['drift'] = DriftReportSerializer(
                DynamicsService.check_one_step_drift(game, chain, certificate)
            ).data
        self.emit(render_json(data), options)
