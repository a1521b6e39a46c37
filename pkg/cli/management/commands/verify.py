from cli.base import GameCommand, check_failure, choose
from core.serializers import render_json
from smoothness.models import StructuralProperty
from smoothness.serializers import StructuralCheckSerializer
from smoothness.services import StructureService


class Command(GameCommand):
    help = 'Check one structural property: ' + ', '.join(StructuralProperty.values) + '.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--property', dest='prop', required=True)
        parser.add_argument('--cap', type=int, default=2, help='Multiplicity cap for submodularity.')

    def analyze(self, game, options):
        check = StructureService.run(game, choose(options, 'prop', StructuralProperty), options['cap'])
        self.emit(render_json(StructuralCheckSerializer(check).data), options)
        if not check.holds:
            raise check_failure(f"{check.prop} does not hold: {check.witness}")
