import io

from cli.base import GameCommand, check_failure, choose, parse_profile, read_certificate, spec_failure
from cli.models import OutputFormat
from core.serializers import render_json
from dynamics.models import DynamicsMode
from dynamics.serializers import (
    DynamicsTraceSerializer, EmpiricalBoundReportSerializer, EmpiricalBoundSweepSerializer, write_trace,
)
from dynamics.services import DynamicsService


class Command(GameCommand):
    help = 'Simulate coalitional (or random-player) best-response dynamics and write the trace.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--mode', default=DynamicsMode.COALITIONAL, help='coalitional or unilateral.')
        parser.add_argument('--steps', type=int, default=1000)
        parser.add_argument('--seed', type=int, required=True)
        parser.add_argument('--initial', help='Initial profile, such as 0-1-1; lexicographically first by default.')
        parser.add_argument('--format', default=OutputFormat.CSV, help='csv (trace) or json.')
        parser.add_argument('--cert', help='Certificate JSON; compares mean welfare with its empirical threshold.')
        parser.add_argument(
            '--runs', type=int, default=1,
            help='With --cert, check seeds seed..seed+runs-1 and report the minimum margin instead of a trace.',
        )

    def analyze(self, game, options):
        mode = choose(options, 'mode', DynamicsMode)
        output_format = choose(options, 'format', OutputFormat)
        initial = parse_profile(options['initial']) if options['initial'] else None
        certificate = read_certificate(options['cert']) if options['cert'] else None
        runs = options['runs']
        if runs < 1:
            raise spec_failure(f"--runs must be positive, got {runs}.")
        if runs > 1 and certificate is None:
            raise spec_failure('--runs needs --cert.')

        if runs > 1:
            if mode != DynamicsMode.COALITIONAL:
                raise spec_failure('The empirical bound applies to coalitional dynamics.')
            seeds = range(options['seed'], options['seed'] + runs)
            sweep = DynamicsService.empirical_bound_sweep(game, certificate, options['steps'], seeds, initial)
            self.emit(render_json(EmpiricalBoundSweepSerializer(sweep).data), options)
            if not sweep.passed:
                raise check_failure(f"Empirical bound fails for seed {sweep.worst_seed}: margin {sweep.min_margin}.")
            return

        trace = DynamicsService.run(game, options['steps'], options['seed'], mode, initial)
        bound = None if certificate is None else DynamicsService.empirical_bound(game, certificate, trace)
        if output_format == OutputFormat.JSON:
            data = DynamicsTraceSerializer(trace).data
            if bound is not None:
                data['bound'] = EmpiricalBoundReportSerializer(bound).data
            self.emit(render_json(data), options)
        else:
            stream = io.StringIO()
            write_trace(trace, stream, bound)
            self.emit(stream.getvalue(), options)
        if bound is not None and not bound.passed:
            raise check_failure(f"Empirical bound fails: margin {bound.margin}.")
