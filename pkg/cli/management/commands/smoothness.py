from cli.base import GameCommand, check_failure, parse_profile, spec_failure
from cli.models import Anchor
from core.serializers import render_json
from smoothness.models import SmoothnessKind
from smoothness.serializers import SmoothnessCertificateSerializer
from smoothness.services import SmoothnessService


class Command(GameCommand):
    help = 'Fit the best (lambda, mu) smoothness certificate, or check a given one.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--fit', action='store_true', help='Fit a certificate (the default).')
        parser.add_argument('--check', action='store_true', help='Check --lambda and --mu.')
        parser.add_argument('--lambda', dest='lam', type=float)
        parser.add_argument('--mu', type=float)
        parser.add_argument('--anchor', default=Anchor.OPT, help='opt, search, or a profile such as 0-1-1.')
        parser.add_argument('--unilateral', action='store_true', help='Use the unilateral inequality.')
        parser.add_argument('--sample', action='store_true', help='Sample orderings above the permutation cap.')
        parser.add_argument('--seed', type=int, default=0)

    def analyze(self, game, options):
        kind = SmoothnessKind.UNILATERAL if options['unilateral'] else SmoothnessKind.COALITIONAL
        anchor = options['anchor']
        s_star = None if anchor in Anchor.values else parse_profile(anchor)
        lam, mu = options['lam'], options['mu']
        checking = options['check'] or lam is not None or mu is not None

        if options['fit'] and checking:
            raise spec_failure('Use either --fit or --check.')
        if not checking:
            certificate = SmoothnessService.fit(
                game, s_star, kind, anchor == Anchor.SEARCH, options['sample'], options['seed'],
            )
            self.emit(render_json(SmoothnessCertificateSerializer(certificate).data), options)
            return

        if lam is None or mu is None:
            raise spec_failure('--check needs both --lambda and --mu.')
        if anchor == Anchor.SEARCH:
            raise spec_failure('--anchor search only applies when fitting.')
        certificate = SmoothnessService.check(game, lam, mu, s_star, kind, options['sample'], options['seed'])
        self.emit(render_json(SmoothnessCertificateSerializer(certificate).data), options)
        if not certificate.verified:
            witness = certificate.witness
            where = f"profile {'-'.join(map(str, witness.profile))}"
            if witness.ordering is not None:
                where += f", ordering {'-'.join(map(str, witness.ordering.order))}"
            raise check_failure(
                f"({lam}, {mu})-smoothness fails at {where}: "
                f"deviation sum {witness.deviation_sum} against bound {witness.bound}."
            )
