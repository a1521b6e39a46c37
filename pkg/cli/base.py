import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from django.test import override_settings

from cli.models import CAP_SETTINGS, CHECK_FAILED
from core.exceptions import GameError, SpecError
from games.services import GameLoader
from smoothness.serializers import SmoothnessCertificateSerializer

logger = logging.getLogger(__name__)


def spec_failure(message):
    return CommandError(message, returncode=SpecError.exit_code)


def check_failure(message):
    return CommandError(message, returncode=CHECK_FAILED)


def parse_profile(text):
    """'0-1-1' (or '0,1,1') -> (0, 1, 1)."""
    try:
        return tuple(int(part) for part in text.replace(',', '-').split('-'))
    except ValueError:
        raise spec_failure(f"Cannot read profile {text!r}; expected dash-separated strategy indices.")


def choose(options, name, choices):
    value = options[name]
    if value not in choices.values:
        raise spec_failure(f"--{name} must be one of {', '.join(choices.values)}, got {value!r}.")
    return choices(value)


def read_certificate(path):
    serializer = SmoothnessCertificateSerializer(data=GameLoader.read(path))
    if not serializer.is_valid():
        raise SpecError({'certificate': serializer.errors})
    return serializer.save()


class ReportCommand(BaseCommand):
    """Writes one document to standard output or `--output`."""
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--output', '-o', help='Write to this file instead of standard output.')

    def emit(self, text, options):
        path = options.get('output')
        if not path:
            self.stdout.write(text, ending='')
            return
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise spec_failure(f"Cannot write {path}: {exc.strerror}.")
        logger.info("wrote %s", path)

    def handle(self, *args, **options):
        try:
            self.report(options)
        except (GameError, SpecError) as exc:
            raise CommandError(str(exc), returncode=exc.exit_code)

    def report(self, options):
        raise NotImplementedError


class GameCommand(ReportCommand):
    """Loads the game spec named on the command line, with per-run cap overrides."""

    def add_arguments(self, parser):
        parser.add_argument('spec', help='Game spec JSON file.')
        super().add_arguments(parser)
        parser.add_argument('--profile-cap', type=int, help='Largest profile space to enumerate.')
        parser.add_argument('--permutation-cap', type=int, help='Most players for exact ordering search.')
        parser.add_argument('--chain-cap', type=int, help='Most states in a best-response chain.')

    def report(self, options):
        overrides = {
            setting: options[flag] for flag, setting in CAP_SETTINGS.items() if options.get(flag) is not None
        }
        if any(value < 1 for value in overrides.values()):
            raise spec_failure('Caps must be positive.')
        with override_settings(**overrides):
            game = GameLoader.load_game_file(options['spec'])
            self.analyze(game, options)

    def analyze(self, game, options):
        raise NotImplementedError
