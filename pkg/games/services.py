import io
import logging
import math
from pathlib import Path

from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser

from core.exceptions import SpecError
from games.models import (
    CostSharing, Edge, Factor, GameKind, NetworkContribution, NormalForm, UtilityCongestion,
    WelfareSharing,
)
from games.serializers import GameSpecSerializer

logger = logging.getLogger(__name__)


class GameLoader:
    @staticmethod
    def validate(spec):
        serializer = GameSpecSerializer(data=spec)
        if not serializer.is_valid():
            raise SpecError(serializer.errors)
        return serializer.validated_data

    @staticmethod
    def build_family(kind, payload):
        """Family model (with its per-family oracles) for a validated payload."""
        builder = FAMILY_BUILDERS[kind]
        family = builder(payload)
        logger.debug("built %s family", kind)
        return family

    @staticmethod
    def load_game(spec, label=''):
        data = GameLoader.validate(spec)
        game = GameLoader.build_family(data['kind'], data['payload']).to_game(label)
        size = math.prod(game.strategy_counts)
        logger.info("loaded %s game %s with %d profiles", data['kind'], label or '<inline>', size)
        return game

    @staticmethod
    def parse(raw: bytes):
        try:
            return JSONParser().parse(io.BytesIO(raw))
        except ParseError as exc:
            raise SpecError({'json': [str(exc.detail)]})

    @staticmethod
    def read(path):
        path = Path(path)
        try:
            return GameLoader.parse(path.read_bytes())
        except OSError as exc:
            raise SpecError({'path': [f"Cannot read {path}: {exc.strerror}."]})

    @staticmethod
    def load_game_file(path):
        return GameLoader.load_game(GameLoader.read(path), label=Path(path).stem)


def build_normal_form(payload):
    return NormalForm(
        payload['strategies'], payload['utilities'], payload['direction'],
        potential=payload['potential'], out=payload['out'],
    )


def build_cost_sharing(payload):
    return CostSharing(
        [r['id'] for r in payload['resources']],
        [r['cost'] for r in payload['resources']],
        payload['resolved'],
    )


def build_network_contribution(payload):
    index = payload['node_index']
    edges = [
        Edge(index[edge['a']], index[edge['b']], edge['fn'], dict(edge['params']))
        for edge in payload['edges']
    ]
    return NetworkContribution(
        [node['id'] for node in payload['nodes']],
        [node['budget'] for node in payload['nodes']],
        edges,
        payload['grid'],
    )


def build_welfare_sharing(payload):
    index = payload['project_index']
    return WelfareSharing(
        [project['id'] for project in payload['projects']],
        [
            {group: Factor(factor['a'], factor['cap']) for group, factor in project['factors'].items()}
            for project in payload['projects']
        ],
        [player['budget'] for player in payload['players']],
        [player['group'] for player in payload['players']],
        [[index[p] for p in player['projects']] for player in payload['players']],
        payload['grid'],
    )


def build_utility_congestion(payload):
    return UtilityCongestion(
        [r['id'] for r in payload['resources']],
        [r['pi'] for r in payload['resources']],
        [r['harmonic'] for r in payload['resources']],
        payload['resolved'],
    )


FAMILY_BUILDERS = {
    GameKind.NORMAL_FORM: build_normal_form,
    GameKind.COST_SHARING: build_cost_sharing,
    GameKind.NETWORK_CONTRIBUTION: build_network_contribution,
    GameKind.WELFARE_SHARING: build_welfare_sharing,
    GameKind.UTILITY_CONGESTION: build_utility_congestion,
}
