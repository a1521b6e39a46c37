import numpy as np
from rest_framework import serializers

from core.models import Direction
from games.models import EdgeFunction, GameKind

EDGE_PARAMETERS = {
    EdgeFunction.CONSTANT: {'c'},
    EdgeFunction.PRODUCT: {'c'},
    EdgeFunction.MIN: {'c'},
    EdgeFunction.SUM: {'c'},
    EdgeFunction.THRESHOLD: {'H'},
}


class StrictSerializer(serializers.Serializer):
    """Rejects keys the serializer does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
        return super().to_internal_value(data)


def unique_ids(items, label):
    ids = [item['id'] for item in items]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise serializers.ValidationError({label: [f"Duplicate id {i!r}." for i in duplicates]})
    return {identifier: index for index, identifier in enumerate(ids)}


def table_shape_errors(table, shape):
    try:
        array = np.asarray(table, dtype=float)
    except (TypeError, ValueError):
        return ['Must be a nested array of numbers.']
    if array.shape != shape:
        return [f"Expected shape {list(shape)}, got {list(array.shape)}."]
    if not np.all(np.isfinite(array)):
        return ['Values must be finite.']
    return []


class NormalFormSerializer(StrictSerializer):
    players = serializers.IntegerField(min_value=1)
    strategies = serializers.ListField(
        child=serializers.ListField(child=serializers.CharField(), min_length=1),
    )
    utilities = serializers.ListField(child=serializers.JSONField())
    direction = serializers.ChoiceField(choices=Direction.choices, default=Direction.UTILITY_MAX)
    potential = serializers.JSONField(required=False, allow_null=True, default=None)
    out = serializers.ListField(
        child=serializers.IntegerField(min_value=0, allow_null=True), required=False, default=None,
    )

    def validate(self, attrs):
        n = attrs['players']
        if len(attrs['strategies']) != n:
            raise serializers.ValidationError({'strategies': [f"Expected {n} strategy lists."]})
        for i, names in enumerate(attrs['strategies']):
            if len(set(names)) != len(names):
                raise serializers.ValidationError({'strategies': {i: ['Strategy names must be unique.']}})
        if len(attrs['utilities']) != n:
            raise serializers.ValidationError({'utilities': [f"Expected {n} utility tables."]})
        shape = tuple(len(names) for names in attrs['strategies'])

        errors = {i: e for i, u in enumerate(attrs['utilities']) if (e := table_shape_errors(u, shape))}
        if errors:
            raise serializers.ValidationError({'utilities': errors})
        for i, u in enumerate(attrs['utilities']):
            if np.any(np.asarray(u, dtype=float) < 0):
                raise serializers.ValidationError({'utilities': {i: ['Values must be non-negative.']}})

        if attrs['potential'] is not None:
            errors = table_shape_errors(attrs['potential'], shape)
            if errors:
                raise serializers.ValidationError({'potential': errors})

        out = attrs['out']
        if out is not None:
            if len(out) != n:
                raise serializers.ValidationError({'out': [f"Expected {n} entries."]})
            if any(k is None for k in out):
                if any(k is not None for k in out):
                    raise serializers.ValidationError(
                        {'out': ['Name an out strategy for every player or for none.']}
                    )
                attrs['out'] = None
            else:
                for i, k in enumerate(out):
                    if k >= shape[i]:
                        raise serializers.ValidationError({'out': {i: ['Strategy index out of range.']}})
                    at_out = np.take(np.asarray(attrs['utilities'][i], dtype=float), k, axis=i)
                    if np.any(at_out != 0):
                        raise serializers.ValidationError(
                            {'out': {i: ['The player must get exactly 0 at its out strategy.']}}
                        )
        return attrs


class ResourceSerializer(StrictSerializer):
    id = serializers.CharField()
    cost = serializers.FloatField(min_value=0)


class StrategyListSerializer(StrictSerializer):
    strategies = serializers.ListField(
        child=serializers.ListField(child=serializers.CharField(), allow_empty=True),
        min_length=1,
    )


def resolve_strategies(players, index):
    """Resource ids to sorted index tuples, rejecting unknown ids and repeated sets."""
    resolved, errors = [], {}
    for i, player in enumerate(players):
        sets = []
        for k, strategy in enumerate(player['strategies']):
            missing = [r for r in strategy if r not in index]
            if missing:
                errors[i] = {'strategies': {k: [f"Unknown resource {r!r}." for r in missing]}}
                break
            resources = tuple(sorted(set(index[r] for r in strategy)))
            if resources in sets:
                errors[i] = {'strategies': {k: ['Strategy repeats an earlier one.']}}
                break
            sets.append(resources)
        resolved.append(sets)
    if errors:
        raise serializers.ValidationError({'players': errors})
    return resolved


class CostSharingSerializer(StrictSerializer):
    resources = ResourceSerializer(many=True)
    players = StrategyListSerializer(many=True, allow_empty=False)

    def validate(self, attrs):
        index = unique_ids(attrs['resources'], 'resources')
        attrs['resolved'] = resolve_strategies(attrs['players'], index)
        return attrs


class NodeSerializer(StrictSerializer):
    id = serializers.CharField()
    budget = serializers.FloatField(min_value=0)


class EdgeSerializer(StrictSerializer):
    a = serializers.CharField()
    b = serializers.CharField()
    fn = serializers.ChoiceField(choices=EdgeFunction.choices)
    params = serializers.DictField(child=serializers.FloatField(min_value=0))

    def validate(self, attrs):
        expected = EDGE_PARAMETERS[attrs['fn']]
        if set(attrs['params']) != expected:
            raise serializers.ValidationError(
                {'params': [f"{attrs['fn']} takes parameters {sorted(expected)}."]}
            )
        if attrs['a'] == attrs['b']:
            raise serializers.ValidationError({'b': ['An edge must join two distinct nodes.']})
        return attrs


class NetworkContributionSerializer(StrictSerializer):
    nodes = NodeSerializer(many=True, allow_empty=False)
    edges = EdgeSerializer(many=True)
    grid = serializers.IntegerField(min_value=1)

    def validate(self, attrs):
        index = unique_ids(attrs['nodes'], 'nodes')
        errors = {}
        for e, edge in enumerate(attrs['edges']):
            missing = [edge[end] for end in ('a', 'b') if edge[end] not in index]
            if missing:
                errors[e] = [f"Unknown node {node!r}." for node in missing]
        if errors:
            raise serializers.ValidationError({'edges': errors})
        attrs['node_index'] = index
        return attrs


class FactorSerializer(StrictSerializer):
    a = serializers.FloatField(min_value=0)
    cap = serializers.FloatField(min_value=0, allow_null=True, required=False, default=None)


class ProjectSerializer(StrictSerializer):
    id = serializers.CharField()
    factors = serializers.DictField(child=FactorSerializer())


class WelfarePlayerSerializer(StrictSerializer):
    budget = serializers.FloatField(min_value=0)
    group = serializers.CharField()
    projects = serializers.ListField(child=serializers.CharField(), allow_empty=True)


class WelfareSharingSerializer(StrictSerializer):
    projects = ProjectSerializer(many=True)
    players = WelfarePlayerSerializer(many=True, allow_empty=False)
    grid = serializers.IntegerField(min_value=1)

    def validate(self, attrs):
        index = unique_ids(attrs['projects'], 'projects')
        errors = {}
        for i, player in enumerate(attrs['players']):
            missing = [p for p in player['projects'] if p not in index]
            if missing:
                errors[i] = {'projects': [f"Unknown project {p!r}." for p in missing]}
            elif len(set(player['projects'])) != len(player['projects']):
                errors[i] = {'projects': ['Projects must be unique.']}
        if errors:
            raise serializers.ValidationError({'players': errors})

        for j, project in enumerate(attrs['projects']):
            groups = {p['group'] for p in attrs['players'] if project['id'] in p['projects']}
            missing = sorted(groups - set(project['factors']))
            if missing:
                errors[j] = {'factors': [f"No factor for participating group {g!r}." for g in missing]}
        if errors:
            raise serializers.ValidationError({'projects': errors})
        attrs['project_index'] = index
        return attrs


class CongestionResourceSerializer(StrictSerializer):
    id = serializers.CharField()
    pi = serializers.ListField(
        child=serializers.FloatField(min_value=0), min_length=1, required=False, default=None,
    )
    harmonic = serializers.FloatField(min_value=0, required=False, default=None)

    def validate(self, attrs):
        if (attrs['pi'] is None) == (attrs['harmonic'] is None):
            raise serializers.ValidationError(['Give exactly one of pi or harmonic.'])
        return attrs


class UtilityCongestionSerializer(StrictSerializer):
    resources = CongestionResourceSerializer(many=True)
    players = StrategyListSerializer(many=True, allow_empty=False)

    def validate(self, attrs):
        index = unique_ids(attrs['resources'], 'resources')
        n = len(attrs['players'])
        errors = {
            r: {'pi': [f"Expected {n} entries, one per occupancy level."]}
            for r, resource in enumerate(attrs['resources'])
            if resource['pi'] is not None and len(resource['pi']) != n
        }
        if errors:
            raise serializers.ValidationError({'resources': errors})
        attrs['resolved'] = resolve_strategies(attrs['players'], index)
        return attrs


PAYLOAD_SERIALIZERS = {
    GameKind.NORMAL_FORM: NormalFormSerializer,
    GameKind.COST_SHARING: CostSharingSerializer,
    GameKind.NETWORK_CONTRIBUTION: NetworkContributionSerializer,
    GameKind.WELFARE_SHARING: WelfareSharingSerializer,
    GameKind.UTILITY_CONGESTION: UtilityCongestionSerializer,
}


class GameSpecSerializer(StrictSerializer):
    kind = serializers.ChoiceField(choices=GameKind.choices)
    payload = serializers.DictField()

    def validate(self, attrs):
        payload = PAYLOAD_SERIALIZERS[attrs['kind']](data=attrs['payload'])
        if not payload.is_valid():
            raise serializers.ValidationError({'payload': payload.errors})
        attrs['payload'] = payload.validated_data
        return attrs

