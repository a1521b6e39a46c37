import math

from rest_framework import serializers

from core.models import Direction
from core.serializers import ProfileField
from smoothness.models import SmoothnessCertificate, SmoothnessKind

UNBOUNDED = 'unbounded'


def finite(value):
    return value if value is None or math.isfinite(value) else None


class OrderingField(serializers.Field):
    """PlayerOrdering as its rank vector."""

    def to_representation(self, ordering):
        return list(ordering.ranks)


class SmoothnessWitnessSerializer(serializers.Serializer):
    profile = ProfileField()
    ordering = OrderingField(allow_null=True)
    deviation_sum = serializers.FloatField()
    bound = serializers.FloatField()


class FrontierPointField(serializers.ListField):
    child = serializers.FloatField(min_value=0)
    min_length = 2
    max_length = 2


class SmoothnessCertificateSerializer(serializers.Serializer):
    """
    Certificate documents. `lambda` is a keyword, so the field is declared as
    `lam` and published under its wire name.
    """
    kind = serializers.ChoiceField(choices=SmoothnessKind.choices, default=SmoothnessKind.COALITIONAL)
    direction = serializers.ChoiceField(choices=Direction.choices, required=False)
    s_star = ProfileField(min_length=1)
    lam = serializers.FloatField(source='lam', min_value=0)
    mu = serializers.FloatField(min_value=0)
    opt = serializers.FloatField(required=False)
    verified = serializers.BooleanField(default=False)
    witness = SmoothnessWitnessSerializer(read_only=True, allow_null=True)
    frontier = serializers.ListField(child=FrontierPointField(), required=False, default=list)
    best_ratio = serializers.FloatField(required=False, allow_null=True, default=None)
    exact = serializers.BooleanField(default=True)

    def get_fields(self):
        return {
            ('lambda' if name == 'lam' else name): field
            for name, field in super().get_fields().items()
        }

    def validate_s_star(self, value):
        if any(k is None for k in value):
            raise serializers.ValidationError('Anchor profile must name a strategy for every player.')
        return tuple(value)

    def create(self, validated_data):
        return SmoothnessCertificate(
            kind=validated_data['kind'],
            direction=validated_data.get('direction', Direction.UTILITY_MAX),
            s_star=validated_data['s_star'],
            lam=validated_data['lam'],
            mu=validated_data['mu'],
            opt=validated_data.get('opt', 0.0),
            verified=validated_data['verified'],
            frontier=[tuple(point) for point in validated_data['frontier']],
            best_ratio=validated_data['best_ratio'],
            exact=validated_data['exact'],
        )

    def to_representation(self, certificate):
        data = super().to_representation(certificate)
        if certificate.best_ratio is None:
            data['best_ratio_reason'] = UNBOUNDED
        return data


class StructuralCheckSerializer(serializers.Serializer):
    property = serializers.CharField(source='prop')
    holds = serializers.BooleanField()
    value = serializers.SerializerMethodField(method_name='checked_value')
    witness = serializers.DictField()
    reason = serializers.CharField(allow_blank=True)

    def checked_value(self, check):
        if isinstance(check.value, float):
            return finite(check.value)
        return check.value

    def to_representation(self, check):
        data = super().to_representation(check)
        if isinstance(check.value, float) and not math.isfinite(check.value) and not check.reason:
            data['reason'] = UNBOUNDED
        return data
