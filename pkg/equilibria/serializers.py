import csv

from rest_framework import serializers

from core.serializers import ProfileField


class ProfileEntrySerializer(serializers.Serializer):
    profile = ProfileField()
    names = serializers.ListField(child=serializers.CharField())
    welfare = serializers.FloatField()


class DeviationSerializer(serializers.Serializer):
    coalition = serializers.ListField(child=serializers.IntegerField(), source='coalition.members')
    joint = serializers.ListField(child=serializers.IntegerField())
    profile = ProfileField()
    names = serializers.ListField(child=serializers.CharField())


class RatioSerializer(serializers.Serializer):
    value = serializers.FloatField(allow_null=True)
    reason = serializers.CharField(allow_blank=True)


class EquilibriumReportSerializer(serializers.Serializer):
    direction = serializers.CharField()
    opt = ProfileEntrySerializer()
    nash = ProfileEntrySerializer(many=True)
    strong_nash = ProfileEntrySerializer(many=True)
    poa = RatioSerializer()
    pos = RatioSerializer()
    spoa = RatioSerializer()
    witnesses = serializers.SerializerMethodField()

    def get_witnesses(self, report):
        return [
            {
                'profile': list(s),
                'deviation': DeviationSerializer(deviation).data if deviation else None,
            }
            for s, deviation in report.witnesses.items()
        ]


TABLE_HEADER = ['profile', 'names', 'welfare', 'is_nash', 'is_strong_nash']


def write_profile_table(rows, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(TABLE_HEADER)
    for row in rows:
        writer.writerow([
            '-'.join(str(k) for k in row.entry.profile),
            '|'.join(row.entry.names),
            repr(row.entry.welfare),
            str(row.is_nash).lower(),
            str(row.is_strong_nash).lower(),
        ])
